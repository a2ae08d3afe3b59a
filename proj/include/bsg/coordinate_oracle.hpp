#pragma once

// Brute-force path through the natural coordinates (x^i, p_i) of T*M: the
// metric G as a 4m × 4m matrix, its Christoffel symbols by central
// differences, and coordinate connection / geodesic right-hand sides. Slow
// and used only for cross-checking the closed forms.

#include "bsg/berger_sasaki.hpp"

#include <string>
#include <vector>

namespace bsg {

inline constexpr double kOracleStep = 1e-5;

/// G_AB in the coordinate frame {∂_i, ∂_ī}.
Matrix induced_metric_at(const BergerSasakiConfig& cfg, const Vector& x, const Vector& p);

class InducedMetric {
 public:
  explicit InducedMetric(BergerSasakiConfig cfg) : cfg_(std::move(cfg)) {}
  const BergerSasakiConfig& config() const { return cfg_; }
  Matrix eval_at(const Vector& x, const Vector& p) const { return induced_metric_at(cfg_, x, p); }

 private:
  BergerSasakiConfig cfg_;
};

/// Γ̂^C_AB of G, extent 4m, from central differences of G with step `step`.
Christoffel induced_christoffel_at(const BergerSasakiConfig& cfg, const Vector& x, const Vector& p,
                                  double step = kOracleStep);

/// ∇̂_U V in coordinates. U is a coordinate vector (dx; dp); V is given by its
/// adapted-frame germ and is converted to coordinates internally.
Vector oracle_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp, const Vector& U,
                         const LiftedFieldGerm& V);
/// Same, reusing Γ̂ already computed at cp.
Vector oracle_connection(const BergerSasakiConfig& cfg, const CotangentPoint& cp,
                         const Christoffel& gamma_hat, const Vector& U, const LiftedFieldGerm& V);

/// z″ = −Γ̂(z′, z′) for z = (x; p).
Vector oracle_geodesic_rhs(const BergerSasakiConfig& cfg, const Vector& z, const Vector& zdot);

/// ‖a − b‖_∞ / max(1, ‖b‖_∞)
double relative_deviation(const Vector& value, const Vector& reference);

// Classical Sasaki metric and connection on T*M, written out directly for
// comparison with the δ = 0 case.

double sasaki_metric(const ManifoldChart& chart, const CotangentPoint& cp, const LiftedVector& U,
                     const LiftedVector& V);
LiftedVector sasaki_connection(const ManifoldChart& chart, const CotangentPoint& cp,
                               const LiftedVector& U, const LiftedFieldGerm& V);

struct CaseDeviation {
  std::string name;
  double max = 0.0;
  double mean = 0.0;
  int count = 0;

  void add(double d);
};

struct OracleReport {
  std::string manifold;
  double delta = 0.0;
  int configurations = 0;
  unsigned long long seed = 0;
  std::vector<CaseDeviation> cases;

  double max_deviation() const;
};

/// Draws `count` random configurations in `box` and compares every closed-form
/// connection case against the oracle.
OracleReport run_oracle_suite(const BergerSasakiConfig& cfg, const SampleBox& box, int count,
                              unsigned long long seed);

}  // namespace bsg
