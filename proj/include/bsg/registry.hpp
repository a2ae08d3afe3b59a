#pragma once

// Named base manifolds with verified structure flags, plus the closed-form
// geodesics of the R² example.

#include "bsg/berger_sasaki.hpp"
#include "bsg/geodesic.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bsg {

struct ManifoldFlags {
  bool kahler = false;
  bool locally_symmetric = false;
  bool flat = false;
};

/// Largest residual of each structure check over the sampled points.
struct FlagEvidence {
  double kahler = 0.0;             ///< max of J² + I, Hermitian, Nijenhuis, ∇J residuals
  double curvature = 0.0;          ///< max |R^a_ijk|
  double curvature_derivative = 0.0;  ///< max |∇_m R^a_ijk|
  int points = 0;
};

inline constexpr double kKahlerFlagTolerance = 1e-6;
inline constexpr double kFlatFlagTolerance = 1e-6;
inline constexpr double kSymmetricFlagTolerance = 1e-4;
/// A false flag needs a residual above this at some sampled point.
inline constexpr double kFlagRefutationThreshold = 1e-3;

struct ManifoldRegistryEntry {
  std::string id;
  std::string description;
  std::string chart_domain;
  std::function<ManifoldChart()> make_chart;
  SampleBox sample_box;
  ManifoldFlags flags;
  bool closed_form_geodesics = false;
  FlagEvidence evidence;  ///< filled in at registration

  int dimension() const { return make_chart().dim(); }
};

FlagEvidence collect_flag_evidence(const ManifoldChart& chart, const SampleBox& box, int points,
                                   unsigned long long seed);

class ManifoldRegistry {
 public:
  /// The built-in entries, each verified on 50 points when first requested.
  static const ManifoldRegistry& builtin();

  /// Verifies the flags and throws std::runtime_error when the evidence
  /// contradicts any of them.
  void add(ManifoldRegistryEntry entry, int check_points = 50);

  const std::vector<ManifoldRegistryEntry>& entries() const { return entries_; }
  std::vector<std::string> ids() const;
  /// Throws UnknownManifold.
  const ManifoldRegistryEntry& find(const std::string& id) const;
  BergerSasakiConfig config(const std::string& id, double delta) const;

 private:
  std::vector<ManifoldRegistryEntry> entries_;
};

// Charts of the built-in entries.
ManifoldChart paper_r2_chart();                  ///< g = x²dx² + y²dy²
ManifoldChart flat_chart(int m);                 ///< Euclidean ℂᵐ
ManifoldChart fubini_study_chart();              ///< CP¹ in a stereographic chart
ManifoldChart nonsymmetric_conformal_chart();    ///< e^{(x²+y²)/2}(dx² + dy²)
ManifoldChart perturbed_r2_chart();              ///< (x² + y²/2)dx² + y²dy² with the example's J

/// Geodesics of the R² example: γ(t) = (√(2aαt + a²), √(2bβt + b²)).
struct ClosedFormExample {
  double a = 1.0;
  double b = 1.0;
  double alpha = 1.0;
  double beta = 2.0;
  double k1 = 1.0;
  double k2 = 1.0;

  Vector gamma(double t) const;
  Vector gamma_dot(double t) const;
  /// Parallel covector (k₁√(2aαt + a²), k₂√(2bβt + b²)).
  Vector parallel_covector(double t) const;
  /// The flat of γ′: (aα√(2aαt + a²), bβ√(2bβt + b²)).
  Vector velocity_covector(double t) const;

  /// Horizontal lift C₁ sampled at `times`.
  SampledLift horizontal_lift_curve(const std::vector<double>& times) const;
  /// C₂ = (γ, flat(γ′)) sampled at `times`.
  SampledLift velocity_lift_curve(const std::vector<double>& times) const;
  GeodesicState horizontal_lift_initial_state() const;
};

}  // namespace bsg
