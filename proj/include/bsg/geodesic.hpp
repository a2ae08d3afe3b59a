#pragma once

// Geodesics of the deformed metric on T*M and on the unit cotangent bundle,
// the horizontal-lift ODE, and diagnostics along computed curves.
//
// State: base point x, fiber covector p, base velocity u = γ′ and covariant
// fiber velocity v = ∇_u p, so that dp_h/dt = v_h + Γ^i_jh p_i u^j.

#include "bsg/berger_sasaki.hpp"
#include "bsg/integrators.hpp"

#include <string>
#include <vector>

namespace bsg {

/// Loose membership check applied inside the unit-bundle right-hand side, where
/// intermediate Runge–Kutta stages leave the bundle by O(h²).
inline constexpr double kUnitBundleStageTolerance = 1e-2;

/// Samples per finite-difference stencil in the along-curve diagnostics
/// (fewer when the grid is shorter, but never below 7).
inline constexpr int kDiagnosticStencil = 9;

struct GeodesicState {
  Vector x;
  Vector p;
  Vector u;
  Vector v;

  int dim() const { return static_cast<int>(x.size()); }
  Vector pack() const;
  static GeodesicState unpack(const Vector& y);
};

enum class GeodesicSystem { TotalSpace, UnitBundle, HorizontalLift };

std::string to_string(GeodesicSystem system);

/// Total space: u′ = −Γ(u,u) + ℛ(ṽ,p̃)u and
/// ∇_u v = 2δ² μ ((δ²/λ) g⁻¹(v,p) pJ − vJ) with μ = g⁻¹(v,pJ).
GeodesicState total_space_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s);

/// Unit cotangent bundle. The fiber equation keeps the component along p that
/// holds the curve on g⁻¹(p,p) = 1:
///   ∇_u v = −2δ² μ vJ + c p,  c = −(g⁻¹(v,v) + g⁻¹(−2δ²μ vJ, p)) / g⁻¹(p,p).
/// Throws NotOnUnitBundle when |g⁻¹(p,p) − 1| exceeds the stage tolerance.
GeodesicState unit_bundle_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s);

/// The reduced fiber equation ∇_u v = −2δ² μ vJ, without
/// the normal component. Kept for comparison; it does not preserve g⁻¹(p,p).
GeodesicState unit_bundle_rhs_without_normal(const BergerSasakiConfig& cfg,
                                             const GeodesicState& s);

/// Parallel transport of a covector: dp_h/dt = Γ^i_jh p_i u^j.
Vector horizontal_lift_rhs(const BergerSasakiConfig& cfg, const Vector& x, const Vector& u,
                           const Vector& p);

/// Base geodesic with parallel fiber: v stays 0.
GeodesicState horizontal_lift_system_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s);

GeodesicState geodesic_rhs(const BergerSasakiConfig& cfg, GeodesicSystem system,
                           const GeodesicState& s);

/// p ↦ p/|p|, v ↦ v − g⁻¹(v,p) p.
GeodesicState renormalize_to_unit_bundle(const BergerSasakiConfig& cfg, const GeodesicState& s);

struct Trajectory {
  GeodesicSystem system = GeodesicSystem::TotalSpace;
  double delta = 0.0;
  bool renormalized = false;
  std::vector<double> t;
  std::vector<GeodesicState> states;
  long steps = 0;

  std::size_t size() const { return t.size(); }
  CurveSamples base_curve() const;
};

/// `count` equally spaced times from t0 to t1 inclusive.
std::vector<double> sample_times(double t0, double t1, int count);

/// Throws TrajectoryError (with the partial trajectory's solution) on failure.
Trajectory integrate_geodesic(const BergerSasakiConfig& cfg, GeodesicSystem system,
                              const GeodesicState& initial, const std::vector<double>& times,
                              const StepPolicy& policy, bool renormalize = false);

/// Unit-bundle initial data from arbitrary directions: p scaled to g⁻¹(p,p) = 1,
/// v made orthogonal to p and scaled to κ² + δ²μ² = K, u scaled to
/// |u|² = 1 − K. Throws DegenerateSpeed when K ∉ [0, 1) or a direction vanishes.
GeodesicState unit_initial_state(const BergerSasakiConfig& cfg, const Vector& x, const Vector& p,
                                 const Vector& u, const Vector& v, double K);

/// Sampled curve (γ, ϑ) to be checked against the geodesic equations.
struct SampledLift {
  CurveSamples base;
  std::vector<Vector> p;
};

struct ResidualSeries {
  std::vector<double> t;
  std::vector<double> horizontal;  ///< |γ″ − ℛ(ϑ̃′,ϑ̃)γ′|_g
  std::vector<double> vertical;    ///< |ϑ″ − fiber right-hand side|_{g⁻¹}
  std::vector<double> total;

  double max() const;
};

/// Needs at least 7 samples (GridTooCoarse otherwise).
ResidualSeries geodesic_residual(const BergerSasakiConfig& cfg, const SampledLift& curve,
                                 GeodesicSystem system = GeodesicSystem::TotalSpace);
SampledLift to_sampled_lift(const Trajectory& traj);

struct Series {
  std::string name;
  std::vector<double> values;
  double drift() const;  ///< max |value − value[0]|
};

struct InvariantReport {
  std::vector<double> t;
  Series kappa{"kappa", {}};
  Series mu{"mu", {}};
  Series K{"K", {}};
  Series speed{"speed", {}};
  Series r2{"r2", {}};
  Series orth{"orth", {}};
  Series energy{"energy", {}};            ///< G(C′, C′)
  Series speed_defect{"speed_defect", {}};  ///< | |γ′| − √(1 − K) |

  std::vector<const Series*> all() const {
    return {&kappa, &mu, &K, &speed, &r2, &orth, &energy, &speed_defect};
  }
};

InvariantReport invariant_report(const BergerSasakiConfig& cfg, const Trajectory& traj);

struct ParallelismReport {
  std::vector<double> t;
  std::vector<double> residual;  ///< ‖∇_{γ′} ℛ‖_∞ per sample
  std::vector<double> norm;      ///< ‖ℛ‖_∞ per sample

  double max_residual() const;
  double max_norm() const;
};

ParallelismReport parallelism_residual(const BergerSasakiConfig& cfg, const Trajectory& traj);

struct FrenetReport {
  std::vector<double> s;                    ///< arc length at each reported sample
  std::vector<std::vector<double>> k;       ///< k[i][sample], i = 0 … 2m−2
  std::vector<int> rank;                    ///< Frenet frame length per sample
  std::vector<double> mean;
  std::vector<double> relative_spread;      ///< std/|mean| (std when mean ≈ 0)
  bool rank_deficient = false;
  double max_orthonormality_error = 0.0;
};

inline constexpr double kFrenetRankTolerance = 1e-8;

/// Frenet curvatures of the base curve with ds/dt = √(1 − K). Derivatives use
/// every trajectory sample; `report_samples` evenly spaced samples are reported.
FrenetReport frenet_curvatures(const BergerSasakiConfig& cfg, const Trajectory& traj,
                               int report_samples = 100);

/// (x, p, u, v) ↦ (x, pJ, u, vJ). Throws NotOnUnitBundle.
GeodesicState j_rotate_initial_data(const BergerSasakiConfig& cfg, const GeodesicState& s);

}  // namespace bsg
