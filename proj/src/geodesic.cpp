#include "bsg/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bsg {

Vector GeodesicState::pack() const {
  const Eigen::Index n = x.size();
  Vector y(4 * n);
  y << x, p, u, v;
  return y;
}

GeodesicState GeodesicState::unpack(const Vector& y) {
  const Eigen::Index n = y.size() / 4;
  return {y.segment(0, n), y.segment(n, n), y.segment(2 * n, n), y.segment(3 * n, n)};
}

std::string to_string(GeodesicSystem system) {
  switch (system) {
    case GeodesicSystem::TotalSpace: return "total_space";
    case GeodesicSystem::UnitBundle: return "unit_bundle";
    case GeodesicSystem::HorizontalLift: return "horizontal_lift";
  }
  return "unknown";
}

namespace {

enum class Fiber { TotalSpace, UnitBundle, UnitBundleWithoutNormal };

// ∇_u v prescribed by the fiber line of each system.
Vector fiber_acceleration(const LiftFrame& f, const Vector& v, Fiber kind) {
  const double d2 = f.delta() * f.delta();
  const double mu = f.twist(v);
  if (kind == Fiber::TotalSpace) {
    return 2.0 * d2 * mu * ((d2 / f.lambda()) * f.inv(v, f.p()) * f.pJ() - f.act(v));
  }
  const Vector F = -2.0 * d2 * mu * f.act(v);
  if (kind == Fiber::UnitBundleWithoutNormal) return F;
  const double c = -(f.inv(v, v) + f.inv(F, f.p())) / f.r2();
  return F + c * f.p();
}

GeodesicState full_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s, Fiber kind) {
  const LiftFrame f(cfg, {s.x, s.p});
  const Christoffel& gamma = f.geometry().gamma;
  GeodesicState d;
  d.x = s.u;
  d.u = -christoffel_contract(gamma, s.u, s.u) + deformed_curvature(f, s.v) * s.u;
  d.p = s.v + covector_connection_term(gamma, s.p, s.u);
  d.v = covector_connection_term(gamma, s.v, s.u) + fiber_acceleration(f, s.v, kind);
  return d;
}

void require_unit_state(const BergerSasakiConfig& cfg, const GeodesicState& s, double tol) {
  const double r2 = inner_inv(cfg.chart(), s.x, s.p, s.p);
  if (!(std::abs(r2 - 1.0) < tol)) {
    std::ostringstream os;
    os << "g^-1(p,p) = " << r2;
    throw Error(ErrorCode::NotOnUnitBundle, os.str());
  }
}

constexpr std::size_t kMinDiagnosticSamples = 7;

// Widest stencil up to kDiagnosticStencil that the grid supports.
int diagnostic_stencil(std::size_t samples) {
  if (samples < kMinDiagnosticSamples) {
    throw Error(ErrorCode::GridTooCoarse, "along-curve diagnostics need at least 7 samples");
  }
  return static_cast<int>(std::min<std::size_t>(samples, kDiagnosticStencil));
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double e : v) acc += (e - m) * (e - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

GeodesicState total_space_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s) {
  return full_rhs(cfg, s, Fiber::TotalSpace);
}

GeodesicState unit_bundle_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s) {
  require_unit_state(cfg, s, kUnitBundleStageTolerance);
  return full_rhs(cfg, s, Fiber::UnitBundle);
}

GeodesicState unit_bundle_rhs_without_normal(const BergerSasakiConfig& cfg,
                                             const GeodesicState& s) {
  require_unit_state(cfg, s, kUnitBundleStageTolerance);
  return full_rhs(cfg, s, Fiber::UnitBundleWithoutNormal);
}

Vector horizontal_lift_rhs(const BergerSasakiConfig& cfg, const Vector& x, const Vector& u,
                           const Vector& p) {
  return covector_connection_term(christoffel_at(cfg.chart(), x), p, u);
}

GeodesicState horizontal_lift_system_rhs(const BergerSasakiConfig& cfg, const GeodesicState& s) {
  const Christoffel gamma = christoffel_at(cfg.chart(), s.x);
  GeodesicState d;
  d.x = s.u;
  d.u = -christoffel_contract(gamma, s.u, s.u);
  d.p = covector_connection_term(gamma, s.p, s.u);
  d.v = Vector::Zero(s.dim());
  return d;
}

GeodesicState geodesic_rhs(const BergerSasakiConfig& cfg, GeodesicSystem system,
                           const GeodesicState& s) {
  switch (system) {
    case GeodesicSystem::TotalSpace: return total_space_rhs(cfg, s);
    case GeodesicSystem::UnitBundle: return unit_bundle_rhs(cfg, s);
    case GeodesicSystem::HorizontalLift: return horizontal_lift_system_rhs(cfg, s);
  }
  throw std::logic_error("unknown geodesic system");
}

GeodesicState renormalize_to_unit_bundle(const BergerSasakiConfig& cfg, const GeodesicState& s) {
  const GeometryCache geo = geometry_at(cfg.chart(), s.x);
  GeodesicState out = s;
  out.p = s.p / std::sqrt(inner_inv(geo, s.p, s.p));
  out.v = s.v - inner_inv(geo, s.v, out.p) * out.p;
  return out;
}

CurveSamples Trajectory::base_curve() const {
  CurveSamples c;
  c.t = t;
  for (const auto& s : states) {
    c.x.push_back(s.x);
    c.u.push_back(s.u);
  }
  return c;
}

std::vector<double> sample_times(double t0, double t1, int count) {
  if (count < 2) throw std::invalid_argument("need at least two sample times");
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    t[static_cast<std::size_t>(i)] =
        i == count - 1 ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / (count - 1);
  }
  return t;
}

Trajectory integrate_geodesic(const BergerSasakiConfig& cfg, GeodesicSystem system,
                              const GeodesicState& initial, const std::vector<double>& times,
                              const StepPolicy& policy, bool renormalize) {
  cfg.chart().require_contains(initial.x);
  if (system == GeodesicSystem::UnitBundle) {
    require_unit_state(cfg, initial, kUnitBundleTolerance);
    const double orth = inner_inv(cfg.chart(), initial.x, initial.v, initial.p);
    if (std::abs(orth) >= kUnitBundleTolerance) {
      throw Error(ErrorCode::NotOnUnitBundle, "initial fiber velocity is not orthogonal to p");
    }
  }
  const OdeRhs rhs = [&](double, const Vector& y) {
    return geodesic_rhs(cfg, system, GeodesicState::unpack(y)).pack();
  };
  StepHook hook;
  if (renormalize && system == GeodesicSystem::UnitBundle) {
    hook = [&](const Vector& y) {
      return renormalize_to_unit_bundle(cfg, GeodesicState::unpack(y)).pack();
    };
  }
  const OdeSolution sol = integrate(rhs, initial.pack(), times, policy, hook);

  Trajectory traj;
  traj.system = system;
  traj.delta = cfg.delta();
  traj.renormalized = static_cast<bool>(hook);
  traj.t = sol.t;
  traj.steps = sol.accepted_steps;
  for (const auto& y : sol.y) traj.states.push_back(GeodesicState::unpack(y));
  return traj;
}

GeodesicState unit_initial_state(const BergerSasakiConfig& cfg, const Vector& x, const Vector& p,
                                 const Vector& u, const Vector& v, double K) {
  if (!(K >= 0.0 && K < 1.0)) throw Error(ErrorCode::DegenerateSpeed, "K must lie in [0, 1)");
  const LiftFrame f0(cfg, {x, p}, false);
  if (f0.r2() <= 0.0) throw Error(ErrorCode::DegenerateSpeed, "fiber direction vanishes");
  const Vector pu = p / std::sqrt(f0.r2());
  const LiftFrame f(cfg, {x, pu}, false);

  GeodesicState s{x, pu, u, v - f.inv(v, pu) * pu};
  const double d2 = f.delta() * f.delta();
  const double mu = f.twist(s.v);
  const double Kv = f.inv(s.v, s.v) + d2 * mu * mu;
  if (K == 0.0) {
    s.v.setZero();
  } else {
    if (Kv <= 0.0) throw Error(ErrorCode::DegenerateSpeed, "fiber velocity vanishes after projection");
    s.v *= std::sqrt(K / Kv);
  }
  const double speed2 = u.dot(f.geometry().g * u);
  if (speed2 <= 0.0) throw Error(ErrorCode::DegenerateSpeed, "base velocity vanishes");
  s.u *= std::sqrt((1.0 - K) / speed2);
  return s;
}

double ResidualSeries::max() const {
  return total.empty() ? 0.0 : *std::max_element(total.begin(), total.end());
}

SampledLift to_sampled_lift(const Trajectory& traj) {
  SampledLift c;
  c.base = traj.base_curve();
  for (const auto& s : traj.states) c.p.push_back(s.p);
  return c;
}

ResidualSeries geodesic_residual(const BergerSasakiConfig& cfg, const SampledLift& curve,
                                 GeodesicSystem system) {
  const std::size_t n = curve.base.size();
  if (n < 7 || curve.p.size() != n) {
    throw Error(ErrorCode::GridTooCoarse, "geodesic residual needs at least 7 matching samples");
  }
  const int stencil = diagnostic_stencil(n);
  CurveSamples base = curve.base;
  if (base.u.empty()) {
    base.u = time_derivative<Vector>(base.t, std::span<const Vector>(base.x), stencil);
  }
  const ManifoldChart& chart = cfg.chart();
  const auto v = covariant_derivative_along(chart, base, curve.p, FieldKind::Covector, stencil);
  const auto upp = covariant_derivative_along(chart, base, base.u, FieldKind::Vector, stencil);
  const auto vpp = covariant_derivative_along(chart, base, v, FieldKind::Covector, stencil);

  const Fiber kind = system == GeodesicSystem::UnitBundle ? Fiber::UnitBundle : Fiber::TotalSpace;
  ResidualSeries out;
  for (std::size_t k = 0; k < n; ++k) {
    const LiftFrame f(cfg, {base.x[k], curve.p[k]});
    Vector rh, rv;
    if (system == GeodesicSystem::HorizontalLift) {
      rh = upp[k];
      rv = v[k];
    } else {
      rh = upp[k] - deformed_curvature(f, v[k]) * base.u[k];
      rv = vpp[k] - fiber_acceleration(f, v[k], kind);
    }
    out.t.push_back(base.t[k]);
    out.horizontal.push_back(rh.cwiseAbs().maxCoeff());
    out.vertical.push_back(rv.cwiseAbs().maxCoeff());
    out.total.push_back(std::max(out.horizontal.back(), out.vertical.back()));
  }
  return out;
}

double Series::drift() const {
  double d = 0.0;
  for (double e : values) d = std::max(d, std::abs(e - values.front()));
  return d;
}

InvariantReport invariant_report(const BergerSasakiConfig& cfg, const Trajectory& traj) {
  InvariantReport r;
  r.t = traj.t;
  const double d2 = cfg.delta() * cfg.delta();
  for (const auto& s : traj.states) {
    const LiftFrame f(cfg, {s.x, s.p}, false);
    const double kappa2 = f.inv(s.v, s.v);
    const double mu = f.twist(s.v);
    const double K = kappa2 + d2 * mu * mu;
    const double speed2 = s.u.dot(f.geometry().g * s.u);
    r.kappa.values.push_back(std::sqrt(std::max(0.0, kappa2)));
    r.mu.values.push_back(mu);
    r.K.values.push_back(K);
    r.speed.values.push_back(std::sqrt(std::max(0.0, speed2)));
    r.r2.values.push_back(f.r2());
    r.orth.values.push_back(f.inv(s.v, s.p));
    r.energy.values.push_back(speed2 + K);
    r.speed_defect.values.push_back(
        std::abs(r.speed.values.back() - std::sqrt(std::max(0.0, 1.0 - K))));
  }
  return r;
}

double ParallelismReport::max_residual() const {
  return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
}

double ParallelismReport::max_norm() const {
  return norm.empty() ? 0.0 : *std::max_element(norm.begin(), norm.end());
}

ParallelismReport parallelism_residual(const BergerSasakiConfig& cfg, const Trajectory& traj) {
  std::vector<Matrix> field;
  field.reserve(traj.size());
  for (const auto& s : traj.states) field.push_back(deformed_curvature(cfg, {s.x, s.p}, s.v));
  const CurveSamples curve = traj.base_curve();
  const int stencil = diagnostic_stencil(traj.size());
  const auto d = covariant_derivative_along(cfg.chart(), curve, field, stencil);
  ParallelismReport r;
  r.t = traj.t;
  for (std::size_t k = 0; k < field.size(); ++k) {
    r.residual.push_back(d[k].cwiseAbs().maxCoeff());
    r.norm.push_back(field[k].cwiseAbs().maxCoeff());
  }
  return r;
}

FrenetReport frenet_curvatures(const BergerSasakiConfig& cfg, const Trajectory& traj,
                               int report_samples) {
  const std::size_t n_samples = traj.size();
  if (n_samples < kMinDiagnosticSamples) {
    throw Error(ErrorCode::GridTooCoarse, "Frenet frame needs at least 7 samples");
  }
  const int stencil = diagnostic_stencil(n_samples);
  const int n = cfg.dim();
  const ManifoldChart& chart = cfg.chart();

  const InvariantReport inv = invariant_report(cfg, traj);
  const double one_minus_K = 1.0 - inv.K.values.front();
  if (one_minus_K < 1e-10) throw Error(ErrorCode::DegenerateSpeed, "1 - K is not positive");
  const double ds_dt = std::sqrt(one_minus_K);

  const CurveSamples curve = traj.base_curve();
  std::vector<GeometryCache> geo;
  geo.reserve(n_samples);
  for (const auto& x : curve.x) geo.push_back(geometry_at(chart, x));
  auto dot = [&](std::size_t k, const Vector& a, const Vector& b) { return a.dot(geo[k].g * b); };

  // Successive covariant derivatives E_1 = γ′, E_{j+1} = ∇_{γ′} E_j.
  std::vector<std::vector<Vector>> E{curve.u};
  for (int j = 1; j < n; ++j) {
    E.push_back(covariant_derivative_along(chart, curve, E.back(), FieldKind::Vector, stencil));
  }

  // Modified Gram–Schmidt; the frame length is the smallest rank over samples.
  std::vector<std::vector<Vector>> nu(static_cast<std::size_t>(n),
                                      std::vector<Vector>(n_samples));
  FrenetReport rep;
  int rank = n;
  for (std::size_t k = 0; k < n_samples; ++k) {
    int r = 0;
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
      Vector w = E[static_cast<std::size_t>(j)][k];
      scale = std::max(scale, std::sqrt(dot(k, w, w)));
      for (int i = 0; i < r; ++i) w -= dot(k, w, nu[i][k]) * nu[i][k];
      const double len = std::sqrt(dot(k, w, w));
      if (!(len > kFrenetRankTolerance * scale)) break;
      nu[static_cast<std::size_t>(r)][k] = w / len;
      ++r;
    }
    rank = std::min(rank, r);
  }
  if (rank < n) rep.rank_deficient = true;

  for (std::size_t k = 0; k < n_samples; ++k)
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < rank; ++j) {
        const double target = i == j ? 1.0 : 0.0;
        rep.max_orthonormality_error =
            std::max(rep.max_orthonormality_error, std::abs(dot(k, nu[i][k], nu[j][k]) - target));
      }

  std::vector<std::vector<double>> k_full(static_cast<std::size_t>(n - 1),
                                          std::vector<double>(n_samples, 0.0));
  for (int i = 0; i + 1 < rank; ++i) {
    const auto dnu = covariant_derivative_along(chart, curve, nu[i], FieldKind::Vector, stencil);
    for (std::size_t k = 0; k < n_samples; ++k) {
      k_full[i][k] = dot(k, dnu[k], nu[i + 1][k]) / ds_dt;
    }
  }

  const int m = std::max(2, std::min<int>(report_samples, static_cast<int>(n_samples)));
  std::vector<std::size_t> picks;
  for (int i = 0; i < m; ++i) {
    picks.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(n_samples - 1) / (m - 1))));
  }
  rep.k.assign(static_cast<std::size_t>(n - 1), {});
  for (std::size_t k : picks) {
    rep.s.push_back(ds_dt * (traj.t[k] - traj.t.front()));
    rep.rank.push_back(rank);
    for (int i = 0; i < n - 1; ++i) rep.k[i].push_back(k_full[i][k]);
  }
  for (const auto& series : rep.k) {
    const double mean = mean_of(series);
    const double sd = std_of(series);
    rep.mean.push_back(mean);
    rep.relative_spread.push_back(std::abs(mean) > 1e-12 ? sd / std::abs(mean) : sd);
  }
  return rep;
}

GeodesicState j_rotate_initial_data(const BergerSasakiConfig& cfg, const GeodesicState& s) {
  require_unit_state(cfg, s, kUnitBundleTolerance);
  const Matrix J = cfg.chart().complex_structure_at(s.x);
  return {s.x, covector_action(J, s.p), s.u, covector_action(J, s.v)};
}

}  // namespace bsg
