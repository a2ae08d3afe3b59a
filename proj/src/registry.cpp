#include "bsg/registry.hpp"

#include "bsg/kahler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bsg {

namespace {

Matrix standard_structure(int n) {
  Matrix J = Matrix::Zero(n, n);
  for (int b = 0; b < n; b += 2) {
    J(b + 1, b) = 1.0;
    J(b, b + 1) = -1.0;
  }
  return J;
}

// g = e^{2φ} I in two dimensions with analytic ∂g = 2 ∂φ g.
ManifoldChart conformal_chart(std::function<double(const Vector&)> phi,
                              std::function<Vector(const Vector&)> grad_phi,
                              ManifoldChart::DomainPredicate domain) {
  auto metric = [phi](const Vector& x) -> Matrix {
    return std::exp(2.0 * phi(x)) * Matrix::Identity(2, 2);
  };
  auto jacobian = [phi, grad_phi](const Vector& x) {
    const double e = std::exp(2.0 * phi(x));
    const Vector dphi = grad_phi(x);
    MetricJacobian dg(2);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i) dg(k, i, i) = 2.0 * dphi[k] * e;
    return dg;
  };
  return ManifoldChart(2, metric, [](const Vector&) { return standard_structure(2); },
                       std::move(domain), jacobian);
}

Matrix r2_structure(const Vector& x) {
  Matrix J(2, 2);
  J << 0.0, x[1] / x[0], -x[0] / x[1], 0.0;
  return J;
}

bool positive_quadrant(const Vector& x) { return x[0] > 0.0 && x[1] > 0.0; }

Vector draw_unit(std::mt19937_64& rng, int n) {
  Vector v = random_vector(rng, n);
  return v / v.norm();
}

}  // namespace

ManifoldChart paper_r2_chart() {
  auto metric = [](const Vector& x) -> Matrix {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = x[0] * x[0];
    g(1, 1) = x[1] * x[1];
    return g;
  };
  auto jacobian = [](const Vector& x) {
    MetricJacobian dg(2);
    dg(0, 0, 0) = 2.0 * x[0];
    dg(1, 1, 1) = 2.0 * x[1];
    return dg;
  };
  return ManifoldChart(2, metric, r2_structure, positive_quadrant, jacobian);
}

ManifoldChart flat_chart(int m) {
  const int n = 2 * m;
  return ManifoldChart(
      n, [n](const Vector&) -> Matrix { return Matrix::Identity(n, n); },
      [n](const Vector&) { return standard_structure(n); }, nullptr,
      [n](const Vector&) { return MetricJacobian(n); });
}

ManifoldChart fubini_study_chart() {
  return conformal_chart(
      [](const Vector& x) { return std::log(2.0) - std::log1p(x.squaredNorm()); },
      [](const Vector& x) -> Vector { return -2.0 * x / (1.0 + x.squaredNorm()); }, nullptr);
}

ManifoldChart nonsymmetric_conformal_chart() {
  return conformal_chart([](const Vector& x) { return 0.25 * x.squaredNorm(); },
                         [](const Vector& x) -> Vector { return 0.5 * x; }, nullptr);
}

ManifoldChart perturbed_r2_chart() {
  auto metric = [](const Vector& x) -> Matrix {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = x[0] * x[0] + 0.5 * x[1] * x[1];
    g(1, 1) = x[1] * x[1];
    return g;
  };
  auto jacobian = [](const Vector& x) {
    MetricJacobian dg(2);
    dg(0, 0, 0) = 2.0 * x[0];
    dg(1, 0, 0) = x[1];
    dg(1, 1, 1) = 2.0 * x[1];
    return dg;
  };
  return ManifoldChart(2, metric, r2_structure, positive_quadrant, jacobian);
}

FlagEvidence collect_flag_evidence(const ManifoldChart& chart, const SampleBox& box, int points,
                                   unsigned long long seed) {
  const KahlerStructure ks(chart);
  const int n = chart.dim();
  std::mt19937_64 rng(seed);
  FlagEvidence ev;
  ev.points = points;
  for (int s = 0; s < points; ++s) {
    const Vector x = box.draw(rng);
    const Vector X = draw_unit(rng, n);
    const Vector Y = draw_unit(rng, n);
    ev.kahler = std::max({ev.kahler, check_almost_complex(ks, x), check_hermitian(ks, x),
                          nijenhuis_at(ks, x, X, Y).cwiseAbs().maxCoeff(), check_kahler(ks, x)});
    ev.curvature = std::max(ev.curvature, riemann_at(chart, x).max_abs());
    ev.curvature_derivative =
        std::max(ev.curvature_derivative, riemann_covariant_derivative_at(chart, x).max_abs());
  }
  return ev;
}

void ManifoldRegistry::add(ManifoldRegistryEntry entry, int check_points) {
  const ManifoldChart chart = entry.make_chart();
  entry.evidence = collect_flag_evidence(chart, entry.sample_box, check_points, 20240601ULL);
  const FlagEvidence& ev = entry.evidence;
  std::ostringstream problems;
  auto verdict = [&](const char* name, bool flag, double residual, double tol) {
    if (flag && !(residual < tol)) {
      problems << name << " flag set but residual " << residual << " >= " << tol << "; ";
    } else if (!flag && !(residual > kFlagRefutationThreshold)) {
      problems << name << " flag unset but residual " << residual << " shows no violation; ";
    }
  };
  verdict("kahler", entry.flags.kahler, ev.kahler, kKahlerFlagTolerance);
  verdict("flat", entry.flags.flat, ev.curvature, kFlatFlagTolerance);
  verdict("locally_symmetric", entry.flags.locally_symmetric, ev.curvature_derivative,
          kSymmetricFlagTolerance);
  if (!problems.str().empty()) {
    throw std::runtime_error("registration of '" + entry.id + "' failed: " + problems.str());
  }
  entries_.push_back(std::move(entry));
}

const ManifoldRegistry& ManifoldRegistry::builtin() {
  static const ManifoldRegistry registry = [] {
    ManifoldRegistry r;
    auto box2 = [](double lo, double hi) {
      return SampleBox{Vector::Constant(2, lo), Vector::Constant(2, hi)};
    };
    r.add({"paper-r2-kahler", "R^2 with g = x^2 dx^2 + y^2 dy^2 and J d_x = -(x/y) d_y",
           "x > 0, y > 0", paper_r2_chart, box2(0.5, 5.0), {true, true, true}, true, {}});
    r.add({"flat-cm", "Euclidean C^2 = R^4 with the standard complex structure", "all of R^4",
           [] { return flat_chart(2); },
           SampleBox{Vector::Constant(4, -2.0), Vector::Constant(4, 2.0)}, {true, true, true},
           false, {}});
    r.add({"cp1-fubini-study",
           "CP^1 with the Fubini-Study metric 4/(1+x^2+y^2)^2 (dx^2+dy^2), curvature 1",
           "all of R^2 (stereographic chart)", fubini_study_chart, box2(-1.5, 1.5),
           {true, true, false}, false, {}});
    r.add({"control-nonsymmetric",
           "R^2 with g = exp((x^2+y^2)/2)(dx^2+dy^2): Kahler, curvature not parallel",
           "all of R^2", nonsymmetric_conformal_chart, box2(-1.0, 1.0), {true, false, false},
           false, {}});
    r.add({"control-perturbed-r2",
           "R^2 with g = (x^2 + y^2/2) dx^2 + y^2 dy^2 and the example's J: not Kahler",
           "x > 0, y > 0", perturbed_r2_chart, box2(0.5, 5.0), {false, false, false}, false, {}});
    return r;
  }();
  return registry;
}

std::vector<std::string> ManifoldRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

const ManifoldRegistryEntry& ManifoldRegistry::find(const std::string& id) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ManifoldRegistryEntry& e) { return e.id == id; });
  if (it == entries_.end()) throw Error(ErrorCode::UnknownManifold, "no manifold '" + id + "'");
  return *it;
}

BergerSasakiConfig ManifoldRegistry::config(const std::string& id, double delta) const {
  return BergerSasakiConfig(find(id).make_chart(), delta);
}

Vector ClosedFormExample::gamma(double t) const {
  return Vector{{std::sqrt(2.0 * a * alpha * t + a * a), std::sqrt(2.0 * b * beta * t + b * b)}};
}

Vector ClosedFormExample::gamma_dot(double t) const {
  const Vector x = gamma(t);
  return Vector{{a * alpha / x[0], b * beta / x[1]}};
}

Vector ClosedFormExample::parallel_covector(double t) const {
  const Vector x = gamma(t);
  return Vector{{k1 * x[0], k2 * x[1]}};
}

Vector ClosedFormExample::velocity_covector(double t) const {
  const Vector x = gamma(t);
  return Vector{{a * alpha * x[0], b * beta * x[1]}};
}

namespace {

SampledLift sample_lift(const ClosedFormExample& ex, const std::vector<double>& times,
                        Vector (ClosedFormExample::*fiber)(double) const) {
  SampledLift c;
  c.base.t = times;
  for (double t : times) {
    c.base.x.push_back(ex.gamma(t));
    c.base.u.push_back(ex.gamma_dot(t));
    c.p.push_back((ex.*fiber)(t));
  }
  return c;
}

}  // namespace

SampledLift ClosedFormExample::horizontal_lift_curve(const std::vector<double>& times) const {
  return sample_lift(*this, times, &ClosedFormExample::parallel_covector);
}

SampledLift ClosedFormExample::velocity_lift_curve(const std::vector<double>& times) const {
  return sample_lift(*this, times, &ClosedFormExample::velocity_covector);
}

GeodesicState ClosedFormExample::horizontal_lift_initial_state() const {
  return {gamma(0.0), parallel_covector(0.0), gamma_dot(0.0), Vector::Zero(2)};
}

}  // namespace bsg
