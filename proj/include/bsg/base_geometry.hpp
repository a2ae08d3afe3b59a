#pragma once

// Chart-based Riemannian geometry: metric, inverse metric, Christoffel
// symbols, curvature, musical isomorphisms and covariant derivatives along
// sampled curves.

#include "bsg/errors.hpp"
#include "bsg/types.hpp"

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace bsg {

struct ChartOptions {
  /// FD step per coordinate is max(min_step, relative_step * |x_k|).
  double relative_step = 1e-5;
  double min_step = 1e-5;
  /// Combine steps h and h/2 to cancel the O(h^2) term.
  bool richardson = false;
};

/// One coordinate chart of a 2m-dimensional Riemannian manifold carrying an
/// almost complex structure. Immutable; safe to share between threads.
class ManifoldChart {
 public:
  using MetricField = std::function<Matrix(const Vector&)>;
  using MetricJacobianField = std::function<MetricJacobian(const Vector&)>;
  using StructureField = std::function<Matrix(const Vector&)>;
  using DomainPredicate = std::function<bool(const Vector&)>;

  ManifoldChart(int dim, MetricField metric, StructureField complex_structure,
                DomainPredicate domain, MetricJacobianField metric_jacobian = nullptr,
                ChartOptions options = {});

  int dim() const { return dim_; }
  const ChartOptions& options() const { return options_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(metric_jacobian_); }

  bool contains(const Vector& x) const;
  /// Throws OutOfChart if `x` has the wrong size or fails the domain predicate.
  void require_contains(const Vector& x) const;

  Matrix metric_at(const Vector& x) const;
  Matrix complex_structure_at(const Vector& x) const;
  /// Analytic when available, central differences otherwise.
  MetricJacobian metric_jacobian_at(const Vector& x) const;
  MetricJacobian finite_difference_jacobian_at(const Vector& x) const;

  double step_for(double coordinate) const;

  ManifoldChart with_options(ChartOptions options) const;
  ManifoldChart without_analytic_jacobian() const;

 private:
  int dim_;
  MetricField metric_;
  StructureField structure_;
  DomainPredicate domain_;
  MetricJacobianField metric_jacobian_;
  ChartOptions options_;
};

/// Central difference of a chart-valued function along coordinate `k`,
/// honouring the chart's step policy (and Richardson option).
template <typename F>
auto coordinate_derivative(const ManifoldChart& chart, const Vector& x, int k, F&& f) {
  const double h = chart.step_for(x[k]);
  auto central = [&](double step) {
    Vector xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    chart.require_contains(xp);
    chart.require_contains(xm);
    return ((f(xp) - f(xm)) / (2.0 * step)).eval();
  };
  if (!chart.options().richardson) return central(h);
  auto coarse = central(h);
  auto fine = central(0.5 * h);
  return ((4.0 * fine - coarse) / 3.0).eval();
}

/// Pointwise geometry at x. Immutable once built.
struct GeometryCache {
  Vector x;
  Matrix g;
  Matrix g_inv;
  Christoffel gamma;
  std::optional<Riemann> riemann;

  int dim() const { return static_cast<int>(x.size()); }
};

GeometryCache geometry_at(const ManifoldChart& chart, const Vector& x, bool with_curvature = false);

/// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij).
Christoffel christoffel_at(const ManifoldChart& chart, const Vector& x);
Christoffel christoffel_from(const Matrix& g_inv, const MetricJacobian& dg);
Riemann riemann_at(const ManifoldChart& chart, const Vector& x);
/// ∇_m R^a_ijk by central differences of `riemann_at`; used for the
/// local-symmetry flag.
IndexArray<double, 5> riemann_covariant_derivative_at(const ManifoldChart& chart, const Vector& x,
                                                      double step = 1e-3);

/// Inverse of g via Cholesky; throws SingularMetric when g is not SPD.
Matrix inverse_metric(const Matrix& g);

// Contractions with Christoffel and curvature arrays.

/// (Γ^k_ij a^i b^j)_k
Vector christoffel_contract(const Christoffel& gamma, const Vector& a, const Vector& b);
/// (Γ^i_jh ω_i X^j)_h, so that (∇_X ω)_h = X(ω_h) − this.
Vector covector_connection_term(const Christoffel& gamma, const Vector& omega, const Vector& X);
/// Matrix of Z ↦ Γ^k_ij X^i Z^j.
Matrix connection_matrix(const Christoffel& gamma, const Vector& X);
/// Matrix of Z ↦ R(X,Y)Z.
Matrix curvature_operator(const Riemann& riemann, const Vector& X, const Vector& Y);
/// The covector pR(X,Y) = p_a R^a_ijk X^i Y^j dx^k.
Vector covector_curvature(const Riemann& riemann, const Vector& p, const Vector& X,
                          const Vector& Y);

Vector sharp(const GeometryCache& geo, const Vector& omega);
Vector flat(const GeometryCache& geo, const Vector& X);
double inner_inv(const GeometryCache& geo, const Vector& omega, const Vector& theta);

Vector sharp(const ManifoldChart& chart, const Vector& x, const Vector& omega);
Vector flat(const ManifoldChart& chart, const Vector& x, const Vector& X);
double inner_inv(const ManifoldChart& chart, const Vector& x, const Vector& omega,
                 const Vector& theta);

// Along-curve calculus.

struct CurveSamples {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> u;  ///< velocity dx/dt

  std::size_t size() const { return t.size(); }
};

enum class FieldKind { Vector, Covector };

/// Finite-difference weights for the first derivative at `at`, from nodes
/// `nodes` (Fornberg's recursion).
std::vector<double> derivative_weights(std::span<const double> nodes, double at);

/// d/dt of sampled data on a monotone grid using `stencil` consecutive
/// samples per point (order stencil − 1; centred away from the ends).
/// Needs at least `stencil` samples.
template <typename Sample>
std::vector<Sample> time_derivative(std::span<const double> t, std::span<const Sample> samples,
                                    int stencil = 5) {
  const std::size_t n = t.size();
  if (stencil < 2) throw std::invalid_argument("stencil needs at least two points");
  const auto w_len = static_cast<std::size_t>(stencil);
  if (n < w_len || samples.size() != n) {
    throw Error(ErrorCode::GridTooCoarse,
                "time derivative needs at least " + std::to_string(stencil) + " matching samples");
  }
  std::vector<Sample> out;
  out.reserve(n);
  const std::size_t half = w_len / 2;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t lo = k < half ? 0 : k - half;
    if (lo + w_len > n) lo = n - w_len;
    auto w = derivative_weights(t.subspan(lo, w_len), t[k]);
    Sample acc = w[0] * samples[lo];
    for (std::size_t s = 1; s < w_len; ++s) acc = acc + w[s] * samples[lo + s];
    out.push_back(acc);
  }
  return out;
}

/// Covariant derivative ∇_u w along a sampled curve.
/// Vector: dX^h/dt + Γ^h_ij u^i X^j. Covector: dϑ_h/dt − Γ^i_jh ϑ_i u^j.
std::vector<Vector> covariant_derivative_along(const ManifoldChart& chart,
                                               const CurveSamples& curve,
                                               std::span<const Vector> field, FieldKind kind,
                                               int stencil = 5);
/// (1,1)-tensor rule: dA/dt + [Γ(u), A].
std::vector<Matrix> covariant_derivative_along(const ManifoldChart& chart,
                                               const CurveSamples& curve,
                                               std::span<const Matrix> field, int stencil = 5);

/// Axis-aligned box used to draw random chart points.
struct SampleBox {
  Vector lo;
  Vector hi;

  Vector draw(std::mt19937_64& rng) const;
};

Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0);

}  // namespace bsg
