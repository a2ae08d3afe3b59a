#include "bsg/base_geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace bsg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::MissingDerivative: return "MissingDerivative";
    case ErrorCode::NotOnUnitBundle: return "NotOnUnitBundle";
    case ErrorCode::NonTangentialArgument: return "NonTangentialArgument";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::DegenerateSpeed: return "DegenerateSpeed";
    case ErrorCode::UnknownManifold: return "UnknownManifold";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

ManifoldChart::ManifoldChart(int dim, MetricField metric, StructureField complex_structure,
                             DomainPredicate domain, MetricJacobianField metric_jacobian,
                             ChartOptions options)
    : dim_(dim),
      metric_(std::move(metric)),
      structure_(std::move(complex_structure)),
      domain_(std::move(domain)),
      metric_jacobian_(std::move(metric_jacobian)),
      options_(options) {
  if (dim_ <= 0 || dim_ % 2 != 0) {
    throw std::invalid_argument("chart dimension must be even and positive");
  }
  if (!metric_ || !structure_) throw std::invalid_argument("chart needs metric and structure");
  if (!domain_) domain_ = [](const Vector&) { return true; };
}

bool ManifoldChart::contains(const Vector& x) const {
  return x.size() == dim_ && x.allFinite() && domain_(x);
}

void ManifoldChart::require_contains(const Vector& x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") is outside the chart domain";
    throw Error(ErrorCode::OutOfChart, os.str());
  }
}

Matrix ManifoldChart::metric_at(const Vector& x) const {
  require_contains(x);
  return metric_(x);
}

Matrix ManifoldChart::complex_structure_at(const Vector& x) const {
  require_contains(x);
  return structure_(x);
}

double ManifoldChart::step_for(double coordinate) const {
  return std::max(options_.min_step, options_.relative_step * std::abs(coordinate));
}

MetricJacobian ManifoldChart::metric_jacobian_at(const Vector& x) const {
  if (!metric_jacobian_) return finite_difference_jacobian_at(x);
  require_contains(x);
  return metric_jacobian_(x);
}

MetricJacobian ManifoldChart::finite_difference_jacobian_at(const Vector& x) const {
  require_contains(x);
  MetricJacobian dg(dim_);
  for (int k = 0; k < dim_; ++k) {
    Matrix d = coordinate_derivative(*this, x, k, [this](const Vector& y) { return metric_(y); });
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) dg(k, i, j) = d(i, j);
  }
  return dg;
}

ManifoldChart ManifoldChart::with_options(ChartOptions options) const {
  ManifoldChart copy = *this;
  copy.options_ = options;
  return copy;
}

ManifoldChart ManifoldChart::without_analytic_jacobian() const {
  ManifoldChart copy = *this;
  copy.metric_jacobian_ = nullptr;
  return copy;
}

Matrix inverse_metric(const Matrix& g) {
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success || !g.allFinite()) {
    throw Error(ErrorCode::SingularMetric, "metric is not symmetric positive definite");
  }
  Matrix inv = llt.solve(Matrix::Identity(g.rows(), g.cols()));
  return 0.5 * (inv + inv.transpose());
}

Christoffel christoffel_from(const Matrix& g_inv, const MetricJacobian& dg) {
  const int n = dg.extent();
  // First kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
  Christoffel first(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        first(l, i, j) = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
  Christoffel gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += g_inv(k, l) * first(l, i, j);
        gamma(k, i, j) = s;
      }
  return gamma;
}

Christoffel christoffel_at(const ManifoldChart& chart, const Vector& x) {
  const Matrix g_inv = inverse_metric(chart.metric_at(x));
  return christoffel_from(g_inv, chart.metric_jacobian_at(x));
}

namespace {

Riemann riemann_from(const Christoffel& gamma, const IndexArray<double, 4>& dgamma) {
  // dgamma(m, a, j, k) = ∂_m Γ^a_jk
  const int n = gamma.extent();
  Riemann r(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = dgamma(i, a, j, k) - dgamma(j, a, i, k);
          for (int l = 0; l < n; ++l) s += gamma(a, i, l) * gamma(l, j, k) - gamma(a, j, l) * gamma(l, i, k);
          r(a, i, j, k) = s;
        }
  return r;
}

IndexArray<double, 4> christoffel_derivatives(const ManifoldChart& chart, const Vector& x) {
  const int n = chart.dim();
  IndexArray<double, 4> dgamma(n);
  for (int m = 0; m < n; ++m) {
    Vector d = coordinate_derivative(chart, x, m,
                                     [&](const Vector& y) { return christoffel_at(chart, y).flat(); });
    const Eigen::Index block = d.size();
    dgamma.flat().segment(m * block, block) = d;
  }
  return dgamma;
}

}  // namespace

Riemann riemann_at(const ManifoldChart& chart, const Vector& x) {
  return riemann_from(christoffel_at(chart, x), christoffel_derivatives(chart, x));
}

IndexArray<double, 5> riemann_covariant_derivative_at(const ManifoldChart& chart, const Vector& x,
                                                      double step) {
  const int n = chart.dim();
  const Christoffel gamma = christoffel_at(chart, x);
  const Riemann r = riemann_at(chart, x);
  IndexArray<double, 5> out(n);
  for (int m = 0; m < n; ++m) {
    Vector xp = x, xm = x;
    xp[m] += step;
    xm[m] -= step;
    chart.require_contains(xp);
    chart.require_contains(xm);
    const Vector dr = (riemann_at(chart, xp).flat() - riemann_at(chart, xm).flat()) / (2.0 * step);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double s = dr[((a * n + i) * n + j) * n + k];
            for (int l = 0; l < n; ++l) {
              s += gamma(a, m, l) * r(l, i, j, k);
              s -= gamma(l, m, i) * r(a, l, j, k);
              s -= gamma(l, m, j) * r(a, i, l, k);
              s -= gamma(l, m, k) * r(a, i, j, l);
            }
            out(m, a, i, j, k) = s;
          }
  }
  return out;
}

GeometryCache geometry_at(const ManifoldChart& chart, const Vector& x, bool with_curvature) {
  GeometryCache geo;
  geo.x = x;
  geo.g = chart.metric_at(x);
  geo.g_inv = inverse_metric(geo.g);
  geo.gamma = christoffel_from(geo.g_inv, chart.metric_jacobian_at(x));
  if (with_curvature) geo.riemann = riemann_from(geo.gamma, christoffel_derivatives(chart, x));
  return geo;
}

Vector christoffel_contract(const Christoffel& gamma, const Vector& a, const Vector& b) {
  const int n = gamma.extent();
  Vector out = Vector::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[k] += gamma(k, i, j) * a[i] * b[j];
  return out;
}

Vector covector_connection_term(const Christoffel& gamma, const Vector& omega, const Vector& X) {
  const int n = gamma.extent();
  Vector out = Vector::Zero(n);
  for (int h = 0; h < n; ++h)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[h] += gamma(i, j, h) * omega[i] * X[j];
  return out;
}

Matrix connection_matrix(const Christoffel& gamma, const Vector& X) {
  const int n = gamma.extent();
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(k, j) += gamma(k, i, j) * X[i];
  return m;
}

Matrix curvature_operator(const Riemann& riemann, const Vector& X, const Vector& Y) {
  const int n = riemann.extent();
  Matrix m = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double xy = X[i] * Y[j];
        if (xy == 0.0) continue;
        for (int k = 0; k < n; ++k) m(a, k) += riemann(a, i, j, k) * xy;
      }
  return m;
}

Vector covector_curvature(const Riemann& riemann, const Vector& p, const Vector& X,
                          const Vector& Y) {
  return curvature_operator(riemann, X, Y).transpose() * p;
}

Vector sharp(const GeometryCache& geo, const Vector& omega) { return geo.g_inv * omega; }
Vector flat(const GeometryCache& geo, const Vector& X) { return geo.g * X; }
double inner_inv(const GeometryCache& geo, const Vector& omega, const Vector& theta) {
  return omega.dot(geo.g_inv * theta);
}

Vector sharp(const ManifoldChart& chart, const Vector& x, const Vector& omega) {
  return inverse_metric(chart.metric_at(x)) * omega;
}
Vector flat(const ManifoldChart& chart, const Vector& x, const Vector& X) {
  return chart.metric_at(x) * X;
}
double inner_inv(const ManifoldChart& chart, const Vector& x, const Vector& omega,
                 const Vector& theta) {
  return omega.dot(inverse_metric(chart.metric_at(x)) * theta);
}

std::vector<double> derivative_weights(std::span<const double> nodes, double at) {
  // Fornberg (1988), first derivative only.
  const std::size_t n = nodes.size();
  const int order = 1;
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - at;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - at;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

namespace {

void check_curve(const CurveSamples& curve, std::size_t field_size, int stencil) {
  if (curve.t.size() < static_cast<std::size_t>(stencil)) {
    throw Error(ErrorCode::GridTooCoarse,
                "need at least " + std::to_string(stencil) + " curve samples");
  }
  if (curve.x.size() != curve.t.size() || curve.u.size() != curve.t.size() ||
      field_size != curve.t.size()) {
    throw std::invalid_argument("curve and field sample counts differ");
  }
  for (std::size_t k = 1; k < curve.t.size(); ++k) {
    if (!(curve.t[k] > curve.t[k - 1])) throw std::invalid_argument("time grid must be increasing");
  }
}

}  // namespace

std::vector<Vector> covariant_derivative_along(const ManifoldChart& chart,
                                               const CurveSamples& curve,
                                               std::span<const Vector> field, FieldKind kind,
                                               int stencil) {
  check_curve(curve, field.size(), stencil);
  std::vector<Vector> d = time_derivative<Vector>(curve.t, field, stencil);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const Christoffel gamma = christoffel_at(chart, curve.x[k]);
    if (kind == FieldKind::Vector) {
      d[k] += christoffel_contract(gamma, curve.u[k], field[k]);
    } else {
      d[k] -= covector_connection_term(gamma, field[k], curve.u[k]);
    }
  }
  return d;
}

std::vector<Matrix> covariant_derivative_along(const ManifoldChart& chart,
                                               const CurveSamples& curve,
                                               std::span<const Matrix> field, int stencil) {
  check_curve(curve, field.size(), stencil);
  std::vector<Matrix> d = time_derivative<Matrix>(curve.t, field, stencil);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const Matrix c = connection_matrix(christoffel_at(chart, curve.x[k]), curve.u[k]);
    d[k] += c * field[k] - field[k] * c;
  }
  return d;
}

Vector SampleBox::draw(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
  return x;
}

Vector random_vector(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace bsg
