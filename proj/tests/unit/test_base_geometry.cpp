#include "bsg/base_geometry.hpp"
#include "bsg/registry.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace bsg;
using bsg::testing::point;

namespace {

ManifoldChart euclidean(int n) {
  return ManifoldChart(
      n, [n](const Vector&) -> Matrix { return Matrix::Identity(n, n); },
      [n](const Vector&) -> Matrix {
        Matrix J = Matrix::Zero(n, n);
        for (int b = 0; b < n; b += 2) {
          J(b + 1, b) = 1.0;
          J(b, b + 1) = -1.0;
        }
        return J;
      },
      nullptr);
}

CurveSamples sample_curve(const std::vector<double>& t, auto pos, auto vel) {
  CurveSamples c;
  c.t = t;
  for (double s : t) {
    c.x.push_back(pos(s));
    c.u.push_back(vel(s));
  }
  return c;
}

}  // namespace

TEST(Christoffel, ClosedFormExampleAtTwoThree) {
  const ManifoldChart chart = paper_r2_chart();
  const Vector x = point(2.0, 3.0);
  for (const ManifoldChart& c : {chart, chart.without_analytic_jacobian()}) {
    const Christoffel G = christoffel_at(c, x);
    EXPECT_NEAR(G(0, 0, 0), 0.5, 1e-9);
    EXPECT_NEAR(G(1, 1, 1), 1.0 / 3.0, 1e-9);
    Christoffel rest = G;
    rest(0, 0, 0) = 0.0;
    rest(1, 1, 1) = 0.0;
    EXPECT_LT(rest.max_abs(), 1e-10);
  }
}

TEST(Christoffel, EuclideanVanishes) {
  const ManifoldChart chart = euclidean(4);
  std::mt19937_64 rng(3);
  EXPECT_EQ(christoffel_at(chart, random_vector(rng, 4)).max_abs(), 0.0);
}

TEST(Christoffel, FubiniStudyMatchesConformalFormula) {
  const Vector x = point(0.3, -0.1);
  const Christoffel expected = bsg::testing::conformal_christoffel(bsg::testing::fubini_study_dphi(x));
  const ManifoldChart chart = fubini_study_chart();
  EXPECT_LT((christoffel_at(chart, x) - expected).max_abs(), 1e-12);
  EXPECT_LT((christoffel_at(chart.without_analytic_jacobian(), x) - expected).max_abs(), 1e-6);
}

TEST(Christoffel, AgreesWithLoopReference) {
  const ManifoldChart chart = perturbed_r2_chart();
  std::mt19937_64 rng(11);
  for (int n = 0; n < 20; ++n) {
    const Vector x = bsg::testing::uniform_in(rng, 0.5, 5.0, 2);
    const Christoffel ref =
        bsg::testing::reference_christoffel([&](const Vector& y) { return chart.metric_at(y); }, x);
    EXPECT_LT((christoffel_at(chart, x) - ref).max_abs(), 1e-6);
  }
}

TEST(Christoffel, SymmetricInLowerIndices) {
  const ManifoldChart chart = nonsymmetric_conformal_chart();
  const Christoffel G = christoffel_at(chart, point(0.4, -0.7));
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(G(k, i, j), G(k, j, i));
}

TEST(Christoffel, RichardsonImprovesFiniteDifferences) {
  const ManifoldChart plain = fubini_study_chart().without_analytic_jacobian();
  ChartOptions opts;
  opts.richardson = true;
  opts.min_step = 1e-3;
  opts.relative_step = 1e-3;
  const ManifoldChart rich = plain.with_options(opts);
  ChartOptions coarse_opts = opts;
  coarse_opts.richardson = false;
  const ManifoldChart coarse = plain.with_options(coarse_opts);
  const Vector x = point(0.6, 0.2);
  const Christoffel exact = christoffel_at(fubini_study_chart(), x);
  EXPECT_LT((christoffel_at(rich, x) - exact).max_abs(),
            0.1 * (christoffel_at(coarse, x) - exact).max_abs());
}

TEST(MetricCompatibility, HundredRandomPoints) {
  std::mt19937_64 rng(5);
  const SampleBox box{point(-1.5, -1.5), point(1.5, 1.5)};
  for (const ManifoldChart& chart :
       {fubini_study_chart(), fubini_study_chart().without_analytic_jacobian()}) {
    const double tol = chart.has_analytic_jacobian() ? 1e-10 : 1e-6;
    for (int n = 0; n < 100; ++n) {
      const Vector x = box.draw(rng);
      const Matrix g = chart.metric_at(x);
      const MetricJacobian dg = chart.metric_jacobian_at(x);
      const Christoffel G = christoffel_at(chart, x);
      double worst = 0.0;
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            double r = dg(k, i, j);
            for (int l = 0; l < 2; ++l) r -= G(l, k, i) * g(l, j) + G(l, k, j) * g(i, l);
            worst = std::max(worst, std::abs(r));
          }
      EXPECT_LT(worst, tol);
    }
  }
}

TEST(Riemann, ClosedFormExampleIsFlat) {
  const ManifoldChart chart = paper_r2_chart();
  std::mt19937_64 rng(2);
  for (int n = 0; n < 10; ++n) {
    const Vector x = bsg::testing::uniform_in(rng, 0.5, 5.0, 2);
    EXPECT_LT(riemann_at(chart, x).max_abs(), 1e-8);
    EXPECT_LT(riemann_at(chart.without_analytic_jacobian(), x).max_abs(), 1e-4);
  }
}

TEST(Riemann, EuclideanVanishes) {
  EXPECT_EQ(riemann_at(euclidean(2), point(0.1, 0.2)).max_abs(), 0.0);
}

TEST(Riemann, FubiniStudyHasUnitSectionalCurvature) {
  const ManifoldChart chart = fubini_study_chart();
  std::mt19937_64 rng(20);
  const SampleBox box{point(-1.5, -1.5), point(1.5, 1.5)};
  for (int n = 0; n < 20; ++n) {
    const Vector x = box.draw(rng);
    const Riemann R = riemann_at(chart, x);
    const Matrix g = chart.metric_at(x);
    // g(R(∂₁,∂₂)∂₂, ∂₁)
    double r1221 = 0.0;
    for (int a = 0; a < 2; ++a) r1221 += g(0, a) * R(a, 0, 1, 1);
    EXPECT_NEAR(r1221 / g.determinant(), 1.0, 1e-6);
  }
}

TEST(Riemann, AntisymmetryAndFirstBianchi) {
  const ManifoldChart chart = nonsymmetric_conformal_chart();
  const Riemann R = riemann_at(chart, point(0.5, -0.3));
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          EXPECT_NEAR(R(a, i, j, k), -R(a, j, i, k), 1e-12);
          EXPECT_NEAR(R(a, i, j, k) + R(a, j, k, i) + R(a, k, i, j), 0.0, 1e-8);
        }
}

TEST(Riemann, TransposeRuleOnFubiniStudy) {
  // g(sharp(ωR(X,Y)), Z) = g(R(Y,X) sharp(ω), Z)
  const ManifoldChart chart = fubini_study_chart();
  std::mt19937_64 rng(16);
  for (int n = 0; n < 20; ++n) {
    const Vector x = bsg::testing::uniform_in(rng, -1.0, 1.0, 2);
    const GeometryCache geo = geometry_at(chart, x, true);
    const Vector w = random_vector(rng, 2), X = random_vector(rng, 2), Y = random_vector(rng, 2),
                 Z = random_vector(rng, 2);
    const double lhs = sharp(geo, covector_curvature(*geo.riemann, w, X, Y)).dot(geo.g * Z);
    const double rhs = (curvature_operator(*geo.riemann, Y, X) * sharp(geo, w)).dot(geo.g * Z);
    EXPECT_NEAR(lhs, rhs, 1e-5);
  }
}

TEST(Musical, SharpExamples) {
  EXPECT_LT((sharp(euclidean(2), point(0, 0), point(1, 0)) - point(1, 0)).norm(), 1e-15);
  const Vector v = sharp(paper_r2_chart(), point(2, 3), point(4, 9));
  EXPECT_NEAR(v[0], 1.0, 1e-14);
  EXPECT_NEAR(v[1], 1.0, 1e-14);
}

TEST(Musical, FlatExamples) {
  EXPECT_LT((flat(euclidean(2), point(0, 0), point(0, 1)) - point(0, 1)).norm(), 1e-15);
  // γ′(0) = (α, β) at (a, b) lowers to (a²α, b²β).
  const double a = 2.0, b = 3.0, alpha = 1.0, beta = 2.0;
  const Vector w = flat(paper_r2_chart(), point(a, b), point(alpha, beta));
  EXPECT_NEAR(w[0], a * a * alpha, 1e-14);
  EXPECT_NEAR(w[1], b * b * beta, 1e-14);
}

TEST(Musical, RoundTrips) {
  const ManifoldChart chart = fubini_study_chart();
  std::mt19937_64 rng(9);
  for (int n = 0; n < 100; ++n) {
    const Vector x = bsg::testing::uniform_in(rng, -1.5, 1.5, 2);
    const GeometryCache geo = geometry_at(chart, x);
    const Vector w = random_vector(rng, 2, 3.0);
    const Vector X = random_vector(rng, 2, 3.0);
    const Vector via_matrix = geo.g * (geo.g.inverse() * w);
    EXPECT_LT((flat(geo, sharp(geo, w)) - via_matrix).norm(), 1e-12 * (1 + w.norm()));
    EXPECT_LT((sharp(geo, flat(geo, X)) - X).norm(), 1e-12 * (1 + X.norm()));
  }
}

TEST(Musical, InnerInverse) {
  EXPECT_DOUBLE_EQ(inner_inv(euclidean(2), point(0, 0), point(1, 0), point(1, 0)), 1.0);
  EXPECT_NEAR(inner_inv(paper_r2_chart(), point(2, 3), point(2, 0), point(2, 0)), 1.0, 1e-15);
  const ManifoldChart chart = nonsymmetric_conformal_chart();
  std::mt19937_64 rng(4);
  for (int n = 0; n < 50; ++n) {
    const GeometryCache geo = geometry_at(chart, random_vector(rng, 2));
    const Vector w = random_vector(rng, 2), t = random_vector(rng, 2);
    EXPECT_NEAR(inner_inv(geo, w, t), sharp(geo, w).dot(geo.g * sharp(geo, t)), 1e-12);
  }
}

TEST(Chart, RejectsPointsOutsideDomain) {
  const ManifoldChart chart = paper_r2_chart();
  try {
    chart.metric_at(point(0.0, 1.0));
    FAIL() << "expected OutOfChart";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfChart);
  }
  EXPECT_THROW(christoffel_at(chart, point(-1.0, 2.0)), Error);
  EXPECT_FALSE(chart.contains(Vector::Zero(3)));
}

TEST(Chart, InverseMetricRejectsIndefinite) {
  Matrix g(2, 2);
  g << 1.0, 0.0, 0.0, -1.0;
  try {
    inverse_metric(g);
    FAIL() << "expected SingularMetric";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMetric);
  }
}

TEST(TimeDerivative, ExactOnPolynomials) {
  std::vector<double> t;
  std::vector<double> y;
  for (int k = 0; k <= 20; ++k) {
    const double s = 0.1 * k + 0.01 * k * k;  // non-uniform grid
    t.push_back(s);
    y.push_back(s * s * s * s - 2.0 * s);
  }
  const auto d = time_derivative<double>(t, y, 5);
  for (std::size_t k = 0; k < t.size(); ++k)
    EXPECT_NEAR(d[k], 4.0 * t[k] * t[k] * t[k] - 2.0, 1e-9);
}

TEST(TimeDerivative, TooFewSamples) {
  std::vector<double> t{0.0, 1.0, 2.0};
  std::vector<double> y{0.0, 1.0, 2.0};
  try {
    time_derivative<double>(t, y, 5);
    FAIL() << "expected GridTooCoarse";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
}

TEST(TimeDerivative, WeightsAnnihilateConstants) {
  const std::vector<double> nodes{0.0, 0.3, 0.5, 1.1, 1.2};
  double sum = 0.0;
  for (double w : derivative_weights(nodes, 0.4)) sum += w;
  EXPECT_NEAR(sum, 0.0, 1e-12);
}

TEST(CovariantDerivative, ConstantCovectorOnLine) {
  const ManifoldChart chart = euclidean(2);
  const auto t = sample_times(0.0, 1.0, 21);
  const CurveSamples c = sample_curve(
      t, [](double s) { return point(1 + s, 2 - 3 * s); }, [](double) { return point(1, -3); });
  const std::vector<Vector> w(t.size(), point(0.7, -0.2));
  for (const Vector& d : covariant_derivative_along(chart, c, w, FieldKind::Covector))
    EXPECT_LT(d.norm(), 1e-12);
}

TEST(CovariantDerivative, R2HorizontalLiftCovectorIsParallel) {
  // The residual is pure discretization error and shrinks with the grid.
  const ClosedFormExample ex;
  const ManifoldChart chart = paper_r2_chart();
  std::vector<double> worst;
  for (int n : {101, 201, 401}) {
    const auto t = sample_times(0.0, 4.0, n);
    const CurveSamples c = sample_curve(
        t, [&](double s) { return ex.gamma(s); }, [&](double s) { return ex.gamma_dot(s); });
    std::vector<Vector> w;
    for (double s : t) w.push_back(ex.parallel_covector(s));
    double m = 0.0;
    for (const Vector& d : covariant_derivative_along(chart, c, w, FieldKind::Covector))
      m = std::max(m, d.cwiseAbs().maxCoeff());
    worst.push_back(m);
  }
  EXPECT_GT(worst[0] / worst[1], 4.0);
  EXPECT_GT(worst[1] / worst[2], 4.0);
  EXPECT_LT(worst[2], 1e-5);
}

TEST(CovariantDerivative, InverseMetricProductRule) {
  // d/dt g⁻¹(ω,θ) = g⁻¹(∇ω,θ) + g⁻¹(ω,∇θ)
  const ManifoldChart chart = fubini_study_chart();
  const auto t = sample_times(0.0, 2.0, 401);
  const CurveSamples c = sample_curve(
      t, [](double s) { return point(0.5 * std::cos(s), 0.3 * std::sin(2 * s)); },
      [](double s) { return point(-0.5 * std::sin(s), 0.6 * std::cos(2 * s)); });
  std::vector<Vector> w, th;
  std::vector<double> pairing;
  for (std::size_t k = 0; k < t.size(); ++k) {
    w.push_back(point(std::sin(t[k]), 1.0 + t[k] * t[k]));
    th.push_back(point(std::exp(-t[k]), std::cos(3 * t[k])));
    pairing.push_back(inner_inv(chart, c.x[k], w.back(), th.back()));
  }
  const auto dw = covariant_derivative_along(chart, c, w, FieldKind::Covector);
  const auto dth = covariant_derivative_along(chart, c, th, FieldKind::Covector);
  const auto lhs = time_derivative<double>(t, pairing, 5);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double rhs = inner_inv(chart, c.x[k], dw[k], th[k]) + inner_inv(chart, c.x[k], w[k], dth[k]);
    EXPECT_NEAR(lhs[k], rhs, 1e-6);
  }
}

TEST(CovariantDerivative, MetricIsParallelAlongCurves) {
  // Lowering commutes with ∇: ∇(flat X) = flat(∇X).
  const ManifoldChart chart = nonsymmetric_conformal_chart();
  const auto t = sample_times(0.0, 1.0, 401);
  const CurveSamples c = sample_curve(
      t, [](double s) { return point(s, s * s - 0.5); }, [](double s) { return point(1.0, 2 * s); });
  std::vector<Vector> X, Xflat;
  for (std::size_t k = 0; k < t.size(); ++k) {
    X.push_back(point(std::cos(t[k]), t[k]));
    Xflat.push_back(flat(chart, c.x[k], X.back()));
  }
  const auto dX = covariant_derivative_along(chart, c, X, FieldKind::Vector);
  const auto dXflat = covariant_derivative_along(chart, c, Xflat, FieldKind::Covector);
  for (std::size_t k = 0; k < t.size(); ++k)
    EXPECT_LT((dXflat[k] - flat(chart, c.x[k], dX[k])).norm(), 1e-6);
}

TEST(CovariantDerivative, ComplexStructureIsParallel) {
  const ManifoldChart chart = fubini_study_chart();
  const auto t = sample_times(0.0, 1.0, 101);
  const CurveSamples c = sample_curve(
      t, [](double s) { return point(s - 0.5, 0.2 * s); }, [](double) { return point(1.0, 0.2); });
  std::vector<Matrix> J;
  for (const Vector& x : c.x) J.push_back(chart.complex_structure_at(x));
  for (const Matrix& d : covariant_derivative_along(chart, c, J)) EXPECT_LT(d.norm(), 1e-12);
}
