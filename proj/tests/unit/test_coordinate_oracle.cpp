#include "bsg/coordinate_oracle.hpp"
#include "bsg/geodesic.hpp"
#include "bsg/registry.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bsg;
using bsg::testing::point;

namespace {

Vector stack(const Vector& a, const Vector& b) {
  Vector s(a.size() + b.size());
  s << a, b;
  return s;
}

}  // namespace

TEST(InducedMetric, FlatUndeformedIsBlockDiagonal) {
  const BergerSasakiConfig cfg(flat_chart(2), 0.0);
  std::mt19937_64 rng(1);
  const Matrix G = induced_metric_at(cfg, random_vector(rng, 4), random_vector(rng, 4));
  EXPECT_LT((G - Matrix::Identity(8, 8)).norm(), 1e-15);
}

TEST(InducedMetric, MatchesFrameMetric) {
  std::mt19937_64 rng(2);
  for (double delta : {0.0, 0.5, 1.0}) {
    const BergerSasakiConfig cfg(paper_r2_chart(), delta);
    for (int n = 0; n < 50; ++n) {
      const CotangentPoint cp{bsg::testing::uniform_in(rng, 0.5, 5, 2), random_vector(rng, 2)};
      const LiftFrame frame(cfg, cp, false);
      const Matrix G = induced_metric_at(cfg, cp.x, cp.p);
      const LiftedVector U{random_vector(rng, 2), random_vector(rng, 2)};
      const LiftedVector V{random_vector(rng, 2), random_vector(rng, 2)};
      const double coord = frame.to_coordinates(U).dot(G * frame.to_coordinates(V));
      EXPECT_NEAR(coord, bs_metric(cfg, cp, U, V), 1e-10 * (1 + std::abs(coord)));
    }
  }
}

TEST(InducedMetric, DeltaSweepOfVerticalBlock) {
  const CotangentPoint cp{point(1.3, 0.4), point(0.7, -1.2)};
  const BergerSasakiConfig base(fubini_study_chart(), 0.0);
  const Matrix G0 = induced_metric_at(base, cp.x, cp.p);
  const Matrix ginv = base.chart().metric_at(cp.x).inverse();
  const Vector q = ginv * (base.chart().complex_structure_at(cp.x).transpose() * cp.p);
  for (double delta : {0.0, 0.5, 1.0}) {
    const BergerSasakiConfig cfg(fubini_study_chart(), delta);
    // Back to the adapted frame {ᴴ∂_i, ⱽdx^i}: coordinates = T · frame with
    // T = [[I, 0], [N, I]].
    Matrix T = Matrix::Identity(4, 4);
    T.bottomLeftCorner(2, 2) = LiftFrame(cfg, cp, false).horizontal_shift();
    const Matrix dG = T.transpose() * (induced_metric_at(cfg, cp.x, cp.p) - G0) * T;
    EXPECT_LT((dG.bottomRightCorner(2, 2) - delta * delta * q * q.transpose()).norm(), 1e-12);
    EXPECT_LT(dG.topRows(2).norm() + dG.bottomLeftCorner(2, 2).norm(), 1e-12);
  }
}

TEST(InducedChristoffel, SymmetricAndFlat) {
  const BergerSasakiConfig flat_cfg(flat_chart(1), 0.0);
  EXPECT_LT(induced_christoffel_at(flat_cfg, point(0.1, 0.2), point(1, 2)).max_abs(), 1e-12);

  const BergerSasakiConfig cfg(fubini_study_chart(), 0.8);
  const Christoffel G = induced_christoffel_at(cfg, point(0.3, -0.5), point(0.9, 0.4));
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) EXPECT_EQ(G(c, a, b), G(c, b, a));
}

TEST(OracleConnection, LiouvilleSelfInCoordinates) {
  for (double delta : {0.0, 0.5, 1.0}) {
    const BergerSasakiConfig cfg(paper_r2_chart(), delta);
    const CotangentPoint cp{point(1.5, 2.5), point(0.8, -0.3)};
    // ⱽp has coordinates (0, p).
    const Vector U = stack(Vector::Zero(2), cp.p);
    const Vector r = oracle_connection(cfg, cp, U, LiftedFieldGerm::liouville(cp.p));
    EXPECT_LT(relative_deviation(r, U), 1e-6);
  }
}

TEST(OracleConnection, HorizontalCaseOnClosedFormExample) {
  std::mt19937_64 rng(8);
  for (double delta : {0.0, 1.0}) {
    const BergerSasakiConfig cfg(paper_r2_chart(), delta);
    for (int n = 0; n < 20; ++n) {
      const CotangentPoint cp{bsg::testing::uniform_in(rng, 0.5, 5, 2), random_vector(rng, 2)};
      const LiftFrame frame(cfg, cp);
      const Vector X = random_vector(rng, 2);
      const BaseFieldGerm Y{random_vector(rng, 2), Matrix(Matrix::Random(2, 2))};
      const LiftedFieldGerm V = LiftedFieldGerm::horizontal_lift(Y);
      const LiftedVector U = LiftedVector::horizontal_lift(X);
      const Vector closed = frame.to_coordinates(bs_connection(frame, U, V));
      const Vector oracle = oracle_connection(cfg, cp, frame.to_coordinates(U), V);
      EXPECT_LT(relative_deviation(closed, oracle), 1e-5);
    }
  }
}

TEST(OracleConnection, ZeroVelocityHasZeroAcceleration) {
  const BergerSasakiConfig cfg(fubini_study_chart(), 0.5);
  const Vector z = stack(point(0.2, 0.1), point(1, 1));
  EXPECT_EQ(oracle_geodesic_rhs(cfg, z, Vector::Zero(4)).norm(), 0.0);
}

TEST(OracleSuite, FubiniStudyDeltaHalf) {
  const BergerSasakiConfig cfg(fubini_study_chart(), 0.5);
  const SampleBox box{point(-1.5, -1.5), point(1.5, 1.5)};
  const OracleReport r = run_oracle_suite(cfg, box, 30, 42);
  EXPECT_EQ(r.configurations, 30);
  EXPECT_EQ(r.seed, 42u);
  ASSERT_FALSE(r.cases.empty());
  for (const CaseDeviation& c : r.cases) {
    EXPECT_EQ(c.count, 30) << c.name;
    EXPECT_LT(c.max, 1e-5) << c.name;
  }
}

TEST(OracleSuite, DetectsAWrongConnection) {
  // A metric whose J is not parallel breaks the closed forms; the oracle must see it.
  const BergerSasakiConfig cfg(perturbed_r2_chart(), 1.0);
  const SampleBox box{point(0.5, 0.5), point(5, 5)};
  EXPECT_GT(run_oracle_suite(cfg, box, 10, 3).max_deviation(), 1e-3);
}

TEST(OracleSuite, SeedIsReproducible) {
  const BergerSasakiConfig cfg(paper_r2_chart(), 1.0);
  const SampleBox box{point(0.5, 0.5), point(5, 5)};
  const OracleReport a = run_oracle_suite(cfg, box, 5, 99);
  const OracleReport b = run_oracle_suite(cfg, box, 5, 99);
  ASSERT_EQ(a.cases.size(), b.cases.size());
  for (std::size_t i = 0; i < a.cases.size(); ++i) EXPECT_EQ(a.cases[i].max, b.cases[i].max);
}

TEST(RelativeDeviation, FloorOfOne) {
  EXPECT_DOUBLE_EQ(relative_deviation(point(1e-3, 0), point(0, 0)), 1e-3);
  EXPECT_DOUBLE_EQ(relative_deviation(point(110, 0), point(100, 0)), 0.1);
}

TEST(Sasaki, MatchesUndeformedMetricAndConnection) {
  const BergerSasakiConfig cfg(fubini_study_chart(), 0.0);
  std::mt19937_64 rng(10);
  for (int n = 0; n < 20; ++n) {
    const CotangentPoint cp{bsg::testing::uniform_in(rng, -1.5, 1.5, 2), random_vector(rng, 2)};
    const LiftedVector U{random_vector(rng, 2), random_vector(rng, 2)};
    const LiftedVector W{random_vector(rng, 2), random_vector(rng, 2)};
    EXPECT_NEAR(sasaki_metric(cfg.chart(), cp, U, W), bs_metric(cfg, cp, U, W), 1e-12);
    const LiftedFieldGerm V = LiftedFieldGerm::horizontal_lift({random_vector(rng, 2), Matrix(Matrix::Random(2, 2))}) +
                              LiftedFieldGerm::vertical_lift({random_vector(rng, 2), Matrix(Matrix::Random(2, 2))});
    const LiftedVector a = sasaki_connection(cfg.chart(), cp, U, V);
    const LiftedVector b = bs_connection(cfg, cp, U, V);
    EXPECT_LT((a.stacked() - b.stacked()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Sasaki, DiffersWhenDeformed) {
  const BergerSasakiConfig cfg(fubini_study_chart(), 1.0);
  const CotangentPoint cp{point(0.1, 0.2), point(1.0, 0.5)};
  const LiftedVector w = LiftedVector::vertical_lift(point(-0.3, 0.8));
  EXPECT_GT(std::abs(sasaki_metric(cfg.chart(), cp, w, w) - bs_metric(cfg, cp, w, w)), 1e-3);
}

TEST(DualIntegration, TotalSpaceGeodesicMatchesCoordinateGeodesic) {
  std::mt19937_64 rng(77);
  const auto times = sample_times(0.0, 1.0, 11);
  StepPolicy policy;
  policy.step = 1e-2;
  for (int n = 0; n < 3; ++n) {
    const BergerSasakiConfig cfg(fubini_study_chart(), 0.5 + 0.25 * n);
    GeodesicState s0{bsg::testing::uniform_in(rng, -0.5, 0.5, 2), random_vector(rng, 2),
                     random_vector(rng, 2, 0.5), random_vector(rng, 2, 0.5)};
    const Trajectory traj = integrate_geodesic(cfg, GeodesicSystem::TotalSpace, s0, times, policy);

    const GeodesicState d0 = total_space_rhs(cfg, s0);
    const Vector y0 = stack(stack(s0.x, s0.p), stack(s0.u, d0.p));
    const OdeRhs f = [&](double, const Vector& y) {
      return stack(y.tail(4), oracle_geodesic_rhs(cfg, y.head(4), y.tail(4)));
    };
    const OdeSolution ref = integrate(f, y0, times, policy);
    double gap = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Vector z = stack(traj.states[k].x, traj.states[k].p);
      gap = std::max(gap, (z - ref.y[k].head(4)).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(gap, 1e-5);
  }
}
