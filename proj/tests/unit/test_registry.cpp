#include "bsg/registry.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bsg;
using bsg::testing::point;

namespace {

bool contains(const std::vector<std::string>& ids, const std::string& id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

TEST(Registry, BuiltinIds) {
  const auto ids = ManifoldRegistry::builtin().ids();
  for (const char* id : {"paper-r2-kahler", "flat-cm", "cp1-fubini-study"})
    EXPECT_TRUE(contains(ids, id)) << id;
}

TEST(Registry, R2EntryFlags) {
  const ManifoldRegistryEntry& e = ManifoldRegistry::builtin().find("paper-r2-kahler");
  EXPECT_TRUE(e.flags.flat);
  EXPECT_TRUE(e.flags.kahler);
  EXPECT_TRUE(e.flags.locally_symmetric);
  EXPECT_TRUE(e.closed_form_geodesics);
  EXPECT_EQ(e.dimension(), 2);
  EXPECT_LT(e.evidence.curvature, kFlatFlagTolerance);
  EXPECT_EQ(e.evidence.points, 50);
}

TEST(Registry, FubiniStudyIsCurvedButSymmetric) {
  const ManifoldRegistryEntry& e = ManifoldRegistry::builtin().find("cp1-fubini-study");
  EXPECT_TRUE(e.flags.kahler);
  EXPECT_TRUE(e.flags.locally_symmetric);
  EXPECT_FALSE(e.flags.flat);
  EXPECT_GT(e.evidence.curvature, 0.1);
  EXPECT_LT(e.evidence.curvature_derivative, kSymmetricFlagTolerance);
}

TEST(Registry, FlatComplexSpaceHasDimensionFour) {
  EXPECT_EQ(ManifoldRegistry::builtin().find("flat-cm").dimension(), 4);
}

TEST(Registry, UnknownId) {
  try {
    ManifoldRegistry::builtin().find("torus");
    FAIL() << "expected UnknownManifold";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownManifold);
  }
}

TEST(Registry, ControlsRefuteTheirFlags) {
  const auto& reg = ManifoldRegistry::builtin();
  EXPECT_GT(reg.find("control-nonsymmetric").evidence.curvature_derivative, kFlagRefutationThreshold);
  EXPECT_LT(reg.find("control-nonsymmetric").evidence.kahler, kKahlerFlagTolerance);
  EXPECT_GT(reg.find("control-perturbed-r2").evidence.kahler, kFlagRefutationThreshold);
}

TEST(Registry, RejectsFalseClaims) {
  ManifoldRegistry reg;
  ManifoldRegistryEntry claim{"fake-flat", "curved but claims flat", "all of R^2",
                              fubini_study_chart,
                              SampleBox{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)},
                              {true, true, true}, false, {}};
  EXPECT_THROW(reg.add(claim, 10), std::runtime_error);
  claim.flags.flat = false;
  EXPECT_NO_THROW(reg.add(claim, 10));
  EXPECT_EQ(reg.ids().size(), 1u);
}

TEST(Registry, RejectsMissingFlag) {
  // An unset flag needs a violation somewhere; flat space with flat = false has none.
  ManifoldRegistry reg;
  ManifoldRegistryEntry claim{"shy-flat", "flat but does not say so", "all of R^2",
                              [] { return flat_chart(1); },
                              SampleBox{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)},
                              {true, true, false}, false, {}};
  EXPECT_THROW(reg.add(claim, 10), std::runtime_error);
}

TEST(Registry, ConfigCarriesDelta) {
  const BergerSasakiConfig cfg = ManifoldRegistry::builtin().config("cp1-fubini-study", 0.25);
  EXPECT_EQ(cfg.delta(), 0.25);
  EXPECT_EQ(cfg.dim(), 2);
}

TEST(ClosedFormExample, ClosedForms) {
  const ClosedFormExample ex;
  EXPECT_NEAR(ex.gamma(4.0)[0], 3.0, 1e-15);
  EXPECT_NEAR(ex.gamma(4.0)[1], std::sqrt(17.0), 1e-15);
  // γ′ by central differences
  const double h = 1e-6;
  EXPECT_LT((ex.gamma_dot(1.3) - (ex.gamma(1.3 + h) - ex.gamma(1.3 - h)) / (2 * h)).norm(), 1e-8);
  // flat(γ′) with g = diag(x², y²)
  const Vector x = ex.gamma(2.0), u = ex.gamma_dot(2.0);
  EXPECT_LT((ex.velocity_covector(2.0) - x.cwiseProduct(x).cwiseProduct(u)).norm(), 1e-12);
  EXPECT_NEAR(ex.parallel_covector(0.0)[0], 1.0, 1e-15);
}

TEST(ClosedFormExample, GeneralParameters) {
  ClosedFormExample ex;
  ex.a = 2.0;
  ex.b = 0.5;
  ex.alpha = 0.3;
  ex.beta = 1.5;
  ex.k1 = 2.0;
  ex.k2 = -1.0;
  const Vector g0 = ex.gamma(0.0);
  EXPECT_NEAR(g0[0], 2.0, 1e-15);
  EXPECT_NEAR(g0[1], 0.5, 1e-15);
  // γ′(0) = (α, β) in these coordinates.
  EXPECT_NEAR(ex.gamma_dot(0.0)[0], 0.3, 1e-15);
  EXPECT_NEAR(ex.gamma_dot(0.0)[1], 1.5, 1e-15);
  const BergerSasakiConfig cfg(paper_r2_chart(), 0.4);
  EXPECT_LT(geodesic_residual(cfg, ex.horizontal_lift_curve(sample_times(0, 2, 400))).max(), 1e-6);
  EXPECT_LT(geodesic_residual(cfg, ex.velocity_lift_curve(sample_times(0, 2, 400))).max(), 1e-6);
}
