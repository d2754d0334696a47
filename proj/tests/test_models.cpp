#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "ldrift/lorentz.hpp"
#include "ldrift/models.hpp"

using namespace ldrift;

TEST(TruncationWeight, Basics) {
  const BoxDomain d({4.0}, {4});
  const GridFunction b(d, {10.0, 0.0, 3.0});
  const auto theta = truncation_weight(b, 4.0);
  EXPECT_DOUBLE_EQ(theta[0], 0.4);
  EXPECT_DOUBLE_EQ(theta[1], 1.0);
  EXPECT_DOUBLE_EQ(theta[2], 1.0);
  EXPECT_THROW(truncation_weight(b, 0.0), std::invalid_argument);
  EXPECT_THROW(truncation_weight(GridFunction(d, {-1.0, 0.0, 0.0}), 1.0), std::invalid_argument);
}

TEST(TruncationWeight, ReproducesTruncation) {
  const auto d = BoxDomain::cube(2, 1.0, 10);
  Rng rng(21);
  for (int k = 0; k < 30; ++k) {
    auto b = ldrift::testing::random_function(d, rng, 5.0);
    for (double& v : b.values()) v = std::abs(v);
    const double m = rng.uniform(0.1, 5.0);
    const auto theta = truncation_weight(b, m);
    const auto tb = truncate(b, m);
    for (std::size_t i = 0; i < b.size(); ++i) {
      EXPECT_GT(theta[i], 0.0);
      EXPECT_LE(theta[i], 1.0);
      EXPECT_NEAR(theta[i] * b[i], tb[i], 1e-14 * (1.0 + b[i]));
      EXPECT_NEAR((1.0 - theta[i]) * b[i], b[i] - tb[i], 1e-13 * (1.0 + b[i]));
      EXPECT_EQ(theta[i] == 1.0, b[i] <= m);
    }
  }
}

TEST(Certificate, BoundedDriftSaturates) {
  const auto d = BoxDomain::cube(3, 1.0, 6);
  const GridFunction b(d, std::vector<double>(d.interior_count(), 2.0));
  const std::vector<GridFunction> s{b};
  const auto c = certify_truncation(s, 2.0, 1.0);
  EXPECT_EQ(c.measured, 0.0);
  EXPECT_TRUE(c.evolution_pass);
  EXPECT_TRUE(c.longtime_pass);
  EXPECT_NEAR(c.evolution_threshold, 1.0 / (2.0 * 1.2407009817988), 1e-12);
  EXPECT_NEAR(c.longtime_threshold, 1.0 / (4.0 * 1.2407009817988), 1e-12);
}

TEST(Certificate, TwoDimensionsPassOnlyWhenSaturated) {
  ModelParams p;
  p.drift_strength = 0.1;
  const auto data = make_model("singular-drift", BoxDomain::cube(2, 1.0, 16), p);
  const double bmax = drift_coefficient(data, 0.0).max_abs();
  const auto low = certify_truncation(data, 0.5 * bmax);
  EXPECT_FALSE(low.embedding_defined);
  EXPECT_TRUE(std::isnan(low.evolution_threshold));
  EXPECT_FALSE(low.evolution_pass);
  EXPECT_TRUE(certify_truncation(data, bmax).evolution_pass);
}

TEST(Certificate, MonotoneInLevel) {
  const auto data = make_model("singular-drift", BoxDomain::cube(3, 1.0, 12), ModelParams{});
  double prev = 1e300;
  for (double m : {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
    const auto c = certify_truncation(data, m);
    EXPECT_LE(c.measured, prev);
    prev = c.measured;
  }
}

TEST(Certificate, SmallInverseDistanceDriftPassesEveryLevel) {
  const auto data = make_model("singular-drift", BoxDomain::cube(3, 1.0, 12), ModelParams{});
  const auto plan = default_truncation_plan(data);
  ASSERT_GE(plan.levels.size(), 2u);
  for (std::size_t k = 0; k < plan.levels.size(); ++k) EXPECT_TRUE(plan.certified(k)) << plan.levels[k];
}

TEST(Certificate, LargeInverseDistanceDriftShowsObstruction) {
  // c omega_3^{1/3} = 0.5 * 1.612 > alpha / (2 S) = 0.403: the remainder
  // plateaus above the bound as the grid is refined.
  ModelParams p;
  p.drift_strength = 0.5;
  std::vector<double> ladder;
  double threshold = 0.0;
  for (int n : {8, 12, 16}) {
    const auto data = make_model("singular-drift", BoxDomain::cube(3, 1.0, n), p);
    const auto c = certify_truncation(data, 2.0);
    threshold = c.evolution_threshold;
    EXPECT_FALSE(c.evolution_pass);
    ladder.push_back(c.measured);
  }
  EXPECT_TRUE(distance_obstruction(ladder, threshold, 0.2));
  const std::vector<double> low{0.1, 0.1};
  EXPECT_FALSE(distance_obstruction(low, threshold));
}

TEST(TruncationPlan, DefaultStopsOneLevelAfterSaturation) {
  const auto data = make_model("singular-drift", BoxDomain::cube(2, 1.0, 16), ModelParams{});
  const double bmax = drift_coefficient(data, 0.0).max_abs();
  const auto plan = default_truncation_plan(data);
  ASSERT_GE(plan.levels.size(), 2u);
  EXPECT_GE(plan.levels.back(), bmax);
  EXPECT_GE(plan.levels[plan.levels.size() - 2], bmax);
  if (plan.levels.size() > 2) EXPECT_LT(plan.levels[plan.levels.size() - 3], bmax);
  for (std::size_t k = 1; k < plan.levels.size(); ++k) EXPECT_DOUBLE_EQ(plan.levels[k], 2.0 * plan.levels[k - 1]);
  EXPECT_TRUE(plan.certified(plan.levels.size() - 1));
}

TEST(TruncationPlan, NoDriftUsesUnitStart) {
  const auto data = make_model("heat", BoxDomain::cube(2, 1.0, 8), ModelParams{});
  const auto plan = default_truncation_plan(data);
  EXPECT_EQ(plan.levels, (std::vector<double>{1.0, 2.0}));
  EXPECT_THROW(make_truncation_plan(data, {2.0, 1.0}), std::invalid_argument);
}

TEST(Catalog, AllModelsPassHypotheses) {
  for (const auto& entry : builtin_models()) {
    for (int dim : {1, 2, 3}) {
      const auto data = entry.build(BoxDomain::cube(dim, 1.0, 6), ModelParams{});
      const auto r = verify_hypotheses(data, 1000, 99);
      EXPECT_TRUE(r.pass()) << entry.name << " dim " << dim << " " << nlohmann::json(r).dump();
    }
  }
}

TEST(Catalog, HypothesisCheckCatchesBrokenModel) {
  auto data = make_model("heat", BoxDomain::cube(2, 1.0, 6), ModelParams{});
  data.diffusion.alpha = 1.5;
  EXPECT_FALSE(verify_hypotheses(data, 200, 1).pass());
}

TEST(Catalog, UnknownNamesThrow) {
  const auto d = BoxDomain::cube(2, 1.0, 6);
  EXPECT_THROW(make_model("nope", d), std::invalid_argument);
  ModelParams p;
  p.initial = "nope";
  EXPECT_THROW(make_model("heat", d, p), std::invalid_argument);
}

TEST(Catalog, SingularDriftHasExactLipschitzBound) {
  const auto data = make_model("singular-drift", BoxDomain::cube(2, 1.0, 8), ModelParams{});
  const Point x{0.3, 0.7, 0.0};
  const double b = data.drift.coefficient(x, 0.0);
  const Vec3 d1 = data.drift.evaluate(x, 0.0, 2.5);
  const Vec3 d2 = data.drift.evaluate(x, 0.0, -1.0);
  const double diff = std::hypot(d1[0] - d2[0], d1[1] - d2[1]);
  EXPECT_NEAR(diff, b * 3.5, 1e-14);
}

TEST(Catalog, SingularPointAvoidsNodes) {
  const auto d = BoxDomain::cube(3, 1.0, 16);
  const auto data = make_model("singular-drift", d, ModelParams{});
  const auto b = drift_coefficient(data, 0.0);
  for (double v : b.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Catalog, ManufacturedSourceMatchesExactSolution) {
  // -div F = u_t - Laplace u pointwise for u = e^{-t} sin(pi x) sin(pi y).
  const auto d = BoxDomain::cube(2, 1.0, 8);
  const auto data = make_model("manufactured", d, ModelParams{});
  const double pi = std::numbers::pi;
  const double lam = 2.0 * pi * pi;
  const Point x{0.31, 0.57, 0.0};
  const double t = 0.4;
  const double e = 1e-4;
  auto F = [&](const Point& p, int a) { return data.source(p, t, a); };
  double div = 0.0;
  for (int a = 0; a < 2; ++a) {
    Point xp = x, xm = x;
    xp[a] += e;
    xm[a] -= e;
    div += (F(xp, a) - F(xm, a)) / (2.0 * e);
  }
  const double u = data.exact(x, t);
  EXPECT_NEAR(-div, -u + lam * u, 1e-6);
  EXPECT_NEAR(data.initial[0], data.exact(d.node_position(0), 0.0), 1e-15);
}

TEST(Catalog, DriftFieldFromGrid) {
  const auto d = BoxDomain::cube(2, 1.0, 4);
  ModelParams p;
  p.drift_field = GridFunction::sample(d, [](const Point& x) { return x[0] + x[1]; });
  const auto data = make_model("heat", d, p);
  ASSERT_TRUE(data.drift.active());
  const auto b = drift_coefficient(data, 0.0);
  EXPECT_EQ(b.values(), p.drift_field->values());
  ModelParams bad;
  bad.drift_field = GridFunction(BoxDomain::cube(2, 1.0, 5));
  EXPECT_THROW(make_model("heat", d, bad), DomainMismatch);
}

TEST(Catalog, RandomInitialStateIsSeeded) {
  const auto d = BoxDomain::cube(2, 1.0, 6);
  EXPECT_EQ(initial_state(d, "random", 1.0, 5).values(), initial_state(d, "random", 1.0, 5).values());
  EXPECT_NE(initial_state(d, "random", 1.0, 5).values(), initial_state(d, "random", 1.0, 6).values());
}
