#include <cmath>

#include <Eigen/SparseLU>
#include <gtest/gtest.h>

#include "generators.hpp"
#include "ldrift/accretive_op.hpp"

using namespace ldrift;
using ldrift::testing::random_function;

namespace {

ProblemData singular3d(int n = 8) { return make_model("singular-drift", BoxDomain::cube(3, 1.0, n), ModelParams{}); }

std::vector<ProblemData> battery() {
  std::vector<ProblemData> out;
  const auto d = BoxDomain::cube(2, 1.0, 10);
  ModelParams p;
  p.source = "eigen-gradient";
  for (const char* name : {"heat", "variable-diffusion", "lipschitz-nonlinear", "manufactured"}) {
    out.push_back(make_model(name, d, p));
  }
  out.push_back(singular3d());
  return out;
}

}  // namespace

TEST(Operator, HeatIsDiscreteLaplacian) {
  const auto d = BoxDomain({1.0, 2.0}, {7, 9});
  const auto data = make_model("heat", d, ModelParams{});
  const auto op = TruncatedOperator::truncated(data, 1.0, 0.0);
  Rng rng(1);
  const auto u = random_function(d, rng);
  const Eigen::VectorXd ref = dirichlet_laplacian(d) * u.as_eigen();
  const auto w = op.apply(u);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(w[i], ref[static_cast<Eigen::Index>(i)], 1e-10);
}

TEST(Operator, ZeroMapsToZero) {
  for (const auto& data : battery()) {
    const auto w = TruncatedOperator::full(data, 0.3).apply(GridFunction(data.domain));
    EXPECT_EQ(w.max_abs(), 0.0) << data.name;
  }
}

TEST(Operator, PairingMatchesApply) {
  Rng rng(2);
  for (const auto& data : battery()) {
    for (const auto& op : {TruncatedOperator::full(data, 0.2), TruncatedOperator::truncated(data, 0.5, 0.2)}) {
      for (int k = 0; k < 50; ++k) {
        const auto u = random_function(data.domain, rng);
        const auto v = random_function(data.domain, rng);
        const double a = op.pairing(u, v);
        EXPECT_NEAR(a, inner(op.apply(u), v), 1e-12 * (1.0 + std::abs(a))) << data.name;
      }
    }
  }
}

TEST(Operator, JacobianMatchesFiniteDifferences) {
  Rng rng(3);
  for (const auto& data : battery()) {
    const auto op = TruncatedOperator::full(data, 0.1);
    const auto u = random_function(data.domain, rng);
    const auto dir = random_function(data.domain, rng);
    const Eigen::VectorXd jd = op.jacobian(u) * dir.as_eigen();
    const double e = 1e-6;
    auto up = u;
    up.axpy(e, dir);
    auto um = u;
    um.axpy(-e, dir);
    const auto fd = (1.0 / (2.0 * e)) * (op.apply(up) - op.apply(um));
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      err = std::max(err, std::abs(fd[i] - jd[static_cast<Eigen::Index>(i)]));
      scale = std::max(scale, std::abs(fd[i]));
    }
    EXPECT_LE(err, 1e-6 * scale) << data.name;
  }
}

TEST(Operator, SaturatedLevelDropsDrift) {
  const auto data = singular3d();
  const double bmax = drift_coefficient(data, 0.0).max_abs();
  const auto op = TruncatedOperator::truncated(data, bmax, 0.0);
  EXPECT_FALSE(op.has_drift());
  Rng rng(4);
  const auto u = random_function(data.domain, rng);
  const auto a = op.apply(u);
  const auto b = TruncatedOperator::diffusion(data, 0.0).apply(u);
  EXPECT_EQ(a.values(), b.values());
  const auto theta_b = op.complementary_drift(u);
  const auto full_b = TruncatedOperator::full(data, 0.0).complementary_drift(u);
  EXPECT_EQ(inner_vec(full_b, full_b), 0.0);
  EXPECT_GT(inner_vec(theta_b, theta_b), 0.0);
}

TEST(Accretivity, HeatMarginIsHalfDirichletForm) {
  const auto d = BoxDomain::cube(2, 1.0, 9);
  const auto data = make_model("heat", d, ModelParams{});
  const auto op = TruncatedOperator::truncated(data, 1.0, 0.0);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto u = random_function(d, rng);
    const auto v = random_function(d, rng);
    const double g = h1_seminorm(u - v);
    EXPECT_NEAR(accretivity_margin(op, u, v), 0.5 * g * g, 1e-10 * g * g);
  }
  const auto u = random_function(d, rng);
  EXPECT_EQ(accretivity_margin(op, u, u), 0.0);
}

TEST(Accretivity, CertifiedDriftKeepsMargin) {
  const auto data = singular3d(10);
  const auto plan = default_truncation_plan(data);
  Rng rng(6);
  for (std::size_t k = 0; k < plan.levels.size(); ++k) {
    ASSERT_TRUE(plan.certified(k));
    const auto op = TruncatedOperator::truncated(data, plan.levels[k], 0.0);
    for (int i = 0; i < 20; ++i) {
      EXPECT_GE(accretivity_margin(op, random_function(data.domain, rng, 3.0), random_function(data.domain, rng)),
                -1e-10);
    }
  }
}

TEST(Resolvent, HeatAgreesWithDirectSolve) {
  const auto d = BoxDomain::cube(2, 1.0, 16);
  const auto data = make_model("heat", d, ModelParams{});
  const auto op = TruncatedOperator::truncated(data, 1.0, 0.0);
  Rng rng(7);
  const auto g = random_function(d, rng);
  for (double lambda : {1e-3, 0.1, 1.0}) {
    Eigen::SparseMatrix<double> k = lambda * dirichlet_laplacian(d);
    for (Eigen::Index i = 0; i < k.rows(); ++i) k.coeffRef(i, i) += 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(k);
    const Eigen::VectorXd ref = lu.solve(g.as_eigen());
    for (auto method : {SolverMethod::picard, SolverMethod::newton}) {
      ResolventConfig cfg;
      cfg.lambda = lambda;
      cfg.method = method;
      const auto r = resolve(op, g, cfg);
      EXPECT_TRUE(r.diagnostics.converged);
      for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(r.solution[i], ref[static_cast<Eigen::Index>(i)], 1e-10);
    }
  }
}

TEST(Resolvent, ZeroDataGivesZero) {
  for (const auto& data : battery()) {
    const auto r = resolve(TruncatedOperator::full(data, 0.0), GridFunction(data.domain), ResolventConfig{});
    EXPECT_EQ(r.solution.max_abs(), 0.0);
    EXPECT_EQ(r.diagnostics.iterations, 0);
  }
}

TEST(Resolvent, ResidualWithinTolerance) {
  Rng rng(8);
  for (const auto& data : battery()) {
    const auto op = TruncatedOperator::truncated(data, 0.5, 0.0);
    const auto g = random_function(data.domain, rng);
    ResolventConfig cfg;
    cfg.lambda = 0.05;
    cfg.method = data.drift.active() ? SolverMethod::newton : SolverMethod::picard;
    const auto r = resolve(op, g, cfg);
    auto res = r.solution + cfg.lambda * op.apply(r.solution) - g;
    EXPECT_LE(l2_norm(res), cfg.tol * (1.0 + l2_norm(g))) << data.name;
  }
}

TEST(Resolvent, Nonexpansive) {
  Rng rng(9);
  for (const auto& data : battery()) {
    const auto op = TruncatedOperator::truncated(data, 0.5, 0.0);
    ResolventConfig cfg;
    cfg.method = SolverMethod::newton;
    for (double lambda : {1e-2, 1.0}) {
      cfg.lambda = lambda;
      for (int k = 0; k < 10; ++k) {
        const auto g1 = random_function(data.domain, rng);
        const auto g2 = random_function(data.domain, rng);
        const auto u1 = resolve(op, g1, cfg).solution;
        const auto u2 = resolve(op, g2, cfg).solution;
        EXPECT_LE(l2_norm(u1 - u2), l2_norm(g1 - g2) + 2e-10) << data.name;
      }
    }
  }
}

TEST(Resolvent, CoerciveStepFunctional) {
  Rng rng(10);
  for (const auto& data : battery()) {
    const auto op = TruncatedOperator::truncated(data, 0.5, 0.0);
    for (double lambda : {1e-3, 0.1, 1.0}) {
      const auto u = random_function(data.domain, rng);
      const double l2 = l2_norm(u);
      const double h1 = h1_seminorm(u);
      // With drift only the accretive half of alpha is available.
      const double a = op.has_drift() ? 0.5 * op.alpha() : op.alpha();
      EXPECT_GE(inner(u, u) + lambda * op.pairing(u, u), std::min(1.0, lambda * a) * (l2 * l2 + h1 * h1))
          << data.name;
    }
  }
}

TEST(Resolvent, Errors) {
  const auto data = make_model("heat", BoxDomain::cube(2, 1.0, 8), ModelParams{});
  const auto op = TruncatedOperator::full(data, 0.0);
  ResolventConfig cfg;
  cfg.lambda = 0.0;
  EXPECT_THROW(resolve(op, GridFunction(data.domain), cfg), std::invalid_argument);
  cfg.lambda = -1.0;
  EXPECT_THROW(resolve(op, GridFunction(data.domain), cfg), std::invalid_argument);

  auto nl = make_model("lipschitz-nonlinear", BoxDomain::cube(2, 1.0, 8), ModelParams{});
  ResolventConfig slow;
  slow.max_iter = 2;
  Rng rng(11);
  try {
    resolve(TruncatedOperator::full(nl, 0.0), random_function(nl.domain, rng), slow);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_FALSE(e.diagnostics().converged);
    EXPECT_EQ(e.diagnostics().residual_history.size(), 3u);
  }
}
