#include <gtest/gtest.h>

#include "support.hpp"

using namespace rabin;

namespace {

Dra universal() { return Dra({}, 1, {0}, 0, {{{true}, {false}}}); }

/// Deterministic chain over n states with succ[s] the single successor.
ProductMdp chain(const std::vector<StateId>& succ) {
  LabeledMdp m({}, {"go"}, succ.size());
  for (StateId s = 0; s < succ.size(); ++s) {
    m.enabled[s] = {0};
    m.row(s, 0) = {{succ[s], 1.0}};
  }
  return ProductMdp(m, universal());
}

SolverConfig config(double gamma, double tol = 1e-12) {
  SolverConfig c;
  c.gamma = gamma;
  c.tolerance = tol;
  return c;
}

}  // namespace

TEST(ValueIteration, AbsorbingStateGeometricSeries) {
  auto p = chain({0});
  auto r = value_iteration(p, std::vector<double>{1.0}, config(0.5));
  EXPECT_NEAR(r.utilities[0], 2.0, 1e-10);
}

TEST(ValueIteration, OneStepToAbsorbing) {
  auto p = chain({1, 1});
  auto r = value_iteration(p, std::vector<double>{0.0, 1.0}, config(0.9));
  EXPECT_NEAR(r.utilities[1], 10.0, 1e-9);
  EXPECT_NEAR(r.utilities[0], 9.0, 1e-9);
}

TEST(ValueIteration, PicksTheBetterAction) {
  LabeledMdp m({}, {"left", "right"}, 3);
  m.enabled = {{0, 1}, {0}, {0}};
  m.row(0, 0) = {{1, 1.0}};
  m.row(0, 1) = {{2, 1.0}};
  m.row(1, 0) = {{1, 1.0}};
  m.row(2, 0) = {{2, 1.0}};
  ProductMdp p(m, universal());
  auto r = value_iteration(p, std::vector<double>{0.0, -1.0, 1.0}, config(0.9));
  EXPECT_EQ(r.policy(0), 1u);
  auto r2 = value_iteration(p, std::vector<double>{0.0, 1.0, -1.0}, config(0.9));
  EXPECT_EQ(r2.policy(0), 0u);
}

TEST(ValueIteration, TiesGoToLowestAction) {
  LabeledMdp m({}, {"a", "b", "c"}, 1);
  m.enabled = {{0, 1, 2}};
  for (ActionId a = 0; a < 3; ++a) m.row(0, a) = {{0, 1.0}};
  ProductMdp p(m, universal());
  EXPECT_EQ(value_iteration(p, std::vector<double>{1.0}, config(0.9)).policy(0), 0u);
}

TEST(ValueIteration, ConfigValidation) {
  auto p = chain({0});
  EXPECT_THROW(value_iteration(p, std::vector<double>{1.0}, config(1.0)), ValidationError);
  EXPECT_THROW(value_iteration(p, std::vector<double>{1.0}, config(0.0)), ValidationError);
  EXPECT_THROW(value_iteration(p, std::vector<double>{1.0, 2.0}, config(0.5)), ValidationError);
  auto c = config(0.5);
  c.tolerance = 0;
  EXPECT_THROW(value_iteration(p, std::vector<double>{1.0}, c), ValidationError);
}

TEST(ValueIteration, IterationCapRaisesConvergenceError) {
  auto p = chain({0});
  auto c = config(0.99);
  c.max_iterations = 3;
  try {
    value_iteration(p, std::vector<double>{1.0}, c);
    FAIL() << "expected non-convergence";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(ValueIteration, GridDemoConverges) {
  auto p = grid_demo_product();
  auto r = value_iteration(p, RewardScheme{0, 500, -500}, SolverConfig{});
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_LE(bellman_residual(p, reward_vector(p, RewardScheme{0, 500, -500}), 0.98, r.utilities), 1e-6);
}

TEST(PolicyEvaluation, AbsorbingGoodState) {
  auto p = chain({0});
  StationaryPolicy pi{{0}};
  auto r = policy_evaluation(p, pi, std::vector<double>{500.0}, config(0.98));
  EXPECT_NEAR(r.utilities[0], 500.0 / 0.02, 1e-6);
}

TEST(PolicyEvaluation, TwoStateCycle) {
  auto p = chain({1, 0});
  StationaryPolicy pi{{0, 0}};
  auto r = policy_evaluation(p, pi, std::vector<double>{0.0, 1.0}, config(0.5));
  EXPECT_NEAR(r.utilities[1], 4.0 / 3.0, 1e-10);
  EXPECT_NEAR(r.utilities[0], 2.0 / 3.0, 1e-10);
}

TEST(PolicyEvaluation, RejectsDisabledChoice) {
  auto p = chain({0});
  EXPECT_THROW(policy_evaluation(p, StationaryPolicy{{1}}, std::vector<double>{1.0}, config(0.5)), ValidationError);
  EXPECT_THROW(policy_evaluation(p, StationaryPolicy{{0, 0}}, std::vector<double>{1.0}, config(0.5)), ValidationError);
}

TEST(SolverProperty, EvaluationMatchesGaussianElimination) {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 200; ++i) {
    auto p = testing_support::random_product(rng, 5, 3, 3);
    StationaryPolicy pi;
    for (ProductState sp = 0; sp < p.num_states(); ++sp) {
      const auto& en = p.enabled(sp);
      pi.choice.push_back(en[rng() % en.size()]);
    }
    auto w = reward_vector(p, RewardScheme{0, 1.0, -10.0});
    auto got = policy_evaluation(p, pi, w, config(0.9)).utilities;
    auto want = testing_support::solve_policy_gauss(p, pi, w, 0.9);
    for (std::size_t s = 0; s < want.size(); ++s) ASSERT_NEAR(got[s], want[s], 1e-7);
    auto exact = exact_policy_utilities(p, pi, w, 0.9);
    for (std::size_t s = 0; s < want.size(); ++s) ASSERT_NEAR(exact[s], want[s], 1e-9);
  }
}

TEST(SolverProperty, GreedyPolicyValueMatchesUtilities) {
  std::mt19937_64 rng(62);
  for (int i = 0; i < 200; ++i) {
    auto p = testing_support::random_product(rng, 6, 3, 3);
    auto w = reward_vector(p, RewardScheme{0, 1.0, -10.0});
    auto r = value_iteration(p, w, config(0.9));
    auto u = testing_support::solve_policy_gauss(p, r.policy, w, 0.9);
    for (std::size_t s = 0; s < u.size(); ++s) ASSERT_NEAR(u[s], r.utilities[s], 1e-6);
    ASSERT_LE(r.residual, 1e-6);
  }
}

TEST(SolverProperty, UtilitiesAreBoundedByRewardRange) {
  std::mt19937_64 rng(63);
  for (int i = 0; i < 100; ++i) {
    auto p = testing_support::random_product(rng, 6, 3, 4);
    auto w = reward_vector(p, RewardScheme{0, 3.0, -7.0});
    auto r = value_iteration(p, w, config(0.8));
    for (double u : r.utilities) {
      ASSERT_LE(u, 3.0 / 0.2 + 1e-9);
      ASSERT_GE(u, -7.0 / 0.2 - 1e-9);
    }
  }
}

TEST(SelectParameters, WorkedExample) {
  ParameterBoundEstimate est{2, 0.1, 1.0, 10.0, 10.0, 0.5};
  auto sel = select_parameters(est);
  EXPECT_EQ(sel.w_bad, -16.0);
  EXPECT_EQ(sel.gamma, 1.0 - std::ldexp(1.0, -10));
  EXPECT_TRUE(testing_support::parameter_system_holds(est, sel.gamma, sel.w_bad));
  EXPECT_FALSE(testing_support::parameter_system_holds(est, 1.0 - std::ldexp(1.0, -9), sel.w_bad));
}

TEST(SelectParameters, InfeasibleEpsilon) {
  EXPECT_THROW(select_parameters({2, 0.1, 1.0, 10.0, 10.0, 1.0}), ValidationError);
  EXPECT_THROW(select_parameters({2, 0.1, 1.0, 10.0, 10.0, 2.0}), ValidationError);
  EXPECT_THROW(select_parameters({0, 0.1, 1.0, 10.0, 10.0, 0.5}), ValidationError);
  EXPECT_THROW(select_parameters({2, 0.0, 1.0, 10.0, 10.0, 0.5}), ValidationError);
}

TEST(SelectParametersProperty, DiscountGrowsWithTransientBounds) {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    ParameterBoundEstimate est{1 + rng() % 5, 0.01 + 0.99 * u(rng), 1.0, 1.0 + 50 * u(rng), 1.0 + 50 * u(rng),
                               0.05 + 0.9 * u(rng)};
    auto a = select_parameters(est);
    est.n1 *= 2;
    est.n2 *= 3;
    auto b = select_parameters(est);
    EXPECT_GE(b.gamma, a.gamma);
    EXPECT_EQ(b.w_bad, a.w_bad);
  }
}
