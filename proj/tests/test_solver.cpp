#include <algorithm>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "olp/brute_force.hpp"
#include "olp/instance.hpp"
#include "olp/rng.hpp"
#include "olp/solver.hpp"

namespace olp {
namespace {

PackingInstance random_instance(std::uint64_t seed, std::size_t n, std::size_t m, double budget) {
  return generate({Family::Uniform, 1, {}, 0.0, 1.0, seed}, n, m, budget);
}

// Random small instance with random shape; budgets span tight to loose.
PackingInstance random_small(std::uint64_t seed, std::size_t max_n) {
  Rng rng(seed * 7919 + 1);
  const std::size_t n = 1 + rng.below(max_n);
  const std::size_t m = 1 + rng.below(3);
  const double budget = 0.2 + rng.uniform01() * static_cast<double>(n) * 0.6;
  return random_instance(seed, n, m, budget);
}

TEST(BruteForce, HandComputedOptima) {
  PackingInstance single({2.0}, std::vector<std::vector<double>>{{0.5}}, 1.0);
  EXPECT_DOUBLE_EQ(brute_force_opt(single), 2.0);

  // Fractional vertex x = (1, 0.5).
  PackingInstance pair({1.0, 1.0}, std::vector<std::vector<double>>{{1.0}, {1.0}}, 1.5);
  EXPECT_NEAR(brute_force_opt(pair), 1.5, 1e-12);

  PackingInstance zero({0.0, 0.0}, std::vector<std::vector<double>>{{0.3, 0.2}, {0.1, 0.9}}, 0.5);
  EXPECT_EQ(brute_force_opt(zero), 0.0);

  // Two rows; the best vertex mixes columns: max x1 + x2 s.t.
  // x1 + 0.2 x2 <= 0.6, 0.2 x1 + x2 <= 0.6  ->  x1 = x2 = 0.5.
  PackingInstance cross({1.0, 1.0}, std::vector<std::vector<double>>{{1.0, 0.2}, {0.2, 1.0}}, 0.6);
  EXPECT_NEAR(brute_force_opt(cross), 1.0, 1e-12);

  EXPECT_THROW(brute_force_opt(random_instance(1, 9, 1, 2.0)), ValidationError);
}

TEST(Solve, SingleColumnFits) {
  PackingInstance inst({1.0}, std::vector<std::vector<double>>{{1.0}}, 1.0);
  auto sol = solve(inst);
  EXPECT_DOUBLE_EQ(sol.x[0], 1.0);
  EXPECT_DOUBLE_EQ(sol.value, 1.0);
  EXPECT_GE(sol.p[0] * 1.0 + sol.alpha[0], 1.0 - 1e-12);
}

TEST(Solve, HigherRewardWins) {
  PackingInstance inst({3.0, 1.0}, std::vector<std::vector<double>>{{1.0}, {1.0}}, 1.0);
  auto sol = solve(inst);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 0.0, 1e-12);
  EXPECT_NEAR(sol.value, 3.0, 1e-12);
}

TEST(Solve, MatchesBruteForceOnSmallInstance) {
  auto inst = random_instance(2024, 4, 2, 1.3);
  EXPECT_NEAR(solve(inst).value, brute_force_opt(inst), 1e-9);
}

TEST(Solve, MatchesBruteForceOn200RandomInstances) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto inst = random_small(seed, 6);
    const double exact = brute_force_opt(inst);
    const double got = solve(inst).value;
    EXPECT_LE(std::abs(got - exact), 1e-9 * std::max(1.0, exact)) << "seed " << seed;
  }
}

TEST(Solve, CertifiedOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(50);
    const std::size_t m = 1 + rng.below(5);
    const double budget = 0.5 + rng.uniform01() * static_cast<double>(n) / 3.0;
    const auto family = seed % 3 == 0 ? Family::KSubspace : Family::Uniform;
    auto inst = generate({family, 3, {}, 0.0, 1.0, seed}, n, m, budget);
    auto sol = solve(inst);
    auto problem = certify(inst, sol);
    EXPECT_FALSE(problem.has_value()) << "seed " << seed << ": " << problem.value_or("");
  }
}

TEST(Solve, CertifiedOnDegenerateInstances) {
  // Identical columns and rewards: massive dual degeneracy.
  std::vector<std::vector<double>> cols(12, std::vector<double>{0.5, 0.25});
  PackingInstance inst(std::vector<double>(12, 1.0), cols, 2.0);
  auto sol = solve(inst);
  EXPECT_FALSE(certify(inst, sol).has_value());
  EXPECT_NEAR(sol.value, 4.0, 1e-9);
  // Knapsack with integral budget: primal degenerate.
  auto knap = generate({Family::Knapsack, 1, {}, 0.0, 1.0, 3}, 30, 1, 5.0);
  EXPECT_FALSE(certify(knap, solve(knap)).has_value());
}

TEST(Solve, MonotoneInBudget) {
  auto inst = random_instance(77, 30, 3, 1.0);
  double previous = 0.0;
  for (double budget : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double v = solve(inst, budget).value;
    EXPECT_GE(v, previous - 1e-12);
    previous = v;
  }
}

TEST(Solve, RewardScalingKeepsSupport) {
  auto inst = random_instance(5, 25, 2, 3.0);
  auto base = solve(inst);
  for (double c : {0.25, 3.0, 1000.0}) {
    std::vector<double> scaled(inst.rewards().begin(), inst.rewards().end());
    for (auto& r : scaled) r *= c;
    auto sol = solve(inst.with_rewards(scaled));
    EXPECT_NEAR(sol.value, c * base.value, 1e-9 * c * base.value);
    for (std::size_t t = 0; t < inst.n(); ++t) {
      EXPECT_EQ(sol.x[t] > 1e-9, base.x[t] > 1e-9) << "c=" << c << " t=" << t;
    }
  }
}

TEST(Solve, BudgetOverride) {
  PackingInstance inst({1.0, 1.0}, std::vector<std::vector<double>>{{1.0}, {1.0}}, 2.0);
  EXPECT_NEAR(solve(inst, 1.5).value, 1.5, 1e-12);
  EXPECT_THROW(solve(inst, 0.0), ValidationError);
}

TEST(Solve, IterationLimitReportsPivots) {
  auto inst = random_instance(9, 40, 3, 5.0);
  SolverOptions opts;
  opts.max_pivots = 2;
  try {
    solve(inst, std::nullopt, opts);
    FAIL() << "expected SolverFailure";
  } catch (const SolverFailure& e) {
    EXPECT_GT(e.pivots(), 2u);
  }
}

TEST(Solve, Deterministic) {
  auto inst = random_instance(31, 60, 4, 6.0);
  auto a = solve(inst);
  auto b = solve(inst);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.pivots, b.pivots);
}

TEST(SolveSampleDual, FullSampleIsOriginalLp) {
  auto inst = random_instance(12, 20, 2, 3.0);
  std::vector<std::size_t> all(inst.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto full = solve_sample_dual(inst, all, inst.n(), 1.0);
  auto direct = solve(inst);
  EXPECT_EQ(full.x, direct.x);
  EXPECT_EQ(full.p, direct.p);
  EXPECT_EQ(full.value, direct.value);
}

TEST(SolveSampleDual, SingleColumnSample) {
  auto inst = random_instance(13, 10, 2, 30.0);
  const std::vector<std::size_t> sample{4};
  // (1/10) * 1 * 30 = 3 >= ||a||_inf
  auto sol = solve_sample_dual(inst, sample, 1, 1.0);
  ASSERT_EQ(sol.x.size(), 1u);
  EXPECT_DOUBLE_EQ(sol.x[0], 1.0);
  EXPECT_DOUBLE_EQ(sol.budget, 3.0);
}

TEST(SolveSampleDual, HalfKnapsackMatchesBruteForce) {
  auto inst = generate({Family::Knapsack, 1, {}, 0.0, 1.0, 21}, 16, 1, 5.0);
  std::vector<std::size_t> half{0, 1, 2, 3, 4, 5, 6, 7};
  auto sol = solve_sample_dual(inst, half, 8, 0.9);
  const double budget = (8.0 / 16.0) * 0.9 * 5.0;
  EXPECT_NEAR(sol.value, brute_force_opt(inst.restrict_to(half, budget)), 1e-9);
}

TEST(SolveSampleDual, RejectsBadArguments) {
  auto inst = random_instance(14, 10, 1, 3.0);
  const std::vector<std::size_t> sample{1, 2};
  EXPECT_THROW(solve_sample_dual(inst, sample, 3, 0.5), ValidationError);
  EXPECT_THROW(solve_sample_dual(inst, sample, 2, 0.0), ValidationError);
  EXPECT_THROW(solve_sample_dual(inst, sample, 2, 1.5), ValidationError);
  const std::vector<std::size_t> out_of_range{1, 10};
  EXPECT_THROW(solve_sample_dual(inst, out_of_range, 2, 0.5), ValidationError);
}

TEST(Certify, DetectsBrokenSolutions) {
  auto inst = random_instance(15, 10, 2, 2.0);
  auto sol = solve(inst);
  auto over = sol;
  std::fill(over.x.begin(), over.x.end(), 1.0);
  EXPECT_TRUE(certify(inst, over).has_value());
  auto gap = sol;
  for (auto& p : gap.p) p += 1.0;
  EXPECT_TRUE(certify(inst, gap).has_value());
}

}  // namespace
}  // namespace olp
