#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "olp/instance.hpp"
#include "olp/online.hpp"
#include "olp/rng.hpp"

namespace olp {
namespace {

std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return random_permutation(n, rng);
}

// Straight-line replay of a threshold stage: positions [begin, end) of
// `order`, price vector p, per-row cap; the first column that does not fit
// stops the stage for good.
std::vector<bool> replay_stage(const PackingInstance& inst, const std::vector<std::size_t>& order,
                               std::size_t begin, std::size_t end, const std::vector<double>& p,
                               double cap) {
  std::vector<bool> out(order.size(), false);
  std::vector<double> load(inst.m(), 0.0);
  for (std::size_t k = begin; k < end; ++k) {
    const std::size_t t = order[k];
    double cost = 0.0;
    for (std::size_t i = 0; i < inst.m(); ++i) cost += p[i] * inst.entry(t, i);
    if (!(inst.reward(t) > cost)) continue;
    bool fits = true;
    for (std::size_t i = 0; i < inst.m(); ++i) fits = fits && load[i] + inst.entry(t, i) <= cap;
    if (!fits) break;
    for (std::size_t i = 0; i < inst.m(); ++i) load[i] += inst.entry(t, i);
    out[k] = true;
  }
  return out;
}

TEST(Stream, ProtocolMisuse) {
  PackingInstance inst({1.0, 1.0}, std::vector<std::vector<double>>{{1.0}, {1.0}}, 1.0);
  EXPECT_THROW(PermutationStream(inst, std::vector<std::size_t>{0, 0}), ValidationError);
  EXPECT_THROW(PermutationStream(inst, std::vector<std::size_t>{0}), ValidationError);
  PermutationStream stream(inst, std::vector<std::size_t>{1, 0});
  EXPECT_THROW(stream.decide(true), std::logic_error);
  EXPECT_EQ(stream.arrive(), 1u);
  EXPECT_THROW(stream.arrive(), std::logic_error);
  stream.decide(true);
  EXPECT_EQ(stream.arrive(), 0u);
  stream.decide(false);
  EXPECT_TRUE(stream.done());
  EXPECT_THROW(stream.arrive(), std::logic_error);
  EXPECT_EQ(stream.decisions(), (std::vector<bool>{true, false}));
}

TEST(Otp, ZeroPriceAcceptsEverythingAfterSample) {
  auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, 1}, 50, 2, 1000.0);
  const auto order = seeded_order(50, 2);
  auto trace = run_otp(inst, 0.2, order);
  ASSERT_EQ(trace.stages.size(), 1u);
  EXPECT_EQ(trace.stages[0].p, (std::vector<double>{0.0, 0.0}));
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(trace.decisions[k], k >= 10) << k;
  EXPECT_FALSE(trace.halted_at.has_value());
}

TEST(Otp, FullSampleRejectsEverything) {
  auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, 1}, 20, 1, 5.0);
  auto trace = run_otp(inst, 1.0, seeded_order(20, 3));
  EXPECT_EQ(trace.value, 0.0);
  EXPECT_EQ(trace.accepted().size(), 0u);
}

TEST(Otp, KnapsackMatchesScalarReplay) {
  // n=100, B=5, eps=0.2: s=20 and the sampled budget (20/100)(0.8)(5) = 0.8 < 1,
  // so the sampled LP takes 0.8 of its best column and the price is that reward.
  const std::size_t n = 100;
  const double budget = 5.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = generate({Family::Knapsack, 1, {}, 0.0, 1.0, seed}, n, 1, budget);
    const auto order = seeded_order(n, seed + 1000);
    double price = 0.0;
    for (std::size_t k = 0; k < 20; ++k) price = std::max(price, inst.reward(order[k]));
    std::vector<bool> want(n, false);
    std::size_t taken = 0;
    double value = 0.0;
    for (std::size_t k = 20; k < n; ++k) {
      const double r = inst.reward(order[k]);
      if (!(r > price)) continue;
      if (taken == 5) break;
      ++taken;
      value += r;
      want[k] = true;
    }
    auto trace = run_otp(inst, 0.2, order);
    EXPECT_NEAR(trace.stages[0].p[0], price, 1e-12) << seed;
    EXPECT_EQ(trace.decisions, want) << seed;
    EXPECT_DOUBLE_EQ(trace.value, value);
  }
}

TEST(Otp, GeneralReplayAndSampleZeros) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, seed}, 80, 3, 6.0);
    const auto order = seeded_order(80, seed);
    auto trace = run_otp(inst, 0.15, order);
    const std::size_t s = 12;
    EXPECT_EQ(trace.stages[0].sample_size, s);
    EXPECT_EQ(trace.decisions, replay_stage(inst, order, s, 80, trace.stages[0].p, 6.0)) << seed;
    EXPECT_TRUE(trace.feasible);
    for (std::size_t k = 0; k < s; ++k) EXPECT_FALSE(trace.decisions[k]);
  }
}

TEST(Otp, SkipModeDominatesHalt) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = generate({Family::Correlated, 1, {}, 0.0, 1.0, seed}, 200, 2, 4.0);
    const auto order = seeded_order(200, seed);
    auto halt = run_otp(inst, 0.1, order, HaltMode::Halt);
    auto skip = run_otp(inst, 0.1, order, HaltMode::Skip);
    EXPECT_TRUE(skip.feasible);
    EXPECT_FALSE(skip.halted_at.has_value());
    for (std::size_t k = 0; k < halt.halt_position(); ++k) EXPECT_EQ(halt.decisions[k], skip.decisions[k]);
    EXPECT_GE(skip.value, halt.value);
  }
}

TEST(Otp, RejectsBadEpsilon) {
  auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, 1}, 20, 1, 5.0);
  const auto order = seeded_order(20, 1);
  EXPECT_THROW(run_otp(inst, 0.0, order), ValidationError);
  EXPECT_THROW(run_otp(inst, 0.01, order), ValidationError);
  EXPECT_THROW(run_robust_otp(inst, 0.0, order), ValidationError);
  EXPECT_THROW(run_robust_otp(inst, 1.0, order), ValidationError);
}

TEST(Sdotp, NoAffordableColumn) {
  auto inst = generate({Family::Knapsack, 1, {}, 0.0, 1.0, 4}, 10, 1, 1.0);
  auto trace = run_sdotp(inst, 5, 0.05, seeded_order(10, 4));
  EXPECT_EQ(trace.value, 0.0);
  EXPECT_LT(trace.stages[0].cap, 1.0);
}

TEST(Sdotp, LooseCapAcceptsClassification) {
  auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, 8}, 40, 2, 1e6);
  const auto order = seeded_order(40, 8);
  auto trace = run_sdotp(inst, 20, 1e-9, order);
  for (std::size_t k = 0; k < 40; ++k) EXPECT_EQ(trace.decisions[k], k >= 20) << k;
}

TEST(Sdotp, MatchesReplayOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, seed}, 40, 2, 8.0);
    const auto order = seeded_order(40, seed + 7);
    auto trace = run_sdotp(inst, 10, 0.3, order);
    const auto& stage = trace.stages[0];
    EXPECT_EQ(stage.window_begin, 10u);
    EXPECT_EQ(stage.window_end, 20u);
    EXPECT_DOUBLE_EQ(stage.cap, 2.0);
    EXPECT_EQ(trace.decisions, replay_stage(inst, order, 10, 20, stage.p, 2.0)) << seed;
  }
}

TEST(Sdotp, StreamMustBePositioned) {
  auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, 1}, 20, 1, 5.0);
  const auto order = seeded_order(20, 1);
  PermutationStream stream(inst, order);
  EXPECT_THROW(run_sdotp_stage(inst, 5, 0.1, stream), std::logic_error);
}

TEST(RobustOtp, OneRowEqualsOtpOnScaledBudget) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = generate({Family::Knapsack, 1, {}, 0.0, 1.0, seed}, 300, 1, 20.0);
    const auto order = seeded_order(300, seed);
    auto robust = run_robust_otp(inst, 0.1, order);
    auto plain = run_otp(inst.with_budget((1.0 - 0.1) * 20.0), 0.1, order);
    EXPECT_EQ(robust.decisions, plain.decisions);
    EXPECT_EQ(robust.budget, 20.0);
  }
}

TEST(RobustOtp, ArcFeasibleOnOriginalBudget) {
  auto inst = generate({Family::Arc, 1, {}, 0.0, 1.0, 0}, 200, 2, 20.0);
  bool any_difference = false;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto order = seeded_order(200, seed);
    auto robust = run_robust_otp(inst, 0.1, order);
    ASSERT_TRUE(robust.feasible) << seed;
    ASSERT_LE(*std::max_element(robust.final_occupation.begin(), robust.final_occupation.end()),
              20.0 + 1e-9);
    if (seed < 50) any_difference = any_difference || robust.decisions != run_otp(inst, 0.1, order).decisions;
  }
  EXPECT_TRUE(any_difference);
}

TEST(RobustDpa, ScheduleArithmetic) {
  const auto plan = dpa_schedule(64, 0.25);
  ASSERT_EQ(plan.size(), 2u);
  EXPECT_EQ(plan[0].sample_size, 16u);
  EXPECT_DOUBLE_EQ(plan[0].delta, 0.5);
  EXPECT_EQ(plan[0].window_begin, 16u);
  EXPECT_EQ(plan[0].window_end, 32u);
  EXPECT_EQ(plan[1].sample_size, 32u);
  EXPECT_DOUBLE_EQ(plan[1].delta, std::sqrt(1.0 / 8.0));
  EXPECT_EQ(plan[1].window_begin, 32u);
  EXPECT_EQ(plan[1].window_end, 64u);
  EXPECT_EQ(dpa_schedule(1000, 0.01).size(), 6u);
  EXPECT_TRUE(dpa_schedule(100, 0.6).empty());
}

TEST(RobustDpa, WindowsPartitionTheStream) {
  for (std::size_t n : {37u, 100u, 999u, 2000u}) {
    for (double eps : {0.01, 0.03, 0.1, 0.125, 0.3}) {
      if (sample_size(eps, n) < 1) continue;
      const auto plan = dpa_schedule(n, eps);
      std::size_t cursor = sample_size(eps, n);
      for (const auto& step : plan) {
        EXPECT_GE(step.window_begin, cursor);
        EXPECT_LT(step.window_begin, step.window_end);
        EXPECT_LE(step.window_end, n);
        cursor = step.window_end;
      }
    }
  }
}

TEST(RobustDpa, HugeBudgetTakesEverythingAfterSample) {
  auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, 6}, 64, 2, 1e6);
  const auto order = seeded_order(64, 6);
  auto trace = run_robust_dpa(inst, 0.25, order);
  double want = 0.0;
  for (std::size_t k = 16; k < 64; ++k) want += inst.reward(order[k]);
  EXPECT_NEAR(trace.value, want, 1e-12);
  ASSERT_EQ(trace.stages.size(), 2u);
}

TEST(RobustDpa, FeasibleAndCapsWithinBudget) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, seed}, 400, 3, 15.0);
    const auto order = seeded_order(400, seed);
    auto trace = run_robust_dpa(inst, 0.05, order);
    EXPECT_TRUE(trace.feasible) << seed;
    for (std::size_t k = 0; k < 20; ++k) EXPECT_FALSE(trace.decisions[k]);
    // Stage caps sum to at most the perturbed budget.
    double caps = 0.0;
    for (const auto& stage : trace.stages) caps += stage.cap;
    EXPECT_LE(caps, (1.0 - 0.05) * 15.0 + 1e-9);
  }
}

TEST(Greedy, Examples) {
  auto roomy = generate({Family::Uniform, 1, {}, 0.0, 1.0, 2}, 30, 2, 100.0);
  auto all = run_greedy_baseline(roomy, seeded_order(30, 2));
  EXPECT_EQ(all.accepted().size(), 30u);

  auto tight = generate({Family::Knapsack, 1, {}, 0.0, 1.0, 2}, 30, 1, 1.0);
  const auto order = seeded_order(30, 5);
  auto one = run_greedy_baseline(tight, order);
  EXPECT_EQ(one.accepted(), std::vector<std::size_t>{order[0]});
}

TEST(Greedy, MatchesReplayOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = generate({Family::Uniform, 1, {}, 0.0, 1.0, seed}, 60, 3, 5.0);
    const auto order = seeded_order(60, seed);
    std::vector<bool> want(60, false);
    std::vector<double> load(3, 0.0);
    for (std::size_t k = 0; k < 60; ++k) {
      const auto col = inst.column(order[k]);
      bool fits = true;
      for (std::size_t i = 0; i < 3; ++i) fits = fits && load[i] + col[i] <= 5.0;
      if (!fits) continue;
      for (std::size_t i = 0; i < 3; ++i) load[i] += col[i];
      want[k] = true;
    }
    EXPECT_EQ(run_greedy_baseline(inst, order).decisions, want);
  }
}

TEST(AllAlgorithms, DeterministicAndFeasibleWithHistory) {
  auto inst = generate({Family::KSubspace, 3, {}, 0.0, 1.0, 9}, 300, 2, 12.0);
  const auto order = seeded_order(300, 9);
  const std::vector<std::function<OnlineRunTrace()>> runs{
      [&] { return run_otp(inst, 0.1, order); },
      [&] { return run_robust_otp(inst, 0.1, order); },
      [&] { return run_robust_dpa(inst, 0.1, order); },
      [&] { return run_greedy_baseline(inst, order); },
  };
  for (const auto& run : runs) {
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a.decisions, b.decisions) << a.algorithm;
    EXPECT_EQ(a.value, b.value) << a.algorithm;
    ASSERT_EQ(a.occupation_history.size(), 300u * 2u);
    for (std::size_t k = 0; k < 300; ++k) {
      for (const double v : a.occupation_after(k)) EXPECT_LE(v, 12.0 + 1e-9) << a.algorithm;
    }
    EXPECT_TRUE(a.feasible) << a.algorithm;
  }
}

}  // namespace
}  // namespace olp
