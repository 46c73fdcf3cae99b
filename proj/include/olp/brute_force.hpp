#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "olp/instance.hpp"

namespace olp {

inline constexpr std::size_t kBruteForceMaxColumns = 8;
inline constexpr std::size_t kBruteForceMaxRows = 3;

/// Exact LP optimum by enumerating basic feasible solutions: every set R of
/// rows declared tight and every assignment of the variables to {0, 1, basic}
/// with |basic| = |R| gives a square system; feasible solutions are scored
/// and the best one kept. Exponential, intended as a test oracle.
inline double brute_force_opt(const PackingInstance& inst,
                              std::optional<double> budget_override = std::nullopt) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  if (n > kBruteForceMaxColumns || m > kBruteForceMaxRows) {
    throw ValidationError("brute_force_opt supports n <= 8 and m <= 3");
  }
  const double budget = budget_override.value_or(inst.budget());
  constexpr double kTol = 1e-12;

  double best = 0.0;  // x = 0 is always feasible
  std::size_t pow3 = 1;
  for (std::size_t t = 0; t < n; ++t) pow3 *= 3;

  for (std::size_t rows_mask = 0; rows_mask < (std::size_t{1} << m); ++rows_mask) {
    std::vector<std::size_t> tight;
    for (std::size_t i = 0; i < m; ++i) {
      if (rows_mask >> i & 1U) tight.push_back(i);
    }
    const std::size_t k = tight.size();

    for (std::size_t code = 0; code < pow3; ++code) {
      // state: 0 -> x=0, 1 -> x=1, 2 -> basic
      std::vector<int> state(n);
      std::vector<std::size_t> basic;
      std::size_t c = code;
      for (std::size_t t = 0; t < n; ++t) {
        state[t] = static_cast<int>(c % 3);
        c /= 3;
        if (state[t] == 2) basic.push_back(t);
      }
      if (basic.size() != k) continue;

      std::vector<double> x(n, 0.0);
      for (std::size_t t = 0; t < n; ++t) x[t] = state[t] == 1 ? 1.0 : 0.0;

      if (k > 0) {
        const auto kk = static_cast<long>(k);
        Eigen::MatrixXd lhs(kk, kk);
        Eigen::VectorXd rhs(kk);
        for (std::size_t r = 0; r < k; ++r) {
          double fixed = 0.0;
          for (std::size_t t = 0; t < n; ++t) {
            if (state[t] == 1) fixed += inst.entry(t, tight[r]);
          }
          rhs[static_cast<long>(r)] = budget - fixed;
          for (std::size_t b = 0; b < k; ++b) {
            lhs(static_cast<long>(r), static_cast<long>(b)) = inst.entry(basic[b], tight[r]);
          }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(rhs);
        for (std::size_t b = 0; b < k; ++b) x[basic[b]] = sol[static_cast<long>(b)];
      }

      bool feasible = true;
      for (std::size_t t = 0; t < n && feasible; ++t) {
        feasible = x[t] >= -kTol && x[t] <= 1.0 + kTol;
      }
      for (std::size_t i = 0; i < m && feasible; ++i) {
        double load = 0.0;
        for (std::size_t t = 0; t < n; ++t) load += inst.entry(t, i) * x[t];
        feasible = load <= budget + kTol * std::max(1.0, budget);
      }
      if (!feasible) continue;

      double value = 0.0;
      for (std::size_t t = 0; t < n; ++t) value += inst.reward(t) * x[t];
      best = std::max(best, value);
    }
  }
  return best;
}

}  // namespace olp
