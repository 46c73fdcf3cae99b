#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "olp/rng.hpp"

namespace olp {

/// Raised when an instance or a parameter violates its documented domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Offline packing LP
///
///   max  sum_t rewards[t] * x_t
///   s.t. sum_t column(t) * x_t <= budget   (componentwise, m rows)
///        0 <= x_t <= 1
///
/// Columns are stored contiguously, column t occupying entries [t*m, (t+1)*m).
/// Construction does not check the model assumptions; call validate().
class PackingInstance {
 public:
  PackingInstance() = default;

  PackingInstance(std::vector<double> rewards, std::vector<double> flat_columns, std::size_t m,
                  double budget)
      : m_(m), budget_(budget), rewards_(std::move(rewards)), entries_(std::move(flat_columns)) {
    if (m_ == 0 || entries_.size() != rewards_.size() * m_) {
      throw ValidationError("column storage does not match n*m");
    }
  }

  PackingInstance(std::vector<double> rewards, const std::vector<std::vector<double>>& columns,
                  double budget)
      : budget_(budget), rewards_(std::move(rewards)) {
    if (columns.size() != rewards_.size()) {
      throw ValidationError("rewards and columns differ in length");
    }
    m_ = columns.empty() ? 0 : columns.front().size();
    entries_.reserve(columns.size() * m_);
    for (std::size_t t = 0; t < columns.size(); ++t) {
      if (columns[t].size() != m_) {
        throw ValidationError("column " + std::to_string(t) + " has wrong dimension");
      }
      entries_.insert(entries_.end(), columns[t].begin(), columns[t].end());
    }
  }

  std::size_t n() const { return rewards_.size(); }
  std::size_t m() const { return m_; }
  double budget() const { return budget_; }
  double reward(std::size_t t) const { return rewards_[t]; }
  std::span<const double> rewards() const { return rewards_; }
  std::span<const double> column(std::size_t t) const {
    return {entries_.data() + t * m_, m_};
  }
  double entry(std::size_t t, std::size_t i) const { return entries_[t * m_ + i]; }
  std::span<const double> flat_columns() const { return entries_; }

  PackingInstance with_budget(double budget) const {
    PackingInstance copy = *this;
    copy.budget_ = budget;
    return copy;
  }

  PackingInstance with_rewards(std::vector<double> rewards) const {
    if (rewards.size() != n()) throw ValidationError("reward vector has wrong length");
    PackingInstance copy = *this;
    copy.rewards_ = std::move(rewards);
    return copy;
  }

  /// Sub-instance formed by the given columns (in the given order).
  PackingInstance restrict_to(std::span<const std::size_t> indices, double budget) const {
    std::vector<double> rewards;
    std::vector<double> entries;
    rewards.reserve(indices.size());
    entries.reserve(indices.size() * m_);
    for (const auto t : indices) {
      rewards.push_back(rewards_.at(t));
      const auto col = column(t);
      entries.insert(entries.end(), col.begin(), col.end());
    }
    return PackingInstance(std::move(rewards), std::move(entries), m_, budget);
  }

  friend bool operator==(const PackingInstance&, const PackingInstance&) = default;

 private:
  std::size_t m_ = 0;
  double budget_ = 0.0;
  std::vector<double> rewards_;
  std::vector<double> entries_;
};

inline double linf_norm(std::span<const double> v) {
  double best = 0.0;
  for (const double x : v) best = std::max(best, std::abs(x));
  return best;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

/// Checks the model assumptions. Returns std::nullopt when the instance is
/// legal, otherwise a description of the first violation found.
inline std::optional<std::string> validate(const PackingInstance& inst) {
  if (inst.n() == 0) return "instance has no columns";
  if (inst.m() == 0) return "instance has no rows";
  if (!std::isfinite(inst.budget()) || inst.budget() <= 0.0) return "budget must be positive";
  for (std::size_t t = 0; t < inst.n(); ++t) {
    const double r = inst.reward(t);
    if (!std::isfinite(r) || r < 0.0) {
      return "reward " + std::to_string(t) + " is negative or not finite";
    }
    bool any_positive = false;
    for (std::size_t i = 0; i < inst.m(); ++i) {
      const double a = inst.entry(t, i);
      if (!(a >= 0.0 && a <= 1.0)) {
        return "column " + std::to_string(t) + " row " + std::to_string(i) +
               ": entry out of [0,1]";
      }
      any_positive = any_positive || a > 0.0;
    }
    if (!any_positive) return "column " + std::to_string(t) + " is zero";
  }
  return std::nullopt;
}

inline void require_valid(const PackingInstance& inst) {
  if (auto violation = validate(inst)) throw ValidationError(*violation);
}

/// Rescales rows so every row shares the smallest right-hand side.
/// Row i is multiplied by min_j rhs_j / rhs_i; entries that leave [0,1] after
/// scaling are rejected rather than clipped.
inline PackingInstance normalize_budgets(std::vector<double> rewards,
                                         const std::vector<std::vector<double>>& columns,
                                         std::span<const double> rhs) {
  if (rhs.empty()) throw ValidationError("rhs is empty");
  for (const double b : rhs) {
    if (!std::isfinite(b) || b <= 0.0) throw ValidationError("rhs entries must be positive");
  }
  const double common = *std::min_element(rhs.begin(), rhs.end());
  std::vector<std::vector<double>> scaled = columns;
  for (std::size_t t = 0; t < scaled.size(); ++t) {
    if (scaled[t].size() != rhs.size()) {
      throw ValidationError("column " + std::to_string(t) + " has wrong dimension");
    }
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      const double v = scaled[t][i] * (common / rhs[i]);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("column " + std::to_string(t) + " row " + std::to_string(i) +
                              ": scaled entry out of [0,1]");
      }
      scaled[t][i] = v;
    }
  }
  PackingInstance out(std::move(rewards), scaled, common);
  require_valid(out);
  return out;
}

inline constexpr double kDefaultGeneralPositionNoise = 1e-9;

/// Adds independent uniform noise from [0, magnitude] to every reward so that
/// no price vector is tight for more than m columns (almost surely).
inline PackingInstance ensure_general_position(const PackingInstance& inst, double magnitude,
                                               std::uint64_t seed) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw ValidationError("general-position magnitude must be a finite non-negative number");
  }
  if (magnitude == 0.0) return inst;
  Rng rng(seed);
  std::vector<double> rewards(inst.rewards().begin(), inst.rewards().end());
  for (auto& r : rewards) r += magnitude * rng.uniform01();
  return inst.with_rewards(std::move(rewards));
}

// ---------------------------------------------------------------------------
// Generators

enum class Family { Uniform, KSubspace, Arc, Knapsack, Correlated };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Uniform: return "uniform";
    case Family::KSubspace: return "k-subspace";
    case Family::Arc: return "arc";
    case Family::Knapsack: return "knapsack";
    case Family::Correlated: return "correlated";
  }
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  for (const auto f : {Family::Uniform, Family::KSubspace, Family::Arc, Family::Knapsack,
                       Family::Correlated}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown instance family '" + std::string(name) + "'");
}

struct GeneratorSpec {
  Family family = Family::Uniform;
  std::size_t subspaces = 4;           // K, k-subspace family
  std::optional<double> arc_step;      // delta of the arc family; default pi/(4n)
  double reward_lo = 0.0;              // rewards drawn from (reward_lo, reward_hi]
  double reward_hi = 1.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double draw_reward(const GeneratorSpec& spec, Rng& rng) {
  return spec.reward_lo + (spec.reward_hi - spec.reward_lo) * rng.uniform_open_closed();
}

}  // namespace detail

/// Angular step used by the arc family when none is given; keeps the whole
/// arc inside the first quadrant.
inline double default_arc_step(std::size_t n) {
  return std::numbers::pi / (4.0 * static_cast<double>(std::max<std::size_t>(n, 1)));
}

/// Deterministic instance generator. The same (spec, n, m, budget) always
/// produces a bit-identical instance.
///
///  - uniform:     rewards and entries i.i.d. on (0,1]
///  - k-subspace:  K random directions (l_inf norm 1); each column is a random
///                 scalar in (0,1] times one of them
///  - arc:         m = 2, column t = (sin(pi/4 + step*t), cos(pi/4 + step*t)),
///                 reward 1
///  - knapsack:    m = 1, every column is (1), random rewards
///  - correlated:  uniform columns, reward = mean entry times a factor in
///                 (0.9, 1.1], so reward-to-size ratios are nearly equal
inline PackingInstance generate(const GeneratorSpec& spec, std::size_t n, std::size_t m,
                                double budget) {
  if (n == 0 || m == 0) throw ValidationError("n and m must be at least 1");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ValidationError("budget must be positive");
  if (!(spec.reward_lo >= 0.0 && spec.reward_lo < spec.reward_hi) ||
      !std::isfinite(spec.reward_hi)) {
    throw ValidationError("reward range must satisfy 0 <= lo < hi");
  }

  Rng rng(spec.seed);
  std::vector<double> rewards(n);
  std::vector<double> entries(n * m);

  switch (spec.family) {
    case Family::Uniform:
      for (std::size_t t = 0; t < n; ++t) {
        rewards[t] = detail::draw_reward(spec, rng);
        for (std::size_t i = 0; i < m; ++i) entries[t * m + i] = rng.uniform_open_closed();
      }
      break;

    case Family::KSubspace: {
      if (spec.subspaces < 1) throw ValidationError("k-subspace family needs K >= 1");
      std::vector<std::vector<double>> directions(spec.subspaces, std::vector<double>(m));
      for (auto& d : directions) {
        for (auto& v : d) v = rng.uniform_open_closed();
        const double norm = linf_norm(d);
        for (auto& v : d) v /= norm;
      }
      for (std::size_t t = 0; t < n; ++t) {
        rewards[t] = detail::draw_reward(spec, rng);
        const auto& d = directions[rng.below(spec.subspaces)];
        const double scale = rng.uniform_open_closed();
        for (std::size_t i = 0; i < m; ++i) entries[t * m + i] = scale * d[i];
      }
      break;
    }

    case Family::Arc: {
      if (m != 2) throw ValidationError("arc family requires m = 2");
      const double step = spec.arc_step.value_or(default_arc_step(n));
      if (!(step >= 0.0) || step * static_cast<double>(n - 1) > std::numbers::pi / 4.0) {
        throw ValidationError("arc step must keep pi/4 + step*(n-1) within [pi/4, pi/2]");
      }
      for (std::size_t t = 0; t < n; ++t) {
        const double angle = std::numbers::pi / 4.0 + step * static_cast<double>(t);
        rewards[t] = 1.0;
        entries[t * 2] = std::sin(angle);
        entries[t * 2 + 1] = std::max(0.0, std::cos(angle));
      }
      break;
    }

    case Family::Knapsack:
      if (m != 1) throw ValidationError("knapsack family requires m = 1");
      for (std::size_t t = 0; t < n; ++t) {
        rewards[t] = detail::draw_reward(spec, rng);
        entries[t] = 1.0;
      }
      break;

    case Family::Correlated:
      for (std::size_t t = 0; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          entries[t * m + i] = rng.uniform_open_closed();
          sum += entries[t * m + i];
        }
        rewards[t] = (sum / static_cast<double>(m)) * (0.9 + 0.2 * rng.uniform_open_closed());
      }
      break;
  }
  return PackingInstance(std::move(rewards), std::move(entries), m, budget);
}

}  // namespace olp
