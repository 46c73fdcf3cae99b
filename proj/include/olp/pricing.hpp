#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "olp/instance.hpp"
#include "olp/solver.hpp"

namespace olp {

/// 0/1 decision vector over column indices, identified with its support.
struct Classification {
  std::vector<bool> bits;

  std::size_t size() const { return bits.size(); }
  bool contains(std::size_t t) const { return bits[t]; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true)); }

  friend bool operator==(const Classification&, const Classification&) = default;
};

/// Per-row budget occupation of a set of columns.
struct Occupation {
  std::vector<double> totals;

  double max() const { return totals.empty() ? 0.0 : *std::max_element(totals.begin(), totals.end()); }
};

/// Relative threshold below which a reduced cost counts as a tie when
/// classifying the columns an LP was solved on. Reduced costs of basic
/// columns are zero in exact arithmetic but carry rounding noise.
inline constexpr double kTieTolerance = 1e-11;

/// Reduced cost pi_t - p.a^t.
inline double reduced_cost(const PackingInstance& inst, std::span<const double> p, std::size_t t) {
  return inst.reward(t) - dot(p, inst.column(t));
}

/// x(p): selects column t iff pi_t > p.a^t. Ties select 0. With a positive
/// `tie_tolerance`, reduced costs within tie_tolerance * max(1, pi_t) of zero
/// are also treated as ties.
inline Classification classify(const PackingInstance& inst, std::span<const double> p,
                               double tie_tolerance = 0.0) {
  if (p.size() != inst.m()) throw ValidationError("price vector has wrong dimension");
  for (const double v : p) {
    if (!(v >= 0.0)) throw ValidationError("prices must be non-negative");
  }
  Classification x;
  x.bits.resize(inst.n());
  for (std::size_t t = 0; t < inst.n(); ++t) {
    x.bits[t] = reduced_cost(inst, p, t) > tie_tolerance * std::max(1.0, inst.reward(t));
  }
  return x;
}

/// a_i(x) = sum over selected t of a^t_i.
inline Occupation occupation(const PackingInstance& inst, const Classification& x) {
  Occupation occ{std::vector<double>(inst.m(), 0.0)};
  for (std::size_t t = 0; t < inst.n(); ++t) {
    if (!x.bits[t]) continue;
    for (std::size_t i = 0; i < inst.m(); ++i) occ.totals[i] += inst.entry(t, i);
  }
  return occ;
}

/// a^S_i(x) = (1/f) * sum over t in x and S of a^t_i, with f = |S|/n.
inline Occupation occupation(const PackingInstance& inst, const Classification& x,
                             std::span<const std::size_t> sample) {
  if (sample.empty()) throw ValidationError("scaled occupation needs a non-empty sample");
  Occupation occ{std::vector<double>(inst.m(), 0.0)};
  for (const auto t : sample) {
    if (!x.bits.at(t)) continue;
    for (std::size_t i = 0; i < inst.m(); ++i) occ.totals[i] += inst.entry(t, i);
  }
  const double inv_fraction = static_cast<double>(inst.n()) / static_cast<double>(sample.size());
  for (auto& v : occ.totals) v *= inv_fraction;
  return occ;
}

// ---------------------------------------------------------------------------
// Complementary-slackness slack of a sampled classification

inline constexpr double kPricedThreshold = 1e-9;

struct RowSlack {
  double sampled_occupation = 0.0;  // a^S_i(x^S)
  double upper_threshold = 0.0;     // (1 - eps) B
  double lower_threshold = 0.0;     // (1 - 2 eps) B
  double tie_threshold = 0.0;       // (1 - eps) B - m * n / s
  bool priced = false;              // p_i > kPricedThreshold
  bool satisfies_upper = false;     // condition (i)
  bool satisfies_lower = false;     // condition (ii); vacuous when not priced
  bool meets_tie_bound = false;     // occupation >= tie_threshold; vacuous when not priced
};

/// Checks the sampled classification x^S = x(p^S) against the sampled
/// budget, where p^S comes from solve_sample_dual(inst, sample, |S|, 1-eps):
///   (i)  a^S_i(x^S) <= (1-eps) B on every row;
///   (ii) a^S_i(x^S) >= (1-2eps) B on every priced row.
/// Also reports the tie bound (1-eps)B - m*n/s: under general position at most
/// m sampled columns are tied, each losing at most n/s after rescaling.
inline std::vector<RowSlack> cs_slack_report(const PackingInstance& inst,
                                             std::span<const std::size_t> sample, double epsilon,
                                             const OfflineSolution& dual) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0,1)");
  const auto x = classify(inst, dual.p, kTieTolerance);
  const auto occ = occupation(inst, x, sample);
  const double budget = inst.budget();
  const double tie_loss = static_cast<double>(inst.m()) * static_cast<double>(inst.n()) /
                          static_cast<double>(sample.size());
  std::vector<RowSlack> rows(inst.m());
  for (std::size_t i = 0; i < inst.m(); ++i) {
    RowSlack& row = rows[i];
    row.sampled_occupation = occ.totals[i];
    row.upper_threshold = (1.0 - epsilon) * budget;
    row.lower_threshold = (1.0 - 2.0 * epsilon) * budget;
    row.tie_threshold = row.upper_threshold - tie_loss;
    row.priced = dual.p[i] > kPricedThreshold;
    row.satisfies_upper =
        row.sampled_occupation <= row.upper_threshold + kFeasibilityTol * std::max(1.0, budget);
    row.satisfies_lower = !row.priced || row.sampled_occupation >= row.lower_threshold;
    row.meets_tie_bound = !row.priced || row.sampled_occupation >= row.tie_threshold;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Prefix structure within one-dimensional classes

inline constexpr double kDirectionTol = 1e-12;

namespace detail {

inline bool same_direction(std::span<const double> a, std::span<const double> b, double tol) {
  const double na = linf_norm(a);
  const double nb = linf_norm(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] / na - b[i] / nb) > tol) return false;
  }
  return true;
}

inline double size_ratio(const PackingInstance& inst, std::size_t t) {
  return inst.reward(t) / linf_norm(inst.column(t));
}

}  // namespace detail

/// Groups columns by direction a^t / ||a^t||_inf; each group is sorted by
/// pi_t / ||a^t||_inf descending (index ascending on ties). Groups appear in
/// order of their first column.
inline std::vector<std::vector<std::size_t>> partition_by_direction(const PackingInstance& inst,
                                                                    double tol = kDirectionTol) {
  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t t = 0; t < inst.n(); ++t) {
    bool placed = false;
    for (auto& cls : classes) {
      if (detail::same_direction(inst.column(cls.front()), inst.column(t), tol)) {
        cls.push_back(t);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({t});
  }
  for (auto& cls : classes) {
    std::stable_sort(cls.begin(), cls.end(), [&](std::size_t a, std::size_t b) {
      return detail::size_ratio(inst, a) > detail::size_ratio(inst, b);
    });
  }
  return classes;
}

/// Prefix check of an explicit classification against sorted classes.
inline bool check_prefix_property(const Classification& x,
                                  const std::vector<std::vector<std::size_t>>& classes) {
  for (const auto& cls : classes) {
    bool closed = false;
    for (const auto t : cls) {
      if (x.bits.at(t)) {
        if (closed) return false;
      } else {
        closed = true;
      }
    }
  }
  return true;
}

/// True iff, within every class, the columns selected by x(p) form a prefix
/// of the class list. Throws ValidationError when a class mixes directions
/// or is not sorted by reward-to-size ratio.
inline bool check_prefix_property(const PackingInstance& inst,
                                  const std::vector<std::vector<std::size_t>>& classes,
                                  std::span<const double> p) {
  for (const auto& cls : classes) {
    for (std::size_t k = 0; k < cls.size(); ++k) {
      if (cls[k] >= inst.n()) throw ValidationError("class index out of range");
      if (!detail::same_direction(inst.column(cls.front()), inst.column(cls[k]), kDirectionTol)) {
        throw ValidationError("class mixes directions");
      }
      if (k > 0 && detail::size_ratio(inst, cls[k]) > detail::size_ratio(inst, cls[k - 1])) {
        throw ValidationError("class is not sorted by reward-to-size ratio");
      }
    }
  }
  return check_prefix_property(classify(inst, p), classes);
}

}  // namespace olp
