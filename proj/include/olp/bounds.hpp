#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "olp/instance.hpp"
#include "olp/online.hpp"
#include "olp/pricing.hpp"
#include "olp/rng.hpp"
#include "olp/solver.hpp"

namespace olp {

/// Bernstein tail for sampling s of n values in [0,1] without replacement:
///   Pr(|Y_S - s mu| >= tau) <= 2 exp(-tau^2 / (2 s sigma^2 + tau)).
/// Without sigma^2 the bound uses sigma^2 <= 2 mu:
///   Pr(|Y_S - s mu| >= tau) <= 2 exp(-tau^2 / (4 s mu + tau)).
inline double bernstein_tail_bound(std::size_t s, double mu, std::optional<double> sigma_sq,
                                   double tau) {
  if (s < 1) throw ValidationError("bernstein bound needs s >= 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("mu must lie in [0,1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  if (sigma_sq && !(*sigma_sq >= 0.0 && *sigma_sq <= 1.0)) {
    throw ValidationError("sigma^2 must lie in [0,1]");
  }
  const double sd = static_cast<double>(s);
  const double spread = sigma_sq ? 2.0 * sd * *sigma_sq : 4.0 * sd * mu;
  return 2.0 * std::exp(-(tau * tau) / (spread + tau));
}

/// Skew events of one row for a fixed classification x under random samples
/// S of size s = floor(eps n):
///   minus: a^S_i(x) <= (1-eps) B
///   plus:  a^S_i(x) >= (1-2eps) B
/// A tail bound is attached when the event requires Y_S = sum_{t in S} a^t_i x_t
/// to deviate from its mean s*mu; tau is that deviation,
/// e.g. tau_minus = (s/n)(a_i(x) - (1-eps)B).
struct SkewRow {
  double occupation = 0.0;  // a_i(x)
  double mu = 0.0;
  double sigma_sq = 0.0;
  double freq_minus = 0.0;
  double freq_plus = 0.0;
  std::optional<double> tau_minus;
  std::optional<double> tau_plus;
  double bound_minus = 1.0;            // exact-variance form
  double bound_minus_corollary = 1.0;  // sigma^2 <= 2 mu form
  double bound_plus = 1.0;
  double bound_plus_corollary = 1.0;
};

struct SkewReport {
  std::size_t sample_size = 0;
  std::size_t trials = 0;
  std::vector<SkewRow> rows;
};

/// Three-sigma Monte Carlo allowance for an empirical frequency whose true
/// probability is at most `bound`.
inline double frequency_slack(double bound, std::size_t trials) {
  const double b = std::min(1.0, bound);
  return 3.0 * std::sqrt(b * (1.0 - b) / static_cast<double>(trials));
}

/// True iff every observed frequency stays within its bound plus 3 sigma.
inline bool frequencies_within_bounds(const SkewReport& report, bool corollary) {
  for (const auto& row : report.rows) {
    const double minus = corollary ? row.bound_minus_corollary : row.bound_minus;
    const double plus = corollary ? row.bound_plus_corollary : row.bound_plus;
    if (row.freq_minus > std::min(1.0, minus) + frequency_slack(minus, report.trials)) return false;
    if (row.freq_plus > std::min(1.0, plus) + frequency_slack(plus, report.trials)) return false;
  }
  return true;
}

inline SkewReport skew_frequency(const PackingInstance& inst, const Classification& x,
                                 double epsilon, std::size_t trials, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (x.size() != inst.n()) throw ValidationError("classification has wrong length");
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  const std::size_t s = sample_size(epsilon, n);
  if (s < 1) throw ValidationError("epsilon * n must be at least 1");
  const double budget = inst.budget();
  const double fraction = static_cast<double>(s) / static_cast<double>(n);

  SkewReport report;
  report.sample_size = s;
  report.trials = trials;
  report.rows.resize(m);
  const auto full = occupation(inst, x);
  for (std::size_t i = 0; i < m; ++i) {
    SkewRow& row = report.rows[i];
    row.occupation = full.totals[i];
    row.mu = row.occupation / static_cast<double>(n);
    double var = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double y = x.contains(t) ? inst.entry(t, i) : 0.0;
      var += (y - row.mu) * (y - row.mu);
    }
    row.sigma_sq = var / static_cast<double>(n);

    const double minus_gap = fraction * (row.occupation - (1.0 - epsilon) * budget);
    if (minus_gap > 0.0) {
      row.tau_minus = minus_gap;
      row.bound_minus = bernstein_tail_bound(s, row.mu, row.sigma_sq, minus_gap);
      row.bound_minus_corollary = bernstein_tail_bound(s, row.mu, std::nullopt, minus_gap);
    }
    const double plus_gap = fraction * ((1.0 - 2.0 * epsilon) * budget - row.occupation);
    if (plus_gap > 0.0) {
      row.tau_plus = plus_gap;
      row.bound_plus = bernstein_tail_bound(s, row.mu, row.sigma_sq, plus_gap);
      row.bound_plus_corollary = bernstein_tail_bound(s, row.mu, std::nullopt, plus_gap);
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> minus_hits(m, 0);
  std::vector<std::size_t> plus_hits(m, 0);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto sample = random_subset(n, s, rng);
    const auto occ = occupation(inst, x, sample);
    for (std::size_t i = 0; i < m; ++i) {
      if (occ.totals[i] <= (1.0 - epsilon) * budget) ++minus_hits[i];
      if (occ.totals[i] >= (1.0 - 2.0 * epsilon) * budget) ++plus_hits[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    report.rows[i].freq_minus = static_cast<double>(minus_hits[i]) / static_cast<double>(trials);
    report.rows[i].freq_plus = static_cast<double>(plus_hits[i]) / static_cast<double>(trials);
  }
  return report;
}

struct SampleOptCheck {
  double mean = 0.0;       // Monte Carlo mean of OPT(s)
  double stddev = 0.0;     // sample standard deviation of OPT(s)
  double bound = 0.0;      // (s/n) OPT
  double slack = 0.0;      // 3 * stddev / sqrt(trials)
  bool satisfied = false;  // mean <= bound + slack
};

/// Monte Carlo estimate of E[OPT(s)] over uniform samples of size s, compared
/// with (s/n) OPT.
inline SampleOptCheck expected_sample_opt_check(const PackingInstance& inst, std::size_t s,
                                                std::size_t trials, std::uint64_t seed) {
  require_valid(inst);
  if (s > inst.n()) throw ValidationError("s must not exceed n");
  if (trials < 1) throw ValidationError("trials must be at least 1");
  const double opt = solve(inst).value;
  SampleOptCheck out;
  out.bound = (static_cast<double>(s) / static_cast<double>(inst.n())) * opt;
  if (s == 0) {
    out.satisfied = true;
    return out;
  }
  Rng rng(seed);
  std::vector<double> values(trials);
  for (auto& v : values) {
    const auto sample = random_subset(inst.n(), s, rng);
    v = solve_sample_dual(inst, sample, s, 1.0).value;
  }
  double sum = 0.0;
  for (const double v : values) sum += v;
  out.mean = sum / static_cast<double>(trials);
  if (trials > 1) {
    double sq = 0.0;
    for (const double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(trials - 1));
  }
  out.slack = 3.0 * out.stddev / std::sqrt(static_cast<double>(trials));
  out.satisfied = out.mean <= out.bound + out.slack + kFeasibilityTol * std::max(1.0, opt);
  return out;
}

}  // namespace olp
