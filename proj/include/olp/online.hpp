#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "olp/instance.hpp"
#include "olp/perturb.hpp"
#include "olp/pricing.hpp"
#include "olp/solver.hpp"

namespace olp {

enum class HaltMode {
  Halt,  // stop for good at the first column that does not fit
  Skip,  // reject the column and keep going
};

inline std::string_view to_string(HaltMode mode) { return mode == HaltMode::Halt ? "halt" : "skip"; }

inline HaltMode parse_halt_mode(std::string_view name) {
  if (name == "halt") return HaltMode::Halt;
  if (name == "skip") return HaltMode::Skip;
  throw ValidationError("unknown halt mode '" + std::string(name) + "'");
}

inline bool is_permutation_of(std::span<const std::size_t> order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (const auto t : order) {
    if (t >= n || seen[t]) return false;
    seen[t] = true;
  }
  return true;
}

/// Presents the columns of an instance one at a time in a fixed order.
/// Each arrival must be decided before the next column is revealed, and
/// decisions are final.
class PermutationStream {
 public:
  PermutationStream(const PackingInstance& inst, std::span<const std::size_t> order)
      : inst_(&inst), order_(order.begin(), order.end()) {
    if (!is_permutation_of(order_, inst.n())) {
      throw ValidationError("arrival order is not a permutation of the columns");
    }
    decisions_.reserve(order_.size());
  }

  const PackingInstance& instance() const { return *inst_; }
  std::size_t size() const { return order_.size(); }
  /// Number of arrivals decided so far.
  std::size_t position() const { return decisions_.size(); }
  bool done() const { return position() == size() && !pending_; }

  /// Reveals the next column and returns its index.
  std::size_t arrive() {
    if (pending_) throw std::logic_error("previous arrival has not been decided");
    if (position() == size()) throw std::logic_error("stream exhausted");
    pending_ = true;
    return order_[position()];
  }

  void decide(bool accept) {
    if (!pending_) throw std::logic_error("no pending arrival to decide");
    decisions_.push_back(accept);
    pending_ = false;
  }

  /// Columns observed and decided so far, in arrival order.
  std::span<const std::size_t> observed() const { return {order_.data(), position()}; }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<bool>& decisions() const { return decisions_; }

 private:
  const PackingInstance* inst_;
  std::vector<std::size_t> order_;
  std::vector<bool> decisions_;
  bool pending_ = false;
};

/// One pricing phase: prices learned from the first `sample_size` arrivals
/// applied to arrival positions [window_begin, window_end).
struct StageRecord {
  std::size_t sample_size = 0;
  double delta = 0.0;          // sampled right-hand side scaled by (1 - delta)
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  double cap = 0.0;            // occupation limit within the window
  std::vector<double> p;
  std::optional<std::size_t> halted_at;  // arrival position of the halt
};

struct OnlineRunTrace {
  std::string algorithm;
  std::size_t m = 0;
  std::vector<std::size_t> order;
  std::vector<bool> decisions;               // arrival order
  std::vector<double> occupation_history;    // m entries per arrival, original columns
  std::vector<StageRecord> stages;
  std::optional<std::size_t> halted_at;      // permanent halt position (OTP variants)
  double value = 0.0;
  double budget = 0.0;                       // original budget used for scoring
  std::vector<double> final_occupation;
  bool feasible = true;

  std::size_t n() const { return decisions.size(); }
  std::size_t halt_position() const { return halted_at.value_or(decisions.size()); }
  std::span<const double> occupation_after(std::size_t position) const {
    return {occupation_history.data() + position * m, m};
  }
  /// Column indices accepted, in arrival order.
  std::vector<std::size_t> accepted() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      if (decisions[k]) out.push_back(order[k]);
    }
    return out;
  }
};

/// floor(eps * n), tolerant to representation error (0.1 * 30 -> 3).
inline std::size_t sample_size(double epsilon, std::size_t n) {
  return static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(n) + 1e-9));
}

namespace detail {

/// Scores a finished stream against the original instance.
inline OnlineRunTrace score(std::string algorithm, const PackingInstance& original,
                            const PermutationStream& stream) {
  OnlineRunTrace trace;
  trace.algorithm = std::move(algorithm);
  trace.m = original.m();
  trace.order = stream.order();
  trace.decisions = stream.decisions();
  trace.budget = original.budget();
  const std::size_t m = original.m();
  std::vector<double> occ(m, 0.0);
  trace.occupation_history.reserve(trace.decisions.size() * m);
  const double limit = original.budget() + kFeasibilityTol * std::max(1.0, original.budget());
  for (std::size_t k = 0; k < trace.decisions.size(); ++k) {
    if (trace.decisions[k]) {
      const std::size_t t = trace.order[k];
      trace.value += original.reward(t);
      const auto col = original.column(t);
      for (std::size_t i = 0; i < m; ++i) {
        occ[i] += col[i];
        if (occ[i] > limit) trace.feasible = false;
      }
    }
    trace.occupation_history.insert(trace.occupation_history.end(), occ.begin(), occ.end());
  }
  trace.final_occupation = std::move(occ);
  return trace;
}

inline bool fits(std::span<const double> load, std::span<const double> col, double cap) {
  for (std::size_t i = 0; i < load.size(); ++i) {
    if (load[i] + col[i] > cap) return false;
  }
  return true;
}

inline void add_to(std::vector<double>& load, std::span<const double> col) {
  for (std::size_t i = 0; i < load.size(); ++i) load[i] += col[i];
}

inline void require_epsilon_open(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0,1)");
}

/// OTP on `inst` (original or perturbed) through `stream`.
inline StageRecord otp_core(const PackingInstance& inst, double epsilon, PermutationStream& stream,
                            HaltMode mode) {
  const std::size_t n = inst.n();
  const std::size_t s = sample_size(epsilon, n);
  if (s < 1) throw ValidationError("epsilon * n must be at least 1");

  StageRecord stage;
  stage.sample_size = s;
  stage.delta = epsilon;
  stage.window_begin = s;
  stage.window_end = n;
  stage.cap = inst.budget();
  stage.p.assign(inst.m(), 0.0);

  while (stream.position() < s) {
    stream.arrive();
    stream.decide(false);
  }
  if (s == n) return stage;

  const auto dual = solve_sample_dual(inst, stream.observed(), s, 1.0 - epsilon);
  stage.p = dual.p;

  std::vector<double> load(inst.m(), 0.0);
  bool halted = false;
  while (stream.position() < n) {
    const std::size_t position = stream.position();
    const std::size_t t = stream.arrive();
    if (halted || !(reduced_cost(inst, stage.p, t) > 0.0)) {
      stream.decide(false);
      continue;
    }
    const auto col = inst.column(t);
    if (fits(load, col, stage.cap)) {
      add_to(load, col);
      stream.decide(true);
    } else {
      stream.decide(false);
      if (mode == HaltMode::Halt) {
        halted = true;
        stage.halted_at = position;
      }
    }
  }
  return stage;
}

}  // namespace detail

/// One-time pricing: reject the first floor(eps*n) arrivals, price them with
/// the (s, 1-eps) sampled dual, then accept every later column with positive
/// reduced cost until the first one that would overfill a row. In halt mode
/// that column and everything after it is rejected.
inline OnlineRunTrace run_otp(const PackingInstance& inst, double epsilon,
                              std::span<const std::size_t> order, HaltMode mode = HaltMode::Halt) {
  require_valid(inst);
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
  PermutationStream stream(inst, order);
  StageRecord stage = detail::otp_core(inst, epsilon, stream, mode);
  OnlineRunTrace trace = detail::score("otp", inst, stream);
  trace.halted_at = stage.halted_at;
  trace.stages.push_back(std::move(stage));
  return trace;
}

/// (s, delta)-OTP stage. The stream must sit right after its s-th arrival.
/// Prices come from the (s, 1-delta) sampled dual of the first s arrivals and
/// are applied to arrivals s+1 .. min(2s, n) while the stage occupation stays
/// within (s/n) * B on every row; the first column that would exceed it ends
/// the stage.
inline StageRecord run_sdotp_stage(const PackingInstance& inst, std::size_t s, double delta,
                                   PermutationStream& stream) {
  const std::size_t n = inst.n();
  if (s < 1 || s > n) throw ValidationError("stage sample size must lie in [1, n]");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("stage delta must lie in (0,1)");
  if (stream.position() != s) throw std::logic_error("stream is not positioned after s arrivals");

  StageRecord stage;
  stage.sample_size = s;
  stage.delta = delta;
  stage.window_begin = s;
  stage.window_end = std::min(2 * s, n);
  stage.cap = (static_cast<double>(s) / static_cast<double>(n)) * inst.budget();
  stage.p = solve_sample_dual(inst, stream.observed(), s, 1.0 - delta).p;

  std::vector<double> load(inst.m(), 0.0);
  bool halted = false;
  while (stream.position() < stage.window_end) {
    const std::size_t position = stream.position();
    const std::size_t t = stream.arrive();
    if (halted || !(reduced_cost(inst, stage.p, t) > 0.0)) {
      stream.decide(false);
      continue;
    }
    const auto col = inst.column(t);
    if (detail::fits(load, col, stage.cap)) {
      detail::add_to(load, col);
      stream.decide(true);
    } else {
      stream.decide(false);
      halted = true;
      stage.halted_at = position;
    }
  }
  return stage;
}

/// Standalone (s, delta)-OTP run: sample phase, one stage, remaining
/// arrivals rejected.
inline OnlineRunTrace run_sdotp(const PackingInstance& inst, std::size_t s, double delta,
                                std::span<const std::size_t> order) {
  require_valid(inst);
  PermutationStream stream(inst, order);
  while (stream.position() < std::min(s, inst.n())) {
    stream.arrive();
    stream.decide(false);
  }
  StageRecord stage = run_sdotp_stage(inst, s, delta, stream);
  while (stream.position() < inst.n()) {
    stream.arrive();
    stream.decide(false);
  }
  OnlineRunTrace trace = detail::score("sdotp", inst, stream);
  trace.stages.push_back(std::move(stage));
  return trace;
}

/// OTP run on snapped columns with budget (1-eps)B; decisions are scored on
/// the original columns and budget.
inline OnlineRunTrace run_robust_otp(const PackingInstance& inst, double epsilon,
                                     std::span<const std::size_t> order,
                                     HaltMode mode = HaltMode::Halt,
                                     std::size_t net_cap = kDefaultNetCap) {
  require_valid(inst);
  detail::require_epsilon_open(epsilon);
  const auto perturbed = perturb_instance(inst, epsilon, net_cap);
  PermutationStream stream(perturbed.instance, order);
  StageRecord stage = detail::otp_core(perturbed.instance, epsilon, stream, mode);
  OnlineRunTrace trace = detail::score("robust-otp", inst, stream);
  trace.halted_at = stage.halted_at;
  trace.stages.push_back(std::move(stage));
  return trace;
}

struct StagePlan {
  std::size_t sample_size;
  double delta;
  std::size_t window_begin;
  std::size_t window_end;
};

/// Stage schedule of Robust DPA: for i = 0 .. r-1 with r = floor(log2(1/eps)),
/// s_i = floor(eps 2^i n), delta_i = sqrt(eps / 2^i), window [s_i, min(2 s_i, n)).
inline std::vector<StagePlan> dpa_schedule(std::size_t n, double epsilon) {
  detail::require_epsilon_open(epsilon);
  std::size_t stages = 0;
  while (epsilon * std::ldexp(1.0, static_cast<int>(stages + 1)) <= 1.0 + 1e-12) ++stages;
  std::vector<StagePlan> plan;
  for (std::size_t i = 0; i < stages; ++i) {
    const double scale = std::ldexp(1.0, static_cast<int>(i));
    const std::size_t s = sample_size(epsilon * scale, n);
    if (s < 1) throw ValidationError("epsilon * n must be at least 1");
    if (s >= n) break;
    plan.push_back({s, std::sqrt(epsilon / scale), s, std::min(2 * s, n)});
  }
  return plan;
}

/// Robust DPA: snap columns, budget (1-eps)B, then run the (s_i, delta_i)-OTP
/// stages of dpa_schedule; the solution is the union of the stage solutions.
/// Arrivals outside every stage window are rejected.
inline OnlineRunTrace run_robust_dpa(const PackingInstance& inst, double epsilon,
                                     std::span<const std::size_t> order,
                                     std::size_t net_cap = kDefaultNetCap) {
  require_valid(inst);
  detail::require_epsilon_open(epsilon);
  if (sample_size(epsilon, inst.n()) < 1) throw ValidationError("epsilon * n must be at least 1");
  const auto plan = dpa_schedule(inst.n(), epsilon);
  const auto perturbed = perturb_instance(inst, epsilon, net_cap);
  PermutationStream stream(perturbed.instance, order);

  std::vector<StageRecord> stages;
  for (const auto& step : plan) {
    while (stream.position() < step.sample_size) {
      stream.arrive();
      stream.decide(false);
    }
    stages.push_back(run_sdotp_stage(perturbed.instance, step.sample_size, step.delta, stream));
  }
  while (stream.position() < inst.n()) {
    stream.arrive();
    stream.decide(false);
  }
  OnlineRunTrace trace = detail::score("robust-dpa", inst, stream);
  trace.stages = std::move(stages);
  return trace;
}

/// Accepts each arrival iff it fits the remaining budget.
inline OnlineRunTrace run_greedy_baseline(const PackingInstance& inst,
                                          std::span<const std::size_t> order) {
  require_valid(inst);
  PermutationStream stream(inst, order);
  std::vector<double> load(inst.m(), 0.0);
  while (stream.position() < inst.n()) {
    const auto col = inst.column(stream.arrive());
    const bool accept = detail::fits(load, col, inst.budget());
    if (accept) detail::add_to(load, col);
    stream.decide(accept);
  }
  return detail::score("greedy", inst, stream);
}

}  // namespace olp
