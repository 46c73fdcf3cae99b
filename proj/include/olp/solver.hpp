#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olp/instance.hpp"

namespace olp {

/// Primal-dual optimum of the packing LP
///   max pi.x  s.t.  A x <= B,  0 <= x <= 1
/// and its dual
///   min B*sum(p) + sum(alpha)  s.t.  p.a^t + alpha_t >= pi_t,  p, alpha >= 0.
struct OfflineSolution {
  std::vector<double> x;      // one entry per column of the solved LP
  std::vector<double> p;      // row prices
  std::vector<double> alpha;  // box-constraint duals
  double value = 0.0;
  double budget = 0.0;        // right-hand side the LP was solved with
  std::size_t pivots = 0;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, std::size_t pivots)
      : std::runtime_error(what + " after " + std::to_string(pivots) + " pivots"),
        pivots_(pivots) {}
  struct Preformatted {};
  SolverFailure(const std::string& what, std::size_t pivots, Preformatted)
      : std::runtime_error(what), pivots_(pivots) {}
  std::size_t pivots() const { return pivots_; }

 private:
  std::size_t pivots_;
};

struct SolverOptions {
  double optimality_tol = 1e-11;  // relative to max(1, max reward)
  double pivot_tol = 1e-11;
  std::size_t refactor_every = 64;
  std::size_t bland_after = 0;    // 0: 10 * (n + m)
  std::size_t max_pivots = 0;     // 0: 50 * (n + m) + 1000
};

/// Feasibility and optimality tolerances used to certify solutions.
inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kCertifyTol = 1e-7;

namespace detail {

// Dense revised simplex over  A x + s = b,  0 <= x <= 1,  s >= 0,  b >= 0.
// The slack basis is feasible, so no phase one is needed. Nonbasic
// structurals sit at either bound; the basis inverse is kept explicitly and
// refactorized periodically (m is small).
class BoundedSimplex {
 public:
  BoundedSimplex(const PackingInstance& inst, double budget, const SolverOptions& opts)
      : inst_(inst), n_(inst.n()), m_(inst.m()), budget_(budget), opts_(opts) {
    const std::size_t total = n_ + m_;
    basic_of_row_.resize(m_);
    row_of_.assign(total, -1);
    at_upper_.assign(total, false);
    value_.assign(total, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      basic_of_row_[i] = n_ + i;
      row_of_[n_ + i] = static_cast<long>(i);
      value_[n_ + i] = budget_;
    }
    binv_ = Eigen::MatrixXd::Identity(static_cast<long>(m_), static_cast<long>(m_));
    double scale = 1.0;
    for (std::size_t t = 0; t < n_; ++t) scale = std::max(scale, std::abs(inst_.reward(t)));
    dual_tol_ = opts_.optimality_tol * scale;
    bland_after_ = opts_.bland_after ? opts_.bland_after : 10 * total;
    max_pivots_ = opts_.max_pivots ? opts_.max_pivots : 50 * total + 1000;
  }

  OfflineSolution run() {
    bool fresh = true;
    std::size_t since_refactor = 0;
    Eigen::VectorXd y;
    while (true) {
      if (since_refactor >= opts_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      y = prices();
      const long entering = choose_entering(y);
      if (entering < 0) {
        if (fresh) break;
        // Confirm optimality on a freshly factorized basis.
        refactor();
        since_refactor = 0;
        fresh = true;
        continue;
      }
      pivot(static_cast<std::size_t>(entering));
      ++pivots_;
      ++since_refactor;
      fresh = false;
      if (pivots_ > max_pivots_) throw SolverFailure("simplex iteration limit exceeded", pivots_);
    }
    return extract(y);
  }

 private:
  double cost(std::size_t j) const { return j < n_ ? inst_.reward(j) : 0.0; }
  double upper(std::size_t j) const {
    return j < n_ ? 1.0 : std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd column(std::size_t j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<long>(m_));
    if (j < n_) {
      const auto col = inst_.column(j);
      for (std::size_t i = 0; i < m_; ++i) a[static_cast<long>(i)] = col[i];
    } else {
      a[static_cast<long>(j - n_)] = 1.0;
    }
    return a;
  }

  double priced(std::size_t j, const Eigen::VectorXd& y) const {
    if (j >= n_) return -y[static_cast<long>(j - n_)];
    const auto col = inst_.column(j);
    double py = 0.0;
    for (std::size_t i = 0; i < m_; ++i) py += y[static_cast<long>(i)] * col[i];
    return inst_.reward(j) - py;
  }

  Eigen::VectorXd prices() const {
    Eigen::VectorXd cb(static_cast<long>(m_));
    for (std::size_t r = 0; r < m_; ++r) cb[static_cast<long>(r)] = cost(basic_of_row_[r]);
    return binv_.transpose() * cb;
  }

  // Dantzig's rule (largest violation, lowest index on ties); Bland's rule
  // (lowest eligible index) once the pivot count passes the threshold.
  long choose_entering(const Eigen::VectorXd& y) const {
    const bool bland = pivots_ >= bland_after_;
    long best = -1;
    double best_score = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (row_of_[j] >= 0) continue;
      const double d = priced(j, y);
      const bool eligible = at_upper_[j] ? d < -dual_tol_ : d > dual_tol_;
      if (!eligible) continue;
      if (bland) return static_cast<long>(j);
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = static_cast<long>(j);
      }
    }
    return best;
  }

  void pivot(std::size_t entering) {
    const Eigen::VectorXd w = binv_ * column(entering);
    const double dir = at_upper_[entering] ? -1.0 : 1.0;

    // Ratio test; a bound flip of the entering variable wins ties, then the
    // lowest leaving variable index.
    constexpr double kTieEps = 1e-12;
    double theta = upper(entering);
    long leave_row = -1;
    bool leave_to_upper = false;
    for (std::size_t r = 0; r < m_; ++r) {
      const double wr = w[static_cast<long>(r)];
      if (std::abs(wr) <= opts_.pivot_tol) continue;
      const std::size_t k = basic_of_row_[r];
      const double rate = -dir * wr;
      double limit;
      bool to_upper;
      if (rate < 0.0) {
        limit = std::max(0.0, value_[k]) / -rate;
        to_upper = false;
      } else {
        if (!std::isfinite(upper(k))) continue;
        limit = std::max(0.0, upper(k) - value_[k]) / rate;
        to_upper = true;
      }
      const bool better = limit < theta - kTieEps ||
                          (limit <= theta + kTieEps && leave_row >= 0 &&
                           k < basic_of_row_[static_cast<std::size_t>(leave_row)]);
      if (better) {
        theta = limit;
        leave_row = static_cast<long>(r);
        leave_to_upper = to_upper;
      }
    }
    if (!std::isfinite(theta)) throw SolverFailure("unbounded direction in packing LP", pivots_);

    value_[entering] += dir * theta;
    for (std::size_t r = 0; r < m_; ++r) {
      value_[basic_of_row_[r]] -= dir * theta * w[static_cast<long>(r)];
    }

    if (leave_row < 0) {
      at_upper_[entering] = !at_upper_[entering];
      value_[entering] = at_upper_[entering] ? upper(entering) : 0.0;
      return;
    }

    const auto r = static_cast<std::size_t>(leave_row);
    const std::size_t leaving = basic_of_row_[r];
    row_of_[leaving] = -1;
    at_upper_[leaving] = leave_to_upper;
    value_[leaving] = leave_to_upper ? upper(leaving) : 0.0;
    basic_of_row_[r] = entering;
    row_of_[entering] = leave_row;
    at_upper_[entering] = false;

    const long lr = leave_row;
    const double piv = w[lr];
    binv_.row(lr) /= piv;
    for (long i = 0; i < static_cast<long>(m_); ++i) {
      if (i != lr && w[i] != 0.0) binv_.row(i) -= w[i] * binv_.row(lr);
    }
  }

  void refactor() {
    const auto mm = static_cast<long>(m_);
    Eigen::MatrixXd basis(mm, mm);
    for (std::size_t r = 0; r < m_; ++r) basis.col(static_cast<long>(r)) = column(basic_of_row_[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) throw SolverFailure("singular basis", pivots_);

    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(mm, budget_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (row_of_[j] < 0 && at_upper_[j]) rhs -= column(j);
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (std::size_t r = 0; r < m_; ++r) value_[basic_of_row_[r]] = xb[static_cast<long>(r)];
  }

  OfflineSolution extract(const Eigen::VectorXd& y) const {
    OfflineSolution sol;
    sol.budget = budget_;
    sol.pivots = pivots_;
    sol.x.resize(n_);
    sol.alpha.resize(n_);
    sol.p.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) sol.p[i] = std::max(0.0, y[static_cast<long>(i)]);
    for (std::size_t t = 0; t < n_; ++t) {
      sol.x[t] = std::clamp(value_[t], 0.0, 1.0);
      sol.alpha[t] = std::max(0.0, inst_.reward(t) - dot(sol.p, inst_.column(t)));
      sol.value += inst_.reward(t) * sol.x[t];
    }
    return sol;
  }

  const PackingInstance& inst_;
  std::size_t n_;
  std::size_t m_;
  double budget_;
  SolverOptions opts_;
  double dual_tol_ = 0.0;
  std::size_t bland_after_ = 0;
  std::size_t max_pivots_ = 0;
  std::size_t pivots_ = 0;

  std::vector<std::size_t> basic_of_row_;
  std::vector<long> row_of_;
  std::vector<bool> at_upper_;
  std::vector<double> value_;
  Eigen::MatrixXd binv_;
};

}  // namespace detail

/// Checks primal/dual feasibility, strong duality and complementary
/// slackness of `sol` against `inst` with right-hand side `sol.budget`.
/// Returns a description of the first failed condition.
inline std::optional<std::string> certify(const PackingInstance& inst, const OfflineSolution& sol,
                                          double tol = kCertifyTol) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  if (sol.x.size() != n || sol.alpha.size() != n || sol.p.size() != m) {
    return "solution dimensions do not match instance";
  }
  const double budget = sol.budget;
  std::vector<double> load(m, 0.0);
  double value = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (sol.x[t] < 0.0 || sol.x[t] > 1.0) return "x out of [0,1] at " + std::to_string(t);
    if (sol.alpha[t] < 0.0) return "negative alpha at " + std::to_string(t);
    value += inst.reward(t) * sol.x[t];
    for (std::size_t i = 0; i < m; ++i) load[i] += inst.entry(t, i) * sol.x[t];
  }
  const double scale = std::max(1.0, budget);
  for (std::size_t i = 0; i < m; ++i) {
    if (sol.p[i] < 0.0) return "negative price on row " + std::to_string(i);
    if (load[i] > budget + kFeasibilityTol * scale) return "row " + std::to_string(i) + " overfull";
  }
  double dual = 0.0;
  for (const double pi : sol.p) dual += budget * pi;
  for (std::size_t t = 0; t < n; ++t) {
    dual += sol.alpha[t];
    const double lhs = dot(sol.p, inst.column(t)) + sol.alpha[t];
    if (lhs < inst.reward(t) - kFeasibilityTol * std::max(1.0, inst.reward(t))) {
      return "dual constraint violated at " + std::to_string(t);
    }
    if (sol.x[t] > tol && lhs > inst.reward(t) + tol * std::max(1.0, inst.reward(t))) {
      return "complementary slackness violated at column " + std::to_string(t);
    }
  }
  if (std::abs(value - sol.value) > tol * std::max(1.0, std::abs(value))) {
    return "reported value does not match x";
  }
  if (std::abs(value - dual) > tol * std::max(1.0, std::abs(value))) {
    return "duality gap " + std::to_string(std::abs(value - dual));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (sol.p[i] > tol && load[i] < budget - tol * scale) {
      return "row " + std::to_string(i) + " priced but not tight";
    }
  }
  return std::nullopt;
}

namespace detail {

inline OfflineSolution solve_unchecked(const PackingInstance& inst, double budget,
                                       const SolverOptions& opts) {
  BoundedSimplex simplex(inst, budget, opts);
  OfflineSolution sol = simplex.run();
  if (auto problem = certify(inst, sol)) {
    throw SolverFailure("solution failed certification: " + *problem, sol.pivots);
  }
  return sol;
}

}  // namespace detail

/// Solves the offline LP exactly. The effective right-hand side is
/// `budget_override` when given, the instance budget otherwise. Deterministic
/// for a fixed input.
inline OfflineSolution solve(const PackingInstance& inst,
                             std::optional<double> budget_override = std::nullopt,
                             const SolverOptions& opts = {}) {
  require_valid(inst);
  const double budget = budget_override.value_or(inst.budget());
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ValidationError("budget must be positive");
  return detail::solve_unchecked(inst, budget, opts);
}

/// Right-hand side of the sampled program on s of n columns.
inline double sample_budget(const PackingInstance& inst, std::size_t s, double delta_scale) {
  return (static_cast<double>(s) / static_cast<double>(inst.n())) * delta_scale * inst.budget();
}

/// Solves the LP restricted to `sample` with right-hand side
/// (s/n) * delta_scale * B. Entries of x and alpha follow the order of
/// `sample`.
inline OfflineSolution solve_sample_dual(const PackingInstance& inst,
                                         std::span<const std::size_t> sample, std::size_t s,
                                         double delta_scale, const SolverOptions& opts = {}) {
  if (sample.size() != s || s > inst.n()) {
    throw ValidationError("sample must contain exactly s <= n indices");
  }
  if (!(delta_scale > 0.0 && delta_scale <= 1.0)) {
    throw ValidationError("delta_scale must lie in (0, 1]");
  }
  for (const auto t : sample) {
    if (t >= inst.n()) throw ValidationError("sample index out of range");
  }
  const double budget = sample_budget(inst, s, delta_scale);
  if (s == 0) {
    OfflineSolution empty;
    empty.p.assign(inst.m(), 0.0);
    empty.budget = budget;
    return empty;
  }
  const PackingInstance sub = inst.restrict_to(sample, budget);
  return detail::solve_unchecked(sub, budget, opts);
}

}  // namespace olp
