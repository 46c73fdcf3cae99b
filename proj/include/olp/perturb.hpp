#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "olp/instance.hpp"

namespace olp {

inline constexpr std::size_t kDefaultNetCap = 10'000'000;

class NetTooLarge : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Grid vectors in {0, 1/G, ..., 1}^m with l_inf norm exactly 1, where
/// G = 1/delta. Directions are held as integer grid coordinates in
/// lexicographic order; coordinate k stands for k/G.
class DeltaNet {
 public:
  DeltaNet(std::size_t m, std::uint32_t grid, std::size_t cap = kDefaultNetCap)
      : m_(m), grid_(grid) {
    if (m == 0 || grid == 0) throw ValidationError("delta net needs m >= 1 and G >= 1");
    const double predicted = closed_form_size(m, grid);
    if (predicted > static_cast<double>(cap)) {
      throw NetTooLarge("delta net would hold " + std::to_string(predicted) +
                        " directions, above the cap of " + std::to_string(cap));
    }
    std::vector<std::uint32_t> cursor(m, 0);
    while (true) {
      bool has_top = false;
      for (const auto k : cursor) has_top = has_top || k == grid;
      if (has_top) codes_.insert(codes_.end(), cursor.begin(), cursor.end());
      std::size_t pos = m;
      while (pos > 0 && cursor[pos - 1] == grid) cursor[--pos] = 0;
      if (pos == 0) break;
      ++cursor[pos - 1];
    }
  }

  std::size_t m() const { return m_; }
  std::uint32_t grid() const { return grid_; }
  double delta() const { return 1.0 / static_cast<double>(grid_); }
  std::size_t size() const { return codes_.size() / m_; }

  std::span<const std::uint32_t> code(std::size_t k) const {
    return {codes_.data() + k * m_, m_};
  }

  std::vector<double> direction(std::size_t k) const {
    std::vector<double> q(m_);
    const auto c = code(k);
    for (std::size_t i = 0; i < m_; ++i) q[i] = coordinate(c[i]);
    return q;
  }

  double coordinate(std::uint32_t k) const {
    return static_cast<double>(k) / static_cast<double>(grid_);
  }

  /// (G+1)^m - G^m
  static double closed_form_size(std::size_t m, std::uint32_t grid) {
    const double g = grid;
    return std::pow(g + 1.0, static_cast<double>(m)) - std::pow(g, static_cast<double>(m));
  }

 private:
  std::size_t m_;
  std::uint32_t grid_;
  std::vector<std::uint32_t> codes_;
};

/// Grid resolution G = ceil((m+1)/eps), so delta = 1/G <= eps/(m+1).
inline std::uint32_t net_grid_for(std::size_t m, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in (0,1]");
  const double ratio = static_cast<double>(m + 1) / epsilon;
  // Absorb representation error, e.g. 3 / 0.1 = 30.000000000000004.
  const double grid = std::ceil(ratio * (1.0 - 1e-12));
  if (grid > 4.0e9) throw NetTooLarge("delta net resolution too fine");
  return static_cast<std::uint32_t>(grid);
}

inline DeltaNet build_delta_net(std::size_t m, double epsilon, std::size_t cap = kDefaultNetCap) {
  if (m == 0) throw ValidationError("m must be at least 1");
  return DeltaNet(m, net_grid_for(m, epsilon), cap);
}

struct SnappedColumn {
  std::vector<std::uint32_t> code;  // grid coordinates of q
  std::vector<double> q;            // direction in the net
  std::vector<double> a_tilde;      // ||a||_inf * q
};

/// Snaps a nonzero column onto the net: q is the l_inf-nearest direction to
/// a / ||a||_inf (lexicographically smallest among ties) and
/// a_tilde = ||a||_inf * q.
///
/// The nearest distance D is the largest per-coordinate rounding error; the
/// lexicographically smallest minimizer takes, per coordinate, the smallest
/// grid value within D. Coordinates equal to 1 stay at G because D <= 1/(2G),
/// so the result always has norm 1.
inline SnappedColumn snap_column(const DeltaNet& net, std::span<const double> a) {
  if (a.size() != net.m()) throw ValidationError("column dimension differs from net");
  const double norm = linf_norm(a);
  if (!(norm > 0.0)) throw ValidationError("cannot snap a zero column");
  const double g = net.grid();
  const std::size_t m = net.m();

  std::vector<double> scaled(m);
  double distance = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    scaled[i] = (a[i] / norm) * g;
    const double nearest = std::min(g, std::max(0.0, std::nearbyint(scaled[i])));
    distance = std::max(distance, std::abs(scaled[i] - nearest));
  }

  SnappedColumn out;
  out.code.resize(m);
  out.q.resize(m);
  out.a_tilde.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double k = std::floor(scaled[i]);
    if (scaled[i] - k > distance) k += 1.0;
    k = std::min(g, std::max(0.0, k));
    out.code[i] = static_cast<std::uint32_t>(k);
    out.q[i] = net.coordinate(out.code[i]);
    out.a_tilde[i] = norm * out.q[i];
  }
  return out;
}

struct PerturbedInstance {
  PackingInstance instance;  // columns a_tilde, budget (1 - eps) B
  DeltaNet net;
};

/// Replaces every column by its snapped version and scales the budget by
/// (1 - eps). Rewards are unchanged.
inline PerturbedInstance perturb_instance(const PackingInstance& inst, double epsilon,
                                          std::size_t cap = kDefaultNetCap) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0,1)");
  DeltaNet net = build_delta_net(inst.m(), epsilon, cap);
  std::vector<double> entries;
  entries.reserve(inst.n() * inst.m());
  for (std::size_t t = 0; t < inst.n(); ++t) {
    const auto snapped = snap_column(net, inst.column(t));
    entries.insert(entries.end(), snapped.a_tilde.begin(), snapped.a_tilde.end());
  }
  std::vector<double> rewards(inst.rewards().begin(), inst.rewards().end());
  PackingInstance perturbed(std::move(rewards), std::move(entries), inst.m(),
                            (1.0 - epsilon) * inst.budget());
  return {std::move(perturbed), std::move(net)};
}

}  // namespace olp
