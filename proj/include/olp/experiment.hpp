#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "olp/instance.hpp"
#include "olp/instance_io.hpp"
#include "olp/online.hpp"
#include "olp/rng.hpp"
#include "olp/solver.hpp"

namespace olp {

enum class Algorithm { Greedy, Otp, RobustOtp, RobustDpa };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Greedy: return "greedy";
    case Algorithm::Otp: return "otp";
    case Algorithm::RobustOtp: return "robust-otp";
    case Algorithm::RobustDpa: return "robust-dpa";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto a : {Algorithm::Greedy, Algorithm::Otp, Algorithm::RobustOtp, Algorithm::RobustDpa}) {
    if (to_string(a) == name) return a;
  }
  throw ValidationError("unknown algorithm '" + std::string(name) + "'");
}

/// Runs one algorithm on one arrival order.
inline OnlineRunTrace run_algorithm(Algorithm algo, const PackingInstance& inst,
                                    std::span<const std::size_t> order, double epsilon,
                                    HaltMode mode) {
  switch (algo) {
    case Algorithm::Greedy: return run_greedy_baseline(inst, order);
    case Algorithm::Otp: return run_otp(inst, epsilon, order, mode);
    case Algorithm::RobustOtp: return run_robust_otp(inst, epsilon, order, mode);
    case Algorithm::RobustDpa: return run_robust_dpa(inst, epsilon, order);
  }
  throw ValidationError("unknown algorithm");
}

struct GeneratedSource {
  GeneratorSpec spec;
  std::size_t n = 0;
  std::size_t m = 0;
  double budget = 0.0;
};

using InstanceSource = std::variant<std::filesystem::path, GeneratedSource>;

struct ExperimentConfig {
  InstanceSource source;
  std::vector<Algorithm> algorithms{Algorithm::Otp};
  double epsilon = 0.1;
  HaltMode halt_mode = HaltMode::Halt;
  std::size_t trials = 100;
  std::uint64_t base_seed = 1;
  std::size_t threads = 1;
  double general_position_noise = kDefaultGeneralPositionNoise;
  std::optional<double> budget_override;
  bool include_trials = false;
  /// Free-form key/value pairs copied into report metadata (CLI flags).
  std::map<std::string, std::string> echo;
};

/// Seed of the general-position noise, derived from the base seed.
constexpr std::uint64_t noise_seed(std::uint64_t base_seed) {
  return base_seed ^ 0x9E3779B97F4A7C15ULL;
}

/// Loads or generates the instance, applies the budget override and the
/// general-position perturbation.
inline PackingInstance materialize(const ExperimentConfig& config) {
  PackingInstance inst = std::visit(
      [](const auto& src) -> PackingInstance {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, std::filesystem::path>) {
          return read_instance(src);
        } else {
          return generate(src.spec, src.n, src.m, src.budget);
        }
      },
      config.source);
  if (config.budget_override) {
    if (!(*config.budget_override > 0.0)) throw ValidationError("budget must be positive");
    inst = inst.with_budget(*config.budget_override);
  }
  inst = ensure_general_position(inst, config.general_position_noise, noise_seed(config.base_seed));
  require_valid(inst);
  return inst;
}

struct TrialRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Otp;
  double value = 0.0;
  double ratio = 0.0;
  bool feasible = true;
  std::size_t halt_position = 0;
  double max_occupation = 0.0;
};

struct AlgorithmSummary {
  Algorithm algorithm = Algorithm::Otp;
  std::size_t trials = 0;
  double mean_value = 0.0;
  double stddev_value = 0.0;
  double mean_ratio = 0.0;
  double stddev_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double feasibility_rate = 0.0;
  double mean_halt_index = 0.0;

  /// Standard error of mean_ratio.
  double ratio_standard_error() const {
    return trials > 0 ? stddev_ratio / std::sqrt(static_cast<double>(trials)) : 0.0;
  }
};

struct ExperimentReport {
  std::size_t n = 0;
  std::size_t m = 0;
  double budget = 0.0;
  double opt = 0.0;
  double epsilon = 0.0;
  HaltMode halt_mode = HaltMode::Halt;
  std::size_t trials = 0;
  std::uint64_t base_seed = 0;
  std::vector<AlgorithmSummary> summaries;
  std::vector<TrialRow> rows;  // filled when include_trials is set
  std::map<std::string, std::string> echo;

  const AlgorithmSummary& summary(Algorithm a) const {
    for (const auto& s : summaries) {
      if (s.algorithm == a) return s;
    }
    throw std::out_of_range("algorithm not part of report");
  }
};

/// Raised when a trial breaks a guarantee every algorithm here must keep
/// (feasibility, ratio at most 1).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kRatioSlack = 1e-9;

namespace detail {

[[noreturn]] inline void rethrow_with_trial(std::exception_ptr error, std::size_t trial) {
  const std::string where = "trial " + std::to_string(trial) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const SolverFailure& e) {
    throw SolverFailure(where + e.what(), e.pivots(), SolverFailure::Preformatted{});
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
}

inline AlgorithmSummary summarize(Algorithm algo, const std::vector<TrialRow>& rows) {
  AlgorithmSummary s;
  s.algorithm = algo;
  s.trials = rows.size();
  if (rows.empty()) return s;
  const double count = static_cast<double>(rows.size());
  double sum_v = 0.0, sum_r = 0.0, feasible = 0.0, halts = 0.0;
  s.min_ratio = rows.front().ratio;
  s.max_ratio = rows.front().ratio;
  for (const auto& r : rows) {
    sum_v += r.value;
    sum_r += r.ratio;
    feasible += r.feasible ? 1.0 : 0.0;
    halts += static_cast<double>(r.halt_position);
    s.min_ratio = std::min(s.min_ratio, r.ratio);
    s.max_ratio = std::max(s.max_ratio, r.ratio);
  }
  s.mean_value = sum_v / count;
  s.mean_ratio = sum_r / count;
  s.feasibility_rate = feasible / count;
  s.mean_halt_index = halts / count;
  if (rows.size() > 1) {
    double sq_v = 0.0, sq_r = 0.0;
    for (const auto& r : rows) {
      sq_v += (r.value - s.mean_value) * (r.value - s.mean_value);
      sq_r += (r.ratio - s.mean_ratio) * (r.ratio - s.mean_ratio);
    }
    s.stddev_value = std::sqrt(sq_v / (count - 1.0));
    s.stddev_ratio = std::sqrt(sq_r / (count - 1.0));
  }
  return s;
}

}  // namespace detail

/// Monte Carlo driver on a prepared instance: solves OPT once, then for trial
/// k draws the arrival order by Fisher-Yates from seed base_seed XOR k and
/// runs every selected algorithm on it. Trials run on `threads` workers;
/// aggregation happens in trial order, so results do not depend on
/// scheduling.
inline ExperimentReport run_experiment(const PackingInstance& inst, const ExperimentConfig& config) {
  require_valid(inst);
  if (config.trials < 1) throw ValidationError("trials must be at least 1");
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    throw ValidationError("epsilon must lie in (0,1)");
  }
  if (config.algorithms.empty()) throw ValidationError("no algorithm selected");

  const double opt = solve(inst).value;
  const std::size_t algos = config.algorithms.size();
  std::vector<TrialRow> table(config.trials * algos);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<std::size_t> failed_trial;
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= config.trials) return;
      try {
        const std::uint64_t seed = trial_seed(config.base_seed, k);
        Rng rng(seed);
        const auto order = random_permutation(inst.n(), rng);
        for (std::size_t a = 0; a < algos; ++a) {
          const auto trace =
              run_algorithm(config.algorithms[a], inst, order, config.epsilon, config.halt_mode);
          TrialRow& row = table[k * algos + a];
          row.trial = k;
          row.seed = seed;
          row.algorithm = config.algorithms[a];
          row.value = trace.value;
          row.ratio = opt > 0.0 ? trace.value / opt : 1.0;
          row.feasible = trace.feasible;
          row.halt_position = trace.halt_position();
          row.max_occupation = trace.final_occupation.empty()
                                   ? 0.0
                                   : *std::max_element(trace.final_occupation.begin(),
                                                       trace.final_occupation.end());
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failed_trial || k < *failed_trial) {
          failed_trial = k;
          failure = std::current_exception();
        }
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, config.trials));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) detail::rethrow_with_trial(failure, *failed_trial);

  ExperimentReport report;
  report.n = inst.n();
  report.m = inst.m();
  report.budget = inst.budget();
  report.opt = opt;
  report.epsilon = config.epsilon;
  report.halt_mode = config.halt_mode;
  report.trials = config.trials;
  report.base_seed = config.base_seed;
  report.echo = config.echo;
  for (std::size_t a = 0; a < algos; ++a) {
    std::vector<TrialRow> rows;
    rows.reserve(config.trials);
    for (std::size_t k = 0; k < config.trials; ++k) rows.push_back(table[k * algos + a]);
    report.summaries.push_back(detail::summarize(config.algorithms[a], rows));
  }
  if (config.include_trials) report.rows = table;

  for (const auto& row : table) {
    if (!row.feasible) {
      throw InvariantViolation("trial " + std::to_string(row.trial) + ": " +
                               std::string(to_string(row.algorithm)) + " produced an infeasible solution");
    }
    if (row.ratio > 1.0 + kRatioSlack || row.ratio < 0.0) {
      throw InvariantViolation("trial " + std::to_string(row.trial) + ": ratio out of [0,1]");
    }
  }
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  return run_experiment(materialize(config), config);
}

enum class SweepParam { Budget, Epsilon, N };

inline std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Budget: return "B";
    case SweepParam::Epsilon: return "epsilon";
    case SweepParam::N: return "n";
  }
  return "unknown";
}

inline SweepParam parse_sweep_param(std::string_view name) {
  if (name == "B") return SweepParam::Budget;
  if (name == "epsilon") return SweepParam::Epsilon;
  if (name == "n") return SweepParam::N;
  throw ValidationError("unknown sweep parameter '" + std::string(name) + "'");
}

/// One experiment per value, all with the same base seed.
inline std::vector<ExperimentReport> sweep(const ExperimentConfig& config, SweepParam param,
                                           const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  std::vector<ExperimentReport> reports;
  for (const double v : values) {
    ExperimentConfig cfg = config;
    switch (param) {
      case SweepParam::Budget:
        if (!(v > 0.0)) throw ValidationError("swept budget must be positive");
        cfg.budget_override = v;
        break;
      case SweepParam::Epsilon:
        cfg.epsilon = v;
        break;
      case SweepParam::N: {
        auto* gen = std::get_if<GeneratedSource>(&cfg.source);
        if (!gen) throw ValidationError("sweeping n requires a generated instance");
        if (!(v >= 1.0) || v != std::floor(v)) throw ValidationError("swept n must be a positive integer");
        gen->n = static_cast<std::size_t>(v);
        break;
      }
    }
    reports.push_back(run_experiment(cfg));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Report emission

/// Shortest round-trip decimal form; identical output for identical doubles.
inline std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

inline nlohmann::json summary_to_json(const AlgorithmSummary& s) {
  return {{"algorithm", to_string(s.algorithm)},
          {"trials", s.trials},
          {"mean_value", s.mean_value},
          {"stddev_value", s.stddev_value},
          {"mean_ratio", s.mean_ratio},
          {"stddev_ratio", s.stddev_ratio},
          {"min_ratio", s.min_ratio},
          {"max_ratio", s.max_ratio},
          {"feasibility_rate", s.feasibility_rate},
          {"mean_halt_index", s.mean_halt_index}};
}

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json meta = {{"prng", kPrngName},
                         {"n", r.n},
                         {"m", r.m},
                         {"budget", r.budget},
                         {"epsilon", r.epsilon},
                         {"halt_mode", to_string(r.halt_mode)},
                         {"trials", r.trials},
                         {"base_seed", r.base_seed},
                         {"flags", r.echo}};
  nlohmann::json algorithms = nlohmann::json::array();
  for (const auto& s : r.summaries) algorithms.push_back(summary_to_json(s));
  nlohmann::json doc = {{"metadata", std::move(meta)}, {"opt", r.opt}, {"algorithms", std::move(algorithms)}};
  if (!r.rows.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"trial", row.trial},
                      {"seed", row.seed},
                      {"algorithm", to_string(row.algorithm)},
                      {"value", row.value},
                      {"ratio", row.ratio},
                      {"feasible", row.feasible},
                      {"halt_position", row.halt_position},
                      {"max_occupation", row.max_occupation}});
    }
    doc["trials"] = std::move(rows);
  }
  return doc;
}

inline constexpr std::string_view kSummaryCsvColumns =
    "algorithm,trials,opt,mean_value,stddev_value,mean_ratio,stddev_ratio,min_ratio,max_ratio,"
    "feasibility_rate,mean_halt_index";

inline std::string summary_csv_row(const ExperimentReport& r, const AlgorithmSummary& s) {
  std::ostringstream out;
  out << to_string(s.algorithm) << ',' << s.trials << ',' << format_double(r.opt) << ','
      << format_double(s.mean_value) << ',' << format_double(s.stddev_value) << ','
      << format_double(s.mean_ratio) << ',' << format_double(s.stddev_ratio) << ','
      << format_double(s.min_ratio) << ',' << format_double(s.max_ratio) << ','
      << format_double(s.feasibility_rate) << ',' << format_double(s.mean_halt_index);
  return out.str();
}

/// Metadata goes into leading '#' comment lines.
inline std::string csv_metadata(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# prng=" << kPrngName << " n=" << r.n << " m=" << r.m << " budget=" << format_double(r.budget)
      << " epsilon=" << format_double(r.epsilon) << " halt_mode=" << to_string(r.halt_mode)
      << " trials=" << r.trials << " base_seed=" << r.base_seed << '\n';
  for (const auto& [key, value] : r.echo) out << "# flag " << key << '=' << value << '\n';
  return out.str();
}

inline std::string report_to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << csv_metadata(r) << kSummaryCsvColumns << '\n';
  for (const auto& s : r.summaries) out << summary_csv_row(r, s) << '\n';
  return out.str();
}

inline std::string sweep_to_csv(SweepParam param, const std::vector<double>& values,
                                const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  if (!reports.empty()) {
    ExperimentReport head = reports.front();
    out << csv_metadata(head);
  }
  out << "param,value," << kSummaryCsvColumns << '\n';
  for (std::size_t k = 0; k < reports.size(); ++k) {
    for (const auto& s : reports[k].summaries) {
      out << to_string(param) << ',' << format_double(values[k]) << ','
          << summary_csv_row(reports[k], s) << '\n';
    }
  }
  return out.str();
}

}  // namespace olp
