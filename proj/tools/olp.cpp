// olp: command-line front end for the online packing LP library.
//
//   olp gen    emit an instance JSON from a generator spec
//   olp solve  offline optimum with dual prices
//   olp run    one Monte Carlo experiment
//   olp sweep  experiments over a list of B, epsilon or n values
//   olp bound  Bernstein tail bound calculator
//
// Exit codes: 0 success, 2 validation error, 3 solver failure, 1 anything else.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "olp/olp.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct GeneratorFlags {
  std::string family = "uniform";
  std::size_t n = 100;
  std::size_t m = 1;
  double budget = 10.0;
  std::uint64_t seed = 1;
  std::size_t subspaces = 4;
  std::optional<double> arc_step;
  double reward_lo = 0.0;
  double reward_hi = 1.0;

  olp::GeneratedSource source() const {
    olp::GeneratedSource src;
    src.spec.family = olp::parse_family(family);
    src.spec.subspaces = subspaces;
    src.spec.arc_step = arc_step;
    src.spec.reward_lo = reward_lo;
    src.spec.reward_hi = reward_hi;
    src.spec.seed = seed;
    src.n = n;
    src.m = m;
    src.budget = budget;
    return src;
  }
};

void add_generator_flags(CLI::App* cmd, GeneratorFlags& g, bool seed_flag) {
  cmd->add_option("--family", g.family, "uniform | k-subspace | arc | knapsack | correlated")
      ->capture_default_str();
  cmd->add_option("--n", g.n, "number of columns")->capture_default_str();
  cmd->add_option("--m", g.m, "number of rows")->capture_default_str();
  cmd->add_option("--budget", g.budget, "right-hand side B")->capture_default_str();
  if (seed_flag) cmd->add_option("--seed", g.seed, "generator seed")->capture_default_str();
  cmd->add_option("--K", g.subspaces, "number of directions (k-subspace)")->capture_default_str();
  cmd->add_option("--arc-step", g.arc_step, "angular step of the arc family");
  cmd->add_option("--reward-lo", g.reward_lo, "rewards drawn from (lo, hi]")->capture_default_str();
  cmd->add_option("--reward-hi", g.reward_hi)->capture_default_str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// Every option of the subcommand with its effective value.
std::map<std::string, std::string> echo_flags(const CLI::App* cmd) {
  std::map<std::string, std::string> echo;
  for (const CLI::Option* opt : cmd->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name.find("help") != std::string::npos) continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
    } else {
      value = opt->get_default_str();
    }
    echo[name] = value;
  }
  return echo;
}

struct RunFlags {
  std::string instance_path;
  GeneratorFlags gen;
  std::vector<std::string> algos{"otp"};
  double epsilon = 0.1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::string halt_mode = "halt";
  std::string out;
  std::string format = "json";
  std::size_t threads = 1;
  bool include_trials = false;
  double gp_noise = olp::kDefaultGeneralPositionNoise;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--instance", f.instance_path, "instance JSON (otherwise generated)");
  add_generator_flags(cmd, f.gen, false);
  cmd->add_option("--gen-seed", f.gen.seed, "generator seed")->capture_default_str();
  cmd->add_option("--algo", f.algos, "greedy | otp | robust-otp | robust-dpa (repeatable)")
      ->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon)->capture_default_str();
  cmd->add_option("--trials", f.trials)->capture_default_str();
  cmd->add_option("--seed", f.seed, "base seed of the arrival orders")->capture_default_str();
  cmd->add_option("--halt-mode", f.halt_mode, "halt | skip")->capture_default_str();
  cmd->add_option("--out", f.out, "output file (default stdout)");
  cmd->add_option("--format", f.format, "csv | json")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads")->capture_default_str();
  cmd->add_flag("--include-trials", f.include_trials, "per-trial rows in JSON output");
  cmd->add_option("--gp-noise", f.gp_noise, "general-position reward noise")->capture_default_str();
}

olp::ExperimentConfig make_config(const RunFlags& f, const CLI::App* cmd) {
  olp::ExperimentConfig config;
  if (!f.instance_path.empty()) {
    config.source = std::filesystem::path(f.instance_path);
  } else {
    config.source = f.gen.source();
  }
  config.algorithms.clear();
  for (const auto& a : f.algos) config.algorithms.push_back(olp::parse_algorithm(a));
  config.epsilon = f.epsilon;
  config.halt_mode = olp::parse_halt_mode(f.halt_mode);
  config.trials = f.trials;
  config.base_seed = f.seed;
  config.threads = f.threads;
  config.include_trials = f.include_trials;
  config.general_position_noise = f.gp_noise;
  config.echo = echo_flags(cmd);
  if (f.format != "csv" && f.format != "json") {
    throw olp::ValidationError("unknown format '" + f.format + "'");
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online packing LP algorithms in the random-permutation model"};
  app.require_subcommand(1);

  GeneratorFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "emit an instance JSON");
  add_generator_flags(gen, gen_flags, true);
  gen->add_option("--out", gen_out, "output file (default stdout)");

  std::string solve_path;
  std::optional<double> solve_budget;
  std::string solve_out;
  olp::SolverOptions solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "offline optimum and dual prices");
  solve_cmd->add_option("--instance", solve_path, "instance JSON")->required();
  solve_cmd->add_option("--budget", solve_budget, "override the right-hand side");
  solve_cmd->add_option("--out", solve_out, "output file (default stdout)");
  solve_cmd->add_option("--max-pivots", solve_opts.max_pivots, "pivot limit (0: 50 (n + m) + 1000)")
      ->capture_default_str();

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "one Monte Carlo experiment");
  add_run_flags(run, run_flags);

  RunFlags sweep_flags;
  sweep_flags.format = "csv";
  std::string sweep_param;
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "experiments over a parameter list");
  add_run_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", sweep_param, "B | epsilon | n")->required();
  sweep_cmd->add_option("--values", sweep_values, "values of the swept parameter")->required();

  std::size_t bound_s = 1;
  double bound_mu = 0.0;
  std::optional<double> bound_sigma;
  double bound_tau = 1.0;
  auto* bound = app.add_subcommand("bound", "Bernstein tail bound for sampling without replacement");
  bound->add_option("--s", bound_s, "sample size")->required();
  bound->add_option("--mu", bound_mu, "population mean")->required();
  bound->add_option("--sigma-sq", bound_sigma, "population variance (omit for the 4 s mu form)");
  bound->add_option("--tau", bound_tau, "deviation")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*gen) {
      const auto src = gen_flags.source();
      const auto inst = olp::generate(src.spec, src.n, src.m, src.budget);
      olp::require_valid(inst);
      emit(olp::instance_to_json(inst).dump(2) + "\n", gen_out);
    } else if (*solve_cmd) {
      const auto inst = olp::read_instance(solve_path);
      const auto sol = olp::solve(inst, solve_budget, solve_opts);
      const nlohmann::json doc = {{"value", sol.value}, {"budget", sol.budget}, {"x", sol.x},
                                  {"p", sol.p},         {"alpha", sol.alpha},   {"pivots", sol.pivots}};
      emit(doc.dump(2) + "\n", solve_out);
    } else if (*run) {
      const auto config = make_config(run_flags, run);
      const auto report = olp::run_experiment(config);
      emit(run_flags.format == "csv" ? olp::report_to_csv(report)
                                     : olp::report_to_json(report).dump(2) + "\n",
           run_flags.out);
    } else if (*sweep_cmd) {
      const auto config = make_config(sweep_flags, sweep_cmd);
      const auto param = olp::parse_sweep_param(sweep_param);
      const auto reports = olp::sweep(config, param, sweep_values);
      if (sweep_flags.format == "csv") {
        emit(olp::sweep_to_csv(param, sweep_values, reports), sweep_flags.out);
      } else {
        nlohmann::json doc = nlohmann::json::array();
        for (std::size_t k = 0; k < reports.size(); ++k) {
          auto entry = olp::report_to_json(reports[k]);
          entry["swept"] = {{"param", olp::to_string(param)}, {"value", sweep_values[k]}};
          doc.push_back(std::move(entry));
        }
        emit(doc.dump(2) + "\n", sweep_flags.out);
      }
    } else if (*bound) {
      const double value = olp::bernstein_tail_bound(bound_s, bound_mu, bound_sigma, bound_tau);
      std::cout << olp::format_double(value) << '\n';
    }
  } catch (const olp::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const olp::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
