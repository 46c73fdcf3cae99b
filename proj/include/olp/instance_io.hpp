#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "olp/instance.hpp"

namespace olp {

// Instance file layout:
//   {"n": int, "m": int, "budget": real, "rewards": [n reals], "columns": [[m reals] x n]}

inline nlohmann::json instance_to_json(const PackingInstance& inst) {
  nlohmann::json columns = nlohmann::json::array();
  for (std::size_t t = 0; t < inst.n(); ++t) {
    const auto col = inst.column(t);
    columns.push_back(std::vector<double>(col.begin(), col.end()));
  }
  return {{"n", inst.n()},
          {"m", inst.m()},
          {"budget", inst.budget()},
          {"rewards", std::vector<double>(inst.rewards().begin(), inst.rewards().end())},
          {"columns", std::move(columns)}};
}

/// Parses and validates an instance document; throws ValidationError.
inline PackingInstance instance_from_json(const nlohmann::json& doc) {
  try {
    const auto n = doc.at("n").get<std::size_t>();
    const auto m = doc.at("m").get<std::size_t>();
    const auto budget = doc.at("budget").get<double>();
    auto rewards = doc.at("rewards").get<std::vector<double>>();
    const auto columns = doc.at("columns").get<std::vector<std::vector<double>>>();
    if (rewards.size() != n) throw ValidationError("\"rewards\" length differs from n");
    if (columns.size() != n) throw ValidationError("\"columns\" length differs from n");
    for (std::size_t t = 0; t < n; ++t) {
      if (columns[t].size() != m) {
        throw ValidationError("column " + std::to_string(t) + " length differs from m");
      }
    }
    PackingInstance inst(std::move(rewards), columns, budget);
    require_valid(inst);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed instance: ") + e.what());
  }
}

inline PackingInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed instance: ") + e.what());
  }
  return instance_from_json(doc);
}

inline void write_instance(const PackingInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace olp
