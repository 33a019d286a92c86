#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "swarmclean/engine.hpp"
#include "swarmclean/io.hpp"

namespace swarmclean {

// Plain-text configuration: one `key = value` per line, `#` starts a comment,
// lists are comma separated. Every file must declare `schema_version = 1` and
// unknown keys are rejected.

inline constexpr int kSchemaVersion = 1;

using KeyValues = std::map<std::string, std::string, std::less<>>;

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }
  return kv;
}

inline void check_schema(KeyValues& kv) {
  const auto it = kv.find("schema_version");
  if (it == kv.end()) throw ConfigError("missing schema_version");
  if (parse_int<int>(it->second) != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + it->second + " (expected " + std::to_string(kSchemaVersion) + ")");
  kv.erase(it);
}

template <class T>
std::vector<T> parse_list(std::string_view s) {
  std::vector<T> out;
  for (const std::string& item : split(s, ',')) {
    if (item.empty()) continue;
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(parse_double(item));
    else
      out.push_back(parse_int<T>(item));
  }
  return out;
}

inline WaitingFormula parse_waiting_formula(std::string_view s) {
  if (s == "squared") return WaitingFormula::Squared;
  if (s == "literal") return WaitingFormula::Literal;
  throw ConfigError("waiting_formula must be 'squared' or 'literal'");
}

/// Applies one simulation key. Returns false when the key is not a simulation key.
inline bool apply_sim_key(SimConfig& cfg, std::string_view key, std::string_view value) {
  ControllerParams& c = cfg.controller;
  using Setter = std::function<void(std::string_view)>;
  auto dbl = [](double& dst) -> Setter { return [&dst](std::string_view v) { dst = parse_double(v); }; };
  const std::map<std::string_view, Setter> setters = {
      {"n_robots", [&](std::string_view v) { cfg.n_robots = parse_int<int>(v); }},
      {"beta", dbl(c.beta)},
      {"alpha", dbl(c.alpha)},
      {"omega_max", dbl(c.omega_max)},
      {"turn_min_deg", dbl(c.turn_min_deg)},
      {"turn_max_deg", dbl(c.turn_max_deg)},
      {"wheel_min", dbl(c.wheel_min)},
      {"wheel_max", dbl(c.wheel_max)},
      {"refractory_s", dbl(c.refractory_s)},
      {"turn_rate_deg_s", dbl(c.turn_rate_deg_s)},
      {"waiting_formula", [&](std::string_view v) { c.waiting_formula = parse_waiting_formula(v); }},
      {"arena_cm", dbl(cfg.arena_cm)},
      {"cells_per_cm", dbl(cfg.cells_per_cm)},
      {"cue_radius_cm", dbl(cfg.cue_radius_cm)},
      {"cue_peak", dbl(cfg.cue_peak)},
      {"duration_s", [&](std::string_view v) { cfg.duration_s = parse_int<long>(v); }},
      {"dt", dbl(cfg.dt)},
      {"body_radius_cm", dbl(cfg.body_radius_cm)},
      {"wheel_base_cm", dbl(cfg.wheel_base_cm)},
      {"cm_per_s_per_unit", dbl(cfg.cm_per_s_per_unit)},
      {"contact_range_cm", dbl(cfg.contact_range_cm)},
      {"wall_range_cm", dbl(cfg.wall_range_cm)},
      {"metric_radius_cm", dbl(cfg.metric_radius_cm)},
      {"snapshot_times", [&](std::string_view v) { cfg.snapshot_times = parse_list<long>(v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) return false;
  try {
    it->second(value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
  return true;
}

/// Parses a run configuration. Keys left out keep their defaults.
inline SimConfig parse_sim_config(std::string_view text) {
  KeyValues kv = parse_key_values(text);
  check_schema(kv);
  SimConfig cfg;
  cfg.snapshot_times.clear();
  for (const auto& [key, value] : kv)
    if (!apply_sim_key(cfg, key, value)) throw ConfigError("unknown key '" + key + "'");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

/// Grid of runs: populations x betas x repetitions, all sharing `base`.
struct ExperimentPlan {
  std::vector<int> populations{10, 20, 30, 40, 50};
  std::vector<double> betas{3.0, 6.0};
  int repetitions = 6;
  std::uint64_t base_seed = 2020;
  SimConfig base{};

  std::size_t run_count() const { return populations.size() * betas.size() * static_cast<std::size_t>(repetitions); }

  void validate() const {
    if (populations.empty() || betas.empty()) throw ConfigError("plan needs at least one population and one beta");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    SimConfig probe = base;
    for (int n : populations) {
      for (double b : betas) {
        probe.n_robots = n;
        probe.controller.beta = b;
        try {
          probe.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
    }
  }
};

/// Parses a sweep plan. Besides the plan keys (populations, betas,
/// repetitions, base_seed) any simulation key except n_robots, beta and
/// snapshot_times is accepted and applied to every run.
inline ExperimentPlan parse_plan(std::string_view text) {
  KeyValues kv = parse_key_values(text);
  check_schema(kv);
  ExperimentPlan plan;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "populations") {
        plan.populations = parse_list<int>(value);
      } else if (key == "betas") {
        plan.betas = parse_list<double>(value);
      } else if (key == "repetitions") {
        plan.repetitions = parse_int<int>(value);
      } else if (key == "base_seed") {
        plan.base_seed = parse_int<std::uint64_t>(value);
      } else if (key == "n_robots" || key == "beta" || key == "snapshot_times" ||
                 !apply_sim_key(plan.base, key, value)) {
        throw ConfigError("unknown key");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("'" + key + "': " + e.what());
    }
  }
  plan.validate();
  return plan;
}

}  // namespace swarmclean
