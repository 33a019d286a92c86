#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "swarmclean/config.hpp"
#include "swarmclean/engine.hpp"
#include "swarmclean/io.hpp"
#include "swarmclean/rng.hpp"
#include "swarmclean/stats.hpp"

namespace swarmclean {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitIo = 2,
  kExitPartial = 3,
};

/// Thrown when a sweep is incomplete and partial analysis was not requested.
struct PartialSweepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

// ---------------------------------------------------------------------------
// run

inline const std::vector<long> kDefaultSnapshotTimes{0, 1000, 4000};

inline std::string snapshot_name(long t) { return "field_t" + std::to_string(t) + ".pgm"; }

struct RunOutput {
  SimResult result;
  std::vector<fs::path> files;
};

/// One simulation; writes metrics.csv plus one PGM per snapshot time into `out_dir`.
inline RunOutput run_to_directory(SimConfig cfg, const fs::path& out_dir) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ensure_directory(out_dir);
  RunOutput out{run_simulation(cfg), {}};
  const fs::path metrics = out_dir / "metrics.csv";
  write_file(metrics, metrics_csv(out.result.series));
  out.files.push_back(metrics);
  for (const Snapshot& s : out.result.snapshots) {
    const fs::path p = out_dir / snapshot_name(s.t);
    write_file(p, field_to_pgm(s.field));
    out.files.push_back(p);
  }
  return out;
}

/// `run` subcommand. When no snapshot list is given anywhere, snapshots are
/// taken at 0, 1000 and 4000 s (those within the duration).
inline RunOutput cmd_run(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir,
                         std::optional<std::vector<long>> snapshot_times = std::nullopt) {
  SimConfig cfg = parse_sim_config(read_file(config_path));
  cfg.seed = seed;
  if (snapshot_times) {
    cfg.snapshot_times = *snapshot_times;
  } else if (cfg.snapshot_times.empty()) {
    for (long t : kDefaultSnapshotTimes)
      if (t <= cfg.duration_s) cfg.snapshot_times.push_back(t);
  }
  return run_to_directory(std::move(cfg), out_dir);
}

// ---------------------------------------------------------------------------
// sweep

/// Run seed from the plan's base seed and the cell coordinates, so adding
/// populations or speeds leaves existing runs untouched.
inline std::uint64_t run_seed(std::uint64_t base_seed, int n_robots, double beta, int repetition) {
  const auto beta_key = static_cast<std::uint64_t>(std::llround(beta * 1000.0));
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(n_robots));
  h = mix64(h ^ beta_key);
  h = mix64(h ^ static_cast<std::uint64_t>(repetition));
  return h;
}

inline int beta_level(double beta) { return static_cast<int>(std::llround(beta * 1000.0)); }

inline std::string run_dir_name(int n, double beta, int rep) {
  return "N" + std::to_string(n) + "_b" + format_double(beta) + "_r" + std::to_string(rep);
}

struct ManifestEntry {
  int n_robots = 0;
  double beta = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string path;  ///< metrics CSV, relative to the sweep directory
  std::string error;
};

inline constexpr std::string_view kManifestHeader = "n_robots,beta,repetition,seed,status,path,error";

inline std::string manifest_csv(const std::vector<ManifestEntry>& entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const ManifestEntry& e : entries) {
    std::string err = e.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::to_string(e.n_robots) + ',' + format_double(e.beta) + ',' + std::to_string(e.repetition) + ',' +
           std::to_string(e.seed) + ',' + (e.ok ? "ok" : "failed") + ',' + e.path + ',' + err + '\n';
  }
  return out;
}

inline std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    if (raw.empty()) continue;
    if (line_no == 1) {
      if (raw != kManifestHeader) throw IoError("unexpected manifest header");
      continue;
    }
    const auto cols = split(raw, ',');
    if (cols.size() != 7) throw IoError("manifest line " + std::to_string(line_no) + ": expected 7 columns");
    try {
      entries.push_back({parse_int<int>(cols[0]), parse_double(cols[1]), parse_int<int>(cols[2]),
                         parse_int<std::uint64_t>(cols[3]), cols[4] == "ok", cols[5], cols[6]});
    } catch (const ConfigError& e) {
      throw IoError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

struct SweepOutput {
  std::vector<ManifestEntry> manifest;
  bool all_ok = true;
};

/// Every (population, beta, repetition) cell as its own run directory under
/// `out_dir/runs`, executed by up to `jobs` workers. The manifest is written
/// in plan order regardless of completion order.
inline SweepOutput cmd_sweep(const ExperimentPlan& plan, const fs::path& out_dir, unsigned jobs = 1) {
  plan.validate();
  ensure_directory(out_dir);
  std::vector<ManifestEntry> entries;
  std::vector<SimConfig> configs;
  for (int n : plan.populations) {
    for (double b : plan.betas) {
      for (int rep = 0; rep < plan.repetitions; ++rep) {
        SimConfig cfg = plan.base;
        cfg.n_robots = n;
        cfg.controller.beta = b;
        cfg.seed = run_seed(plan.base_seed, n, b, rep);
        configs.push_back(cfg);
        ManifestEntry e;
        e.n_robots = n;
        e.beta = b;
        e.repetition = rep;
        e.seed = cfg.seed;
        e.path = (fs::path("runs") / run_dir_name(n, b, rep) / "metrics.csv").generic_string();
        entries.push_back(e);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        run_to_directory(configs[i], out_dir / fs::path(entries[i].path).parent_path());
        entries[i].ok = true;
      } catch (const std::exception& ex) {
        entries[i].ok = false;
        entries[i].error = ex.what();
      }
    }
  };
  jobs = std::clamp(jobs, 1u, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  write_file(out_dir / "manifest.csv", manifest_csv(entries));
  SweepOutput out{entries, true};
  for (const ManifestEntry& e : entries) out.all_ok = out.all_ok && e.ok;
  return out;
}

// ---------------------------------------------------------------------------
// analyze

using CellKey = std::pair<int, int>;  ///< (population, beta level)

struct AnalysisOutput {
  std::map<CellKey, MetricsSeries> medians;
  std::map<CellKey, std::vector<MetricsSeries>> runs;
  std::optional<AnovaResult> anova_cue;
  std::optional<AnovaResult> anova_coherency;
  std::vector<std::string> warnings;
};

/// Time bin of a record at second `t` (1-based) when `duration` seconds are
/// split into `bins` equal parts.
inline long time_bin(long t, long duration, int bins) {
  if (duration <= 0) return 0;
  const long b = (std::max(t, 1L) - 1) * bins / duration;
  return std::clamp(b, 0L, static_cast<long>(bins) - 1);
}

/// Main-effects ANOVA over every per-second record of every run, with time
/// bin, population and speed as factors. Factors with a single level in the
/// data are left out of the model.
inline std::optional<AnovaResult> anova_over_runs(const std::map<CellKey, std::vector<MetricsSeries>>& runs,
                                                  int time_bins, bool coherency_response,
                                                  std::vector<std::string>& warnings) {
  long duration = 0;
  std::map<long, int> pops, speeds;
  for (const auto& [key, series_list] : runs) {
    pops[key.first];
    speeds[key.second];
    for (const MetricsSeries& s : series_list)
      if (!s.empty()) duration = std::max(duration, s.back().t);
  }
  std::vector<std::string> names;
  const bool use_time = time_bins >= 2 && duration >= 2;
  const bool use_pop = pops.size() >= 2;
  const bool use_speed = speeds.size() >= 2;
  if (use_time) names.push_back("time");
  if (use_pop) names.push_back("population");
  if (use_speed) names.push_back("speed");
  if (names.empty()) {
    warnings.push_back("ANOVA skipped: no factor has two or more levels");
    return std::nullopt;
  }
  ObservationTable table(names);
  std::vector<long> levels;
  for (const auto& [key, series_list] : runs) {
    for (const MetricsSeries& s : series_list) {
      for (const MetricsRecord& r : s) {
        levels.clear();
        if (use_time) levels.push_back(time_bin(r.t, duration, time_bins));
        if (use_pop) levels.push_back(key.first);
        if (use_speed) levels.push_back(key.second);
        table.add(coherency_response ? r.coherency_m : r.mean_cue, levels);
      }
    }
  }
  AnovaResult res;
  try {
    res = anova_main_effects(table);
  } catch (const std::invalid_argument& e) {
    warnings.push_back(std::string("ANOVA skipped: ") + e.what());
    return std::nullopt;
  }
  if (res.degenerate_residual)
    warnings.push_back(std::string("degenerate residual variance in ") + (coherency_response ? "coherency" : "cue") +
                       " ANOVA; F reported as 0");
  return res;
}

inline std::string anova_csv(const AnovaResult& res) {
  std::string out = "factor,F,p,df_between,df_within\n";
  for (const FactorEffect& e : res.effects)
    out += e.name + ',' + format_double(e.F) + ',' + format_double(e.p) + ',' + std::to_string(e.df_between) + ',' +
           std::to_string(e.df_within) + '\n';
  return out;
}

inline std::string median_file_name(int n, int beta_lv) {
  return "median_N" + std::to_string(n) + "_b" + format_double(beta_lv / 1000.0) + ".csv";
}

/// Reads a sweep directory, writes per-cell median series and the two ANOVA
/// tables under `sweep_dir/analysis`.
inline AnalysisOutput cmd_analyze(const fs::path& sweep_dir, bool allow_partial = false, int time_bins = 8) {
  if (time_bins < 1) throw ConfigError("time bins must be >= 1");
  const auto manifest = parse_manifest(read_file(sweep_dir / "manifest.csv"));
  if (manifest.empty()) throw PartialSweepError("manifest lists no runs");
  AnalysisOutput out;
  for (const ManifestEntry& e : manifest) {
    const fs::path p = sweep_dir / e.path;
    if (!e.ok || !fs::exists(p)) {
      const std::string what = "run " + e.path + (e.ok ? " is missing" : " failed: " + e.error);
      if (!allow_partial) throw PartialSweepError(what);
      out.warnings.push_back("skipping " + what);
      continue;
    }
    out.runs[{e.n_robots, beta_level(e.beta)}].push_back(read_metrics_csv(p));
  }
  if (out.runs.empty()) throw PartialSweepError("no completed runs");

  const fs::path analysis = sweep_dir / "analysis";
  ensure_directory(analysis);
  for (const auto& [key, series_list] : out.runs) {
    MetricsSeries med = median_series(series_list);
    write_file(analysis / median_file_name(key.first, key.second), metrics_csv(med));
    out.medians.emplace(key, std::move(med));
  }
  out.anova_cue = anova_over_runs(out.runs, time_bins, false, out.warnings);
  out.anova_coherency = anova_over_runs(out.runs, time_bins, true, out.warnings);
  if (out.anova_cue) write_file(analysis / "anova_cue.csv", anova_csv(*out.anova_cue));
  if (out.anova_coherency) write_file(analysis / "anova_coherency.csv", anova_csv(*out.anova_coherency));
  return out;
}

// ---------------------------------------------------------------------------
// render

/// Converts a PGM field snapshot into a colour PPM heatmap.
inline void cmd_render(const fs::path& field_path, const fs::path& out_path, int scale = 1) {
  const GrayImage img = parse_pgm(read_file(field_path));
  write_file(out_path, heatmap_ppm(img, scale));
}

}  // namespace swarmclean
