#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "swarmclean/harness.hpp"

namespace sc = swarmclean;

namespace {

void print_anova(const char* label, const std::optional<sc::AnovaResult>& res) {
  if (!res) return;
  std::cout << label << '\n';
  for (const sc::FactorEffect& e : res->effects)
    std::cout << "  " << e.name << ": F=" << e.F << " p=" << e.p << " df=(" << e.df_between << ',' << e.df_within
              << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm cue localization and cleanup simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, snapshot_list;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run one simulation");
  run->add_option("--config", config_path, "Configuration file")->required();
  run->add_option("--seed", seed, "Random seed")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* snap_opt = run->add_option("--snapshot-times", snapshot_list, "Comma separated seconds for PGM snapshots");

  std::string plan_path, sweep_out;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "Run every cell of an experiment plan");
  sweep->add_option("--plan", plan_path, "Plan file")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

  std::string analyze_dir;
  bool allow_partial = false;
  int time_bins = 8;
  auto* analyze = app.add_subcommand("analyze", "Medians and ANOVA over a sweep directory");
  analyze->add_option("--dir", analyze_dir, "Sweep directory")->required();
  analyze->add_flag("--allow-partial", allow_partial, "Analyse completed runs only");
  analyze->add_option("--time-bins", time_bins, "Number of equal time bins")->check(CLI::PositiveNumber);

  std::string field_path, render_out;
  int scale = 1;
  auto* render = app.add_subcommand("render", "Convert a PGM field snapshot to a PPM heatmap");
  render->add_option("--field", field_path, "PGM snapshot")->required();
  render->add_option("--out", render_out, "Output PPM")->required();
  render->add_option("--scale", scale, "Pixel upscaling factor")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? sc::kExitOk : sc::kExitConfig;
  }

  try {
    if (*run) {
      std::optional<std::vector<long>> times;
      if (*snap_opt) times = sc::parse_list<long>(snapshot_list);
      const auto out = sc::cmd_run(config_path, seed, out_dir, times);
      const auto& s = out.result.series;
      std::cout << "wrote " << out.files.size() << " files to " << out_dir;
      if (!s.empty()) std::cout << "; final mean cue " << s.back().mean_cue;
      std::cout << '\n';
    } else if (*sweep) {
      const auto plan = sc::parse_plan(sc::read_file(plan_path));
      const auto out = sc::cmd_sweep(plan, sweep_out, jobs);
      std::size_t failed = 0;
      for (const auto& e : out.manifest) {
        if (!e.ok) {
          ++failed;
          std::cerr << "run " << e.path << " failed: " << e.error << '\n';
        }
      }
      std::cout << out.manifest.size() - failed << '/' << out.manifest.size() << " runs completed\n";
      if (!out.all_ok) return sc::kExitPartial;
    } else if (*analyze) {
      const auto out = sc::cmd_analyze(analyze_dir, allow_partial, time_bins);
      for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << out.medians.size() << " median series written\n";
      print_anova("cue intensity", out.anova_cue);
      print_anova("coherency", out.anova_coherency);
    } else if (*render) {
      sc::cmd_render(field_path, render_out, scale);
    }
  } catch (const sc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return sc::kExitConfig;
  } catch (const sc::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return sc::kExitIo;
  } catch (const sc::PartialSweepError& e) {
    std::cerr << "incomplete sweep: " << e.what() << " (use --allow-partial)\n";
    return sc::kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kExitConfig;
  }
  return sc::kExitOk;
}
