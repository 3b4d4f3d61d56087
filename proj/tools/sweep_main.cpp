// v2x-sweep: evaluate the danger-aware prioritization protocol across
// distance thresholds and emit figure-ready CSV tables plus a text summary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "v2x/sweep.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw v2x::IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw v2x::IoError("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Danger-aware vehicular contention sweep"};
  app.get_formatter()->column_width(30);

  std::string config_path;
  std::string mode_override;
  std::string output_dir;
  std::int64_t seed_override = -1;
  bool split_metrics = false;
  bool dump_scenario = false;
  int verbosity = 1;

  app.add_option("-c,--config", config_path, "Run configuration file (key = value lines)");
  app.add_option("-m,--mode", mode_override, "Override mode: analytic|montecarlo|both")
      ->check(CLI::IsMember({"analytic", "montecarlo", "both"}));
  app.add_option("-o,--out", output_dir, "Output directory (default from config)");
  app.add_option("-s,--seed", seed_override, "Override scenario seed");
  app.add_flag("--split-metrics", split_metrics, "Write one CSV per metric family");
  app.add_flag("--dump-scenario", dump_scenario, "Also write the generated scenario roster");
  app.add_flag_function("-v,--verbose", [&verbosity](std::int64_t) { verbosity = 2; },
                        "Print the full summary to stdout");
  app.add_flag_function("-q,--quiet", [&verbosity](std::int64_t) { verbosity = 0; },
                        "Suppress stdout reporting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  v2x::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = v2x::parse_config_file(config_path);
  } catch (const v2x::ParseError& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const v2x::ValidationError& e) {
    std::cerr << "config validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const v2x::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (mode_override == "analytic") cfg.mode = v2x::RunMode::analytic;
    else if (mode_override == "montecarlo") cfg.mode = v2x::RunMode::montecarlo;
    else if (mode_override == "both") cfg.mode = v2x::RunMode::both;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!output_dir.empty()) cfg.output_directory = output_dir;
    cfg.validate();
  } catch (const v2x::ValidationError& e) {
    std::cerr << "config validation error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_directory, ec);
    if (ec) throw v2x::IoError("cannot create output directory: " + cfg.output_directory);

    const auto rows = v2x::run_sweep(cfg);
    const auto dir = std::filesystem::path(cfg.output_directory);

    if (split_metrics) {
      for (const char* metric : {"pdr", "throughput", "total_delay_us", "busy_probability",
                                 "collision_probability"}) {
        std::ofstream out(dir / (std::string(metric) + ".csv"), std::ios::binary);
        if (!out) throw v2x::IoError("cannot open for writing: " + (dir / metric).string());
        v2x::emit_metric_csv(rows, metric, out);
        if (!out) throw v2x::IoError("write failed: " + (dir / metric).string());
      }
    } else {
      v2x::emit_csv(rows, (dir / "sweep.csv").string());
    }

    const std::string summary = v2x::summary_text(cfg, rows);
    write_text_file((dir / "summary.txt").string(), summary);

    for (const auto& row : rows) {
      if (row.sim_report_text.empty()) continue;
      char name[64];
      std::snprintf(name, sizeof(name), "simreport_%.6gm.txt", row.threshold_m);
      write_text_file((dir / name).string(), row.sim_report_text);
    }

    if (dump_scenario) {
      const auto scenario = v2x::generate_scenario(cfg.seed, cfg.n_vehicles, cfg.road_length_m,
                                                   cfg.lane_separation_m);
      write_text_file((dir / "scenario.txt").string(), scenario.to_text());
    }

    if (verbosity >= 2) {
      std::cout << summary;
    } else if (verbosity == 1) {
      std::cout << "wrote " << (split_metrics ? "per-metric CSVs" : "sweep.csv") << " and summary.txt to "
                << dir.string() << "\n";
    }
  } catch (const v2x::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const v2x::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
