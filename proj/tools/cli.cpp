#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "lpplvv/config.hpp"
#include "lpplvv/error.hpp"
#include "lpplvv/io.hpp"
#include "lpplvv/parallel.hpp"
#include "lpplvv/pipeline.hpp"

namespace fs = std::filesystem;

namespace lpplvv::cli {

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int workers = 0;
  bool json = false;
  int verbosity = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "Experiment config (JSON); defaults when omitted");
  sub->add_option("--set", c.overrides, "Override a config key, e.g. --set abcde.epsilon=4.94")
      ->type_name("KEY=VALUE");
  sub->add_option("--workers", c.workers, "Cap the worker pool (0 = all cores)");
  sub->add_flag("--json", c.json, "Print a machine-readable JSON summary");
  sub->add_flag("-v,--verbose", c.verbosity, "More diagnostics on stderr");
}

ExperimentConfig resolve_config(const Common& c) {
  nlohmann::json doc = nlohmann::json::object();
  if (!c.config_path.empty()) {
    if (!fs::exists(c.config_path)) {
      throw Error(ErrorKind::config, "config file '" + c.config_path + "' does not exist");
    }
    doc = nlohmann::json(to_json(load_config(c.config_path)));
  }
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::config, "--set expects KEY=VALUE, got '" + kv + "'");
    }
    apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto cfg = config_from_json(doc);
  if (c.workers > 0) cfg.workers = c.workers;
  set_worker_count(cfg.workers);
  return cfg;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::invalid_input:
      return config_error;
    case ErrorKind::io:
      return io_error;
    default:
      return experiment_failed;
  }
}

void print_artifact(std::ostream& out, bool json, const std::string& path, io::Json extra = {}) {
  if (json) {
    io::Json j;
    j["artifact"] = path;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    out << j.dump() << '\n';
  } else {
    out << path << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LPPL critical-time forecasting: ABCDE simulation, fitting and validation", "lpplvv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lpplvv 1.0.0");

  Common simulate_opts, fit_opts, vnv_opts, compare_opts, plot_opts, report_opts;

  auto* simulate = app.add_subcommand("simulate", "Simulate a seeded batch of ABCDE r-series");
  add_common(simulate, simulate_opts);
  std::string simulate_out;
  simulate->add_option("-o,--out", simulate_out, "Output directory (default <output_dir>/<fingerprint>/batch)");

  auto* fit_cmd = app.add_subcommand("fit", "Fit one series window with one algorithm");
  add_common(fit_cmd, fit_opts);
  std::string series_path, fit_out, algorithm_name = "subordinated", fraction_name;
  long start_index = -1, end_index = -1;
  fit_cmd->add_option("-s,--series", series_path, "Series CSV (time,value)")->required();
  fit_cmd->add_option("--start", start_index, "First window index");
  fit_cmd->add_option("--end", end_index, "Last window index (inclusive)");
  fit_cmd->add_option("--fraction", fraction_name,
                      "Build the window from drawdowns instead: half, third or quarter")
      ->check(CLI::IsMember({"half", "third", "quarter"}));
  fit_cmd->add_option("-a,--algorithm", algorithm_name, "subordinated or phase_transition")
      ->check(CLI::IsMember({"subordinated", "phase_transition", "phase-transition"}));
  fit_cmd->add_option("-o,--out", fit_out, "Output JSON (default <series>.fit.json)");

  auto* vnv = app.add_subcommand("vnv", "Run the full validation experiment");
  add_common(vnv, vnv_opts);

  auto* compare_cmd = app.add_subcommand("compare", "Compare both algorithms on identical windows");
  add_common(compare_cmd, compare_opts);

  auto* plot = app.add_subcommand("plot-data", "Write attractor and r(t) datasets as CSV");
  add_common(plot, plot_opts);
  std::string plot_out;
  double plot_horizon = 100.0;
  std::size_t plot_stride = 10;
  plot->add_option("-o,--out", plot_out, "Output directory (default <output_dir>/plot-data)");
  plot->add_option("--horizon", plot_horizon, "Simulated time span")->check(CLI::PositiveNumber);
  plot->add_option("--stride", plot_stride, "Keep every n-th sample")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Render a persisted report as a text table");
  add_common(report, report_opts);
  std::string report_path;
  report->add_option("-r,--report", report_path, "report.csv or the run directory holding it")
      ->required();

  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  try {
    app.parse(argv_rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return ok;
  } catch (const CLI::ParseError& e) {
    // Subcommand --help surfaces here with the subcommand already selected.
    if (e.get_exit_code() == 0) {
      for (auto* sub : app.get_subcommands()) {
        out << sub->help();
        return ok;
      }
      out << app.help();
      return ok;
    }
    err << "lpplvv: " << e.what() << '\n';
    return config_error;
  }

  try {
    if (simulate->parsed()) {
      const auto cfg = resolve_config(simulate_opts);
      const auto batch_cfg = cfg.batch();
      const std::string dir = simulate_out.empty()
                                  ? (fs::path(cfg.output_dir) / fingerprint(cfg) / "batch").string()
                                  : simulate_out;
      const auto batch = abcde::simulate_batch(batch_cfg);
      fs::create_directories(dir);
      for (const auto& r : batch.runs) {
        if (!r.ok) continue;
        char name[32];
        std::snprintf(name, sizeof name, "run_%04zu.csv", r.id);
        write_csv(*r.r, (fs::path(dir) / name).string(), "r");
      }
      const std::string manifest = (fs::path(dir) / "manifest.json").string();
      io::write_text(manifest, io::batch_manifest(batch_cfg, batch).dump(2) + "\n");
      if (simulate_opts.verbosity > 0) {
        err << batch.runs.size() - batch.failed() << " of " << batch.runs.size()
            << " runs completed\n";
      }
      print_artifact(out, simulate_opts.json, manifest,
                     {{"runs", batch.runs.size()}, {"failed", batch.failed()}});
      return ok;
    }

    if (fit_cmd->parsed()) {
      const auto cfg = resolve_config(fit_opts);
      const auto ts = read_csv(series_path);
      WindowSpec w;
      if (!fraction_name.empty()) {
        const auto events = segment_drawdowns(ts, cfg.threshold);
        w = analysis_window(ts, events, window_class_from_string(fraction_name),
                            cfg.min_window_samples);
      } else {
        if (start_index < 0 || end_index < 0) {
          throw Error(ErrorKind::config, "fit needs --start and --end, or --fraction");
        }
        if (start_index >= end_index || static_cast<std::size_t>(end_index) >= ts.size()) {
          throw Error(ErrorKind::config, "window indices outside the series");
        }
        w = WindowSpec{static_cast<std::size_t>(start_index), static_cast<std::size_t>(end_index),
                       WindowClass::subsample, -1};
      }
      const auto alg = algorithm_from_string(algorithm_name);
      const auto result = fit(alg, ts, w, cfg.search(alg));
      const std::string path = fit_out.empty() ? series_path + ".fit.json" : fit_out;
      const auto j = io::to_json(result);
      io::write_text(path, j.dump(2) + "\n");
      print_artifact(out, fit_opts.json, path, {{"fit", j}});
      return ok;
    }

    if (vnv->parsed()) {
      const auto cfg = resolve_config(vnv_opts);
      const auto result = run_experiment(cfg);
      const std::string path = (fs::path(result.run_dir) / "report.csv").string();
      if (vnv_opts.json) {
        print_artifact(out, true, path, {{"report", io::to_json(result.report)}});
      } else {
        out << io::report_text(result.report);
        print_artifact(out, false, path);
      }
      return ok;
    }

    if (compare_cmd->parsed()) {
      const auto cfg = resolve_config(compare_opts);
      ExperimentResult detail;
      const auto summary = compare_algorithms(cfg, true, &detail);
      const std::string path = (fs::path(detail.run_dir) / "comparison.json").string();
      if (compare_opts.json) {
        print_artifact(out, true, path, {{"comparison", io::to_json(summary)}});
      } else {
        for (const auto& [c, r] : summary.ratio) {
          out << to_string(c) << ": phase_transition/subordinated MAE ratio " << r << '\n';
        }
        out << "aggregate ratio " << summary.aggregate_ratio << " over n=" << summary.n << '\n';
        print_artifact(out, false, path);
      }
      return ok;
    }

    if (plot->parsed()) {
      const auto cfg = resolve_config(plot_opts);
      const std::string dir =
          plot_out.empty() ? (fs::path(cfg.output_dir) / "plot-data").string() : plot_out;
      const auto files = emit_plot_data(cfg, dir, plot_horizon, plot_stride);
      print_artifact(out, plot_opts.json, files.back(), {{"files", files}});
      return ok;
    }

    if (report->parsed()) {
      std::string path = report_path;
      if (fs::is_directory(path)) path = (fs::path(path) / "report.csv").string();
      if (!fs::exists(path)) throw Error(ErrorKind::io, "no report at '" + path + "'");
      const auto table = io::read_report_csv(path);
      if (report_opts.json) {
        print_artifact(out, true, path, {{"report", io::to_json(table)}});
      } else {
        out << io::report_text(table);
      }
      return ok;
    }
  } catch (const Error& e) {
    err << "lpplvv: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "lpplvv: io: " << e.what() << '\n';
    return io_error;
  } catch (const std::exception& e) {
    err << "lpplvv: " << e.what() << '\n';
    return experiment_failed;
  }
  return ok;
}

}  // namespace lpplvv::cli
