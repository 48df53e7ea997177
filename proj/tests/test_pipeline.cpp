#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpplvv/error.hpp"
#include "lpplvv/io.hpp"
#include "lpplvv/pipeline.hpp"

using namespace lpplvv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lpplvv_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// Synthetic LPPL rises with the true tc on every subsample's grid.
ExperimentConfig oracle_config(std::size_t runs) {
  ExperimentConfig cfg;
  cfg.source = "synthetic";
  cfg.runs = runs;
  cfg.synthetic.m_jitter = 0.02;
  cfg.synthetic.omega_jitter = 2.0;
  cfg.subordinated_search.tc_grid.max_offset_fraction = 1.5;
  cfg.phase_transition_search.tc_grid.max_offset_fraction = 1.5;
  cfg.subsample_count = 4;
  return cfg;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("synthetic critical series") {
  const SyntheticSource src;
  const auto [ts, tc] = synthetic_critical_series(src, 1, 0);
  CHECK(tc == 125.0);
  CHECK(ts.size() == 146);
  for (std::size_t i = 6; i <= 125; ++i) CHECK(ts[i] > ts[i - 1]);
  const auto ce = critical_event(ts, 0.15);
  CHECK(ce.tc == tc);
  CHECK(ce.peak_value == src.shape.A);

  SyntheticSource bad = src;
  bad.shape.B = -2.0;
  CHECK_THROWS_AS(synthetic_critical_series(bad, 1, 0), Error);
}

TEST_CASE("analyse_series windows") {
  ExperimentConfig cfg;
  const auto [ts, tc] = synthetic_critical_series(cfg.synthetic, 1, 0);
  const auto rec = analyse_series(cfg, 3, ts);
  REQUIRE(rec.ok);
  CHECK(rec.id == 3);
  CHECK(rec.tc == tc);
  REQUIRE(rec.windows.size() == 3);
  CHECK(rec.windows[2].window->end_index <= rec.windows[1].window->end_index);
  CHECK(rec.windows[1].window->end_index <= rec.windows[0].window->end_index);
  CHECK(rec.windows[0].window->end_index < rec.tc_index);

  cfg.min_window_samples = 200;
  const auto short_rec = analyse_series(cfg, 0, ts);
  CHECK_FALSE(short_rec.ok);
  CHECK(short_rec.reason.find("too-short") != std::string::npos);

  const auto flat = analyse_series(cfg, 0, TimeSeries(0.0, 1.0, {1, 2, 3, 4}));
  CHECK_FALSE(flat.ok);
  CHECK(flat.reason.rfind("not-enough-events", 0) == 0);
}

TEST_CASE("structural smoke run with provenance on disk") {
  auto cfg = oracle_config(2);
  cfg.synthetic.noise = 1e-4;
  const auto dir = scratch_dir("smoke");
  cfg.output_dir = dir.string();
  const auto res = run_experiment(cfg);
  CHECK(res.report.rows.size() == 3);
  CHECK(res.report.n == 2);
  CHECK(res.report.runs_ok + res.report.runs_skipped == cfg.runs);
  const fs::path run_dir = res.run_dir;
  CHECK(run_dir == dir / fingerprint(cfg));
  for (const char* f : {"config.json", "manifest.json", "report.csv", "report.txt", "report.json",
                        "runs/run_0000.json", "runs/run_0000.csv", "runs/run_0001.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(run_dir / f));
  }
  const auto saved = load_config((run_dir / "config.json").string());
  CHECK(fingerprint(saved) == fingerprint(cfg));
  const auto table = io::read_report_csv((run_dir / "report.csv").string());
  REQUIRE(table.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(table.rows[i].label == res.report.rows[i].label);
    CHECK(table.rows[i].p_raw == doctest::Approx(res.report.rows[i].p_raw).epsilon(0.01));
  }
  fs::remove_all(dir);
}

TEST_CASE("oracle injection: MAE within one grid step") {
  const auto cfg = oracle_config(4);
  const auto res = run_experiment(cfg, false);
  CHECK(res.report.n == 4);
  for (const auto& [c, mae] : res.report.mae) {
    CAPTURE(to_string(c));
    CHECK(mae <= cfg.subordinated_search.tc_grid.step * cfg.synthetic.dt);
  }
  SUBCASE("window ordering and equal N") {
    for (const auto& rec : res.records) {
      REQUIRE(rec.ok);
      const auto& w = rec.windows;
      CHECK(w[2].window->end_index <= w[1].window->end_index);
      CHECK(w[1].window->end_index <= w[0].window->end_index);
      CHECK(w[0].window->end_index < rec.tc_index);
    }
    for (const auto& row : res.report.rows) CHECK(row.n == res.report.n);
  }
}

TEST_CASE("skips carry reasons and conserve the run count") {
  auto cfg = oracle_config(5);
  cfg.min_window_samples = 110;  // only the half window is this long
  const auto recs = generate_records(cfg);
  REQUIRE(recs.size() == 5);
  for (const auto& r : recs) {
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.reason.empty());
  }
  try {
    run_experiment(cfg, false);
    FAIL("expected experiment_failed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::experiment_failed);
  }
}

TEST_CASE("comparison") {
  const auto cfg = oracle_config(3);
  ExperimentResult detail;
  const auto summary = compare_algorithms(cfg, false, &detail);
  CHECK(summary.n == 3);
  for (const auto& [c, mae] : summary.mae_subordinated) CHECK(mae <= 1.0);
  CHECK(summary.aggregate_ratio > 1.0);

  const auto self = compare(cfg, detail.records, Algorithm::subordinated, Algorithm::subordinated);
  CHECK(self.aggregate_ratio == 1.0);
  for (const auto& [c, r] : self.ratio) CHECK(r == 1.0);
}

TEST_CASE("full pipeline is seed-deterministic") {
  auto cfg = oracle_config(3);
  cfg.synthetic.noise = 1e-3;
  // Same output_dir both times (it is recorded in config.json).
  const auto out = scratch_dir("det"), first = scratch_dir("det_first");
  cfg.output_dir = out.string();
  const auto a = run_experiment(cfg);
  fs::rename(a.run_dir, first);
  const auto b = run_experiment(cfg);
  CHECK(io::to_json(a.report) == io::to_json(b.report));
  CHECK(tree(first) == tree(b.run_dir));

  cfg.seed += 1;
  const auto c = run_experiment(cfg, false);
  CHECK(io::to_json(c.report) != io::to_json(a.report));
  fs::remove_all(out);
  fs::remove_all(first);
}

TEST_CASE("ABCDE batch records are deterministic") {
  ExperimentConfig cfg;
  cfg.runs = 3;
  cfg.abcde.horizon = 40.0;
  const auto a = generate_records(cfg);
  const auto b = generate_records(cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(io::to_json(a[i]) == io::to_json(b[i]));
    CHECK(a[i].ok + !a[i].ok == 1);
    if (!a[i].ok) CHECK_FALSE(a[i].reason.empty());
  }
}

TEST_CASE("plot data") {
  ExperimentConfig cfg;
  const auto d1 = scratch_dir("plot1"), d2 = scratch_dir("plot2");
  const auto files = emit_plot_data(cfg, d1.string(), 60.0, 4);
  emit_plot_data(cfg, d2.string(), 60.0, 4);
  REQUIRE(files.size() == 4);
  for (const auto& f : files) {
    const auto name = fs::path(f).filename();
    CHECK(slurp(d1 / name) == slurp(d2 / name));
  }

  // (b) is exactly (x, y - z) of the integrated trajectory.
  const auto batch = cfg.batch();
  const auto traj = abcde::integrate(batch.initial, batch.params, batch.dt / batch.substeps, 40,
                                     {batch.bound, batch.substeps});
  std::istringstream in(slurp(d1 / "attractor_x_y_minus_z.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y_minus_z");
  for (std::size_t i = 0; i <= 40; i += 4) {
    REQUIRE(std::getline(in, line));
    double t, x, ymz;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &ymz) == 3);
    CHECK(x == traj[i].x);
    CHECK(ymz == traj[i].y - traj[i].z);
  }

  // (a) is a genuine two-lobe Lorenz projection under the default preset.
  std::istringstream ina(slurp(d1 / "attractor_xz.csv"));
  std::getline(ina, line);
  int positive = 0, negative = 0;
  while (std::getline(ina, line)) {
    double t, x, z;
    std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &z);
    (x > 0 ? positive : negative) += 1;
  }
  CHECK(positive > 100);
  CHECK(negative > 100);
  fs::remove_all(d1);
  fs::remove_all(d2);
}
