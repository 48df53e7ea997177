#pragma once

// End-to-end validation run: simulate, segment, window, fit, aggregate,
// test. Every intermediate artifact is persisted under a directory named by
// the configuration fingerprint.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpplvv/config.hpp"
#include "lpplvv/estimators.hpp"
#include "lpplvv/stats.hpp"
#include "lpplvv/timeseries.hpp"

namespace lpplvv {

struct AlgorithmOutcome {
  Algorithm algorithm = Algorithm::subordinated;
  bool ok = false;
  std::string reason;
  std::optional<FitParams> median;
  double tc_hat = 0.0;
  double abs_error = 0.0;  // |tc_hat - tc| in time units
  std::size_t fits_total = 0;
  std::size_t fits_converged = 0;
};

struct WindowOutcome {
  WindowClass window_class = WindowClass::half;
  std::optional<WindowSpec> window;
  std::string reason;  // set when no window could be built
  std::vector<AlgorithmOutcome> algorithms;
};

struct SimulationRecord {
  std::size_t id = 0;
  bool ok = false;
  std::string reason;  // "<error-kind>: detail" when skipped
  std::vector<DrawdownEvent> events;
  double tc = 0.0;
  double peak_value = 0.0;
  std::size_t tc_index = 0;
  std::vector<WindowOutcome> windows;
  std::optional<TimeSeries> series;  // not serialized into the record JSON
  std::string series_file;

  const AlgorithmOutcome* outcome(WindowClass c, Algorithm a) const;
};

struct ReportTable {
  Algorithm algorithm = Algorithm::subordinated;
  std::vector<stats::HypothesisTestRow> rows;
  std::map<WindowClass, double> mae;
  std::size_t n = 0;
  std::size_t runs_ok = 0;
  std::size_t runs_skipped = 0;
  bool paired = true;
  stats::HolmMode holm = stats::HolmMode::standard;
  std::string fingerprint;
};

struct ExperimentResult {
  ReportTable report;
  std::vector<SimulationRecord> records;
  std::string run_dir;  // empty when persistence was disabled
};

// Builds the analysis inputs for one series: events, critical event and
// one window per fraction. Failures become skip reasons on the record.
SimulationRecord analyse_series(const ExperimentConfig& cfg, std::size_t id, TimeSeries series);

// Synthetic critical event: a small recovered drawdown, an LPPL rise that
// peaks exactly at tc and a crash afterwards. Returns the series and tc.
std::pair<TimeSeries, double> synthetic_critical_series(const SyntheticSource& src,
                                                        std::uint64_t seed, std::size_t run);

// Loads the configured source (ABCDE batch or synthetic) as analysed records.
std::vector<SimulationRecord> generate_records(const ExperimentConfig& cfg);

// Fits every (record, window, subsample, algorithm) task and fills in the
// median estimates and forecast errors.
void fit_records(const ExperimentConfig& cfg, std::vector<SimulationRecord>& records);

// Per-class error samples for `algorithm` over simulations that succeeded
// for every fraction (and every selected algorithm), keyed by run id.
std::map<WindowClass, stats::ErrorSample> error_samples(const ExperimentConfig& cfg,
                                                        const std::vector<SimulationRecord>& records,
                                                        Algorithm algorithm);

ReportTable build_report(const ExperimentConfig& cfg, const std::vector<SimulationRecord>& records,
                         Algorithm algorithm);

// Full methodology. Throws experiment_failed when fewer than 2 simulations
// are usable. `persist` writes artifacts under output_dir/<fingerprint>.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool persist = true);

struct ComparisonSummary {
  std::map<WindowClass, double> mae_subordinated;
  std::map<WindowClass, double> mae_phase_transition;
  std::map<WindowClass, double> ratio;  // phase_transition / subordinated
  double aggregate_ratio = 0.0;         // over all classes pooled
  std::size_t n = 0;
};

ComparisonSummary compare(const ExperimentConfig& cfg, const std::vector<SimulationRecord>& records,
                          Algorithm numerator = Algorithm::phase_transition,
                          Algorithm denominator = Algorithm::subordinated);

// Runs both fitters on identical windows and reports MAE ratios.
ComparisonSummary compare_algorithms(const ExperimentConfig& cfg, bool persist = true,
                                     ExperimentResult* detail = nullptr);

// Attractor and r(t) datasets: (a) Lorenz x-z projection, (b) (x, y - z),
// (c) r(t) for three seeded runs. Columns are described in plot_data.json.
// Returns the written file paths.
std::vector<std::string> emit_plot_data(const ExperimentConfig& cfg, const std::string& dir,
                                        double horizon, std::size_t stride);

}  // namespace lpplvv
