#include "lpplvv/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "lpplvv/abcde.hpp"
#include "lpplvv/error.hpp"
#include "lpplvv/io.hpp"
#include "lpplvv/parallel.hpp"

namespace fs = std::filesystem;

namespace lpplvv {

const AlgorithmOutcome* SimulationRecord::outcome(WindowClass c, Algorithm a) const {
  for (const auto& w : windows) {
    if (w.window_class != c) continue;
    for (const auto& o : w.algorithms) {
      if (o.algorithm == a) return &o;
    }
  }
  return nullptr;
}

namespace {

std::string reason_of(const Error& e) { return std::string(to_string(e.kind())) + ": " + e.what(); }

std::string run_name(std::size_t id, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%04zu.%s", id, ext);
  return buf;
}

std::string percent_label(WindowClass c) {
  switch (c) {
    case WindowClass::half: return "50%";
    case WindowClass::third: return "33%";
    case WindowClass::quarter: return "25%";
    case WindowClass::subsample: break;
  }
  return "?";
}

std::string hypothesis_label(WindowClass a, WindowClass b) {
  return "|tc_hat - tc|_" + percent_label(a) + " = |tc_hat - tc|_" + percent_label(b);
}

}  // namespace

SimulationRecord analyse_series(const ExperimentConfig& cfg, std::size_t id, TimeSeries series) {
  SimulationRecord rec;
  rec.id = id;
  rec.series = std::move(series);
  const auto& ts = *rec.series;
  try {
    rec.events = segment_drawdowns(ts, cfg.threshold);
    const auto ce = critical_event(ts, rec.events);
    rec.tc = ce.tc;
    rec.peak_value = ce.peak_value;
    rec.tc_index = ce.index;
  } catch (const Error& e) {
    rec.reason = reason_of(e);
    return rec;
  }
  rec.ok = true;
  for (auto fraction : cfg.fractions) {
    WindowOutcome w;
    w.window_class = fraction;
    try {
      w.window = analysis_window(ts, rec.events, fraction, cfg.min_window_samples);
    } catch (const Error& e) {
      w.reason = reason_of(e);
      if (rec.ok) {
        rec.ok = false;
        rec.reason = to_string(fraction) + " window: " + w.reason;
      }
    }
    rec.windows.push_back(std::move(w));
  }
  return rec;
}

std::pair<TimeSeries, double> synthetic_critical_series(const SyntheticSource& src,
                                                        std::uint64_t seed, std::size_t run) {
  if (!(src.dt > 0.0) || src.rise_samples < 10) {
    throw Error(ErrorKind::config, "synthetic source needs dt > 0 and >= 10 rise samples");
  }
  LpplParams p = src.shape;
  p.m += src.m_jitter * (2.0 * abcde::counter_uniform(seed, run, 10) - 1.0);
  p.omega += src.omega_jitter * (2.0 * abcde::counter_uniform(seed, run, 11) - 1.0);

  constexpr std::size_t kPrefix = 5;
  constexpr std::size_t kCrash = 20;
  const std::size_t tc_index = kPrefix + src.rise_samples;
  p.tc = static_cast<double>(tc_index) * src.dt;

  std::vector<double> v(tc_index + 1 + kCrash);
  const double s0 = lppl_eval(p, static_cast<double>(kPrefix) * src.dt);
  if (!(s0 > 0.0) || !(p.A > s0)) {
    throw Error(ErrorKind::config, "synthetic LPPL must rise from a positive level to A");
  }
  // A recovered drawdown whose recovery is the first LPPL sample.
  const double prefix[kPrefix] = {0.6, 0.8, 0.5, 0.6, 0.7};
  for (std::size_t i = 0; i < kPrefix; ++i) v[i] = prefix[i] * s0;
  for (std::size_t i = kPrefix; i < tc_index; ++i) {
    v[i] = lppl_eval(p, static_cast<double>(i) * src.dt);
  }
  v[tc_index] = p.A;
  for (std::size_t k = 1; k <= kCrash; ++k) {
    v[tc_index + k] = p.A * (1.0 - 0.03 * static_cast<double>(std::min<std::size_t>(k, 10)));
  }
  if (src.noise > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> noise(0.0, src.noise);
    for (std::size_t i = kPrefix; i < tc_index; ++i) v[i] += noise(gen);
  }
  return {TimeSeries(0.0, src.dt, std::move(v)), p.tc};
}

namespace {

struct Generated {
  std::vector<SimulationRecord> records;
  io::Json manifest;
};

Generated generate(const ExperimentConfig& cfg) {
  Generated out;
  if (cfg.source == "synthetic") {
    out.manifest = {{"source", "synthetic"}, {"seed", cfg.seed}, {"runs", cfg.runs}};
    out.records = indexed_map<SimulationRecord>(cfg.runs, Execution::parallel, [&](std::size_t i) {
      return analyse_series(cfg, i, synthetic_critical_series(cfg.synthetic, cfg.seed, i).first);
    });
    return out;
  }
  const auto batch_cfg = cfg.batch();
  auto batch = abcde::simulate_batch(batch_cfg);
  out.manifest = io::batch_manifest(batch_cfg, batch);
  out.records = indexed_map<SimulationRecord>(cfg.runs, Execution::parallel, [&](std::size_t i) {
    auto& run = batch.runs[i];
    if (!run.ok) {
      SimulationRecord rec;
      rec.id = i;
      rec.reason = run.reason;
      return rec;
    }
    return analyse_series(cfg, i, std::move(*run.r));
  });
  return out;
}

struct FitTask {
  std::size_t record = 0;
  std::size_t window = 0;
  std::size_t algorithm = 0;
  WindowSpec sub;
};

struct TaskOutcome {
  std::optional<FitResult> fit;
  std::string reason;
};

}  // namespace

std::vector<SimulationRecord> generate_records(const ExperimentConfig& cfg) {
  return generate(cfg).records;
}

void fit_records(const ExperimentConfig& cfg, std::vector<SimulationRecord>& records) {
  std::vector<FitTask> tasks;
  // (record, window, algorithm) -> subsample split failure
  for (std::size_t r = 0; r < records.size(); ++r) {
    auto& rec = records[r];
    if (!rec.ok) continue;
    for (std::size_t w = 0; w < rec.windows.size(); ++w) {
      auto& win = rec.windows[w];
      win.algorithms.clear();
      std::vector<WindowSpec> subs;
      std::string split_error;
      try {
        subs = subsample_windows(*win.window, cfg.subsample_count, cfg.subsample_min_len);
      } catch (const Error& e) {
        split_error = reason_of(e);
      }
      for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
        AlgorithmOutcome o;
        o.algorithm = cfg.algorithms[a];
        o.reason = split_error;
        o.fits_total = subs.size();
        win.algorithms.push_back(o);
        for (const auto& s : subs) tasks.push_back(FitTask{r, w, a, s});
      }
    }
  }

  const auto outcomes = indexed_map<TaskOutcome>(tasks.size(), Execution::parallel, [&](std::size_t i) {
    const auto& t = tasks[i];
    const auto alg = cfg.algorithms[t.algorithm];
    auto search = cfg.search(alg);
    search.execution = Execution::serial;  // parallelism lives at the task level
    TaskOutcome out;
    try {
      out.fit = fit(alg, *records[t.record].series, t.sub, search);
    } catch (const Error& e) {
      out.reason = reason_of(e);
    }
    return out;
  });

  // Group task outcomes back in task order, which is deterministic.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<const TaskOutcome*>> grouped;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    grouped[{tasks[i].record, tasks[i].window, tasks[i].algorithm}].push_back(&outcomes[i]);
  }

  for (std::size_t r = 0; r < records.size(); ++r) {
    auto& rec = records[r];
    if (!rec.ok) continue;
    for (std::size_t w = 0; w < rec.windows.size(); ++w) {
      auto& win = rec.windows[w];
      for (std::size_t a = 0; a < win.algorithms.size(); ++a) {
        auto& o = win.algorithms[a];
        if (!o.reason.empty()) continue;
        std::vector<FitResult> fits;
        std::string first_error;
        for (const auto* t : grouped[{r, w, a}]) {
          if (t->fit) {
            fits.push_back(*t->fit);
          } else if (first_error.empty()) {
            first_error = t->reason;
          }
        }
        std::size_t converged = 0;
        for (const auto& f : fits) converged += f.converged ? 1 : 0;
        o.fits_converged = converged;
        if (2 * converged < o.fits_total) {
          o.reason = "subsample-failures: " + std::to_string(o.fits_total - converged) + " of " +
                     std::to_string(o.fits_total) + " subsample fits failed" +
                     (first_error.empty() ? "" : " (" + first_error + ")");
          continue;
        }
        o.median = median_estimate(fits);
        o.tc_hat = critical_time(*o.median);
        o.abs_error = std::abs(o.tc_hat - rec.tc);
        o.ok = true;
      }
    }
    for (const auto& win : rec.windows) {
      for (const auto& o : win.algorithms) {
        if (!o.ok && rec.ok) {
          rec.ok = false;
          rec.reason = to_string(win.window_class) + " window, " + to_string(o.algorithm) +
                       ": " + o.reason;
        }
      }
    }
  }
}

std::map<WindowClass, stats::ErrorSample> error_samples(const ExperimentConfig& cfg,
                                                        const std::vector<SimulationRecord>& records,
                                                        Algorithm algorithm) {
  std::map<WindowClass, stats::ErrorSample> out;
  for (auto c : cfg.fractions) out[c].window_class = c;
  for (const auto& rec : records) {
    if (!rec.ok) continue;
    for (auto c : cfg.fractions) {
      const auto* o = rec.outcome(c, algorithm);
      if (o == nullptr || !o->ok) {
        throw Error(ErrorKind::invalid_input,
                    "record " + std::to_string(rec.id) + " has no " + to_string(algorithm) + " fit");
      }
      out[c].errors[rec.id] = o->abs_error;
    }
  }
  return out;
}

ReportTable build_report(const ExperimentConfig& cfg, const std::vector<SimulationRecord>& records,
                         Algorithm algorithm) {
  ReportTable t;
  t.algorithm = algorithm;
  t.paired = cfg.paired;
  t.holm = cfg.holm;
  t.fingerprint = fingerprint(cfg);
  for (const auto& r : records) (r.ok ? t.runs_ok : t.runs_skipped) += 1;

  const auto samples = error_samples(cfg, records, algorithm);
  t.n = samples.begin()->second.errors.size();
  if (t.n < 2) {
    throw Error(ErrorKind::experiment_failed,
                std::to_string(t.n) + " usable simulations, need at least 2 (" +
                    std::to_string(t.runs_skipped) + " skipped)");
  }
  for (const auto& [c, s] : samples) t.mae[c] = stats::mean_absolute_error(s);

  std::vector<std::pair<WindowClass, WindowClass>> pairs;
  const std::vector<WindowClass> standard{WindowClass::half, WindowClass::third,
                                          WindowClass::quarter};
  if (cfg.fractions == standard) {
    pairs = {{WindowClass::half, WindowClass::third},
             {WindowClass::half, WindowClass::quarter},
             {WindowClass::quarter, WindowClass::third}};
  } else {
    for (std::size_t i = 0; i < cfg.fractions.size(); ++i) {
      for (std::size_t j = i + 1; j < cfg.fractions.size(); ++j) {
        pairs.emplace_back(cfg.fractions[i], cfg.fractions[j]);
      }
    }
  }
  if (pairs.empty()) throw Error(ErrorKind::config, "need at least two window fractions");

  std::vector<double> raw;
  for (const auto& [a, b] : pairs) {
    stats::TTestResult tt;
    try {
      tt = stats::t_test(samples.at(a), samples.at(b), cfg.paired);
    } catch (const Error& e) {
      throw Error(ErrorKind::experiment_failed,
                  hypothesis_label(a, b) + ": " + std::string(e.what()));
    }
    raw.push_back(tt.p_value);
    t.rows.push_back(stats::HypothesisTestRow{hypothesis_label(a, b), tt.p_value, 0.0, t.n});
  }
  const auto corrected = stats::holm_bonferroni(raw, cfg.holm);
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].p_corrected = corrected[i];
  return t;
}

namespace {

void persist_records(const ExperimentConfig& cfg, const std::string& dir,
                     std::vector<SimulationRecord>& records, const io::Json& manifest) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "runs", ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + dir + "': " + ec.message());
  save_config(cfg, (fs::path(dir) / "config.json").string());
  io::write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  for (auto& rec : records) {
    if (rec.series) {
      rec.series_file = "runs/" + run_name(rec.id, "csv");
      write_csv(*rec.series, (fs::path(dir) / rec.series_file).string(),
                cfg.source == "abcde" ? "r" : "value");
    }
    io::write_text((fs::path(dir) / "runs" / run_name(rec.id, "json")).string(),
                   io::to_json(rec).dump(2) + "\n");
  }
}

void persist_report(const std::string& dir, const ReportTable& t) {
  io::write_text((fs::path(dir) / "report.csv").string(), io::report_csv(t));
  io::write_text((fs::path(dir) / "report.txt").string(), io::report_text(t));
  io::write_text((fs::path(dir) / "report.json").string(), io::to_json(t).dump(2) + "\n");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool persist) {
  cfg.validate();
  set_worker_count(cfg.workers);
  auto gen = generate(cfg);
  fit_records(cfg, gen.records);

  ExperimentResult out;
  if (persist) out.run_dir = (fs::path(cfg.output_dir) / fingerprint(cfg)).string();
  if (persist) persist_records(cfg, out.run_dir, gen.records, gen.manifest);
  out.report = build_report(cfg, gen.records, cfg.algorithms.front());
  out.records = std::move(gen.records);
  if (persist) persist_report(out.run_dir, out.report);
  return out;
}

ComparisonSummary compare(const ExperimentConfig& cfg, const std::vector<SimulationRecord>& records,
                          Algorithm numerator, Algorithm denominator) {
  const auto num = error_samples(cfg, records, numerator);
  const auto den = error_samples(cfg, records, denominator);
  ComparisonSummary out;
  out.n = num.begin()->second.errors.size();
  if (out.n < 1) throw Error(ErrorKind::experiment_failed, "no usable simulations to compare");
  double num_total = 0.0, den_total = 0.0;
  for (auto c : cfg.fractions) {
    const double mn = stats::mean_absolute_error(num.at(c));
    const double md = stats::mean_absolute_error(den.at(c));
    out.mae_phase_transition[c] = mn;
    out.mae_subordinated[c] = md;
    out.ratio[c] = md > 0.0 ? mn / md : (mn > 0.0 ? INFINITY : 1.0);
    num_total += mn;
    den_total += md;
  }
  out.aggregate_ratio = den_total > 0.0 ? num_total / den_total : (num_total > 0.0 ? INFINITY : 1.0);
  return out;
}

ComparisonSummary compare_algorithms(const ExperimentConfig& cfg, bool persist,
                                     ExperimentResult* detail) {
  auto both = cfg;
  both.algorithms = {Algorithm::subordinated, Algorithm::phase_transition};
  auto result = run_experiment(both, persist);
  auto summary = compare(both, result.records);
  if (persist) {
    io::write_text((fs::path(result.run_dir) / "comparison.json").string(),
                   io::to_json(summary).dump(2) + "\n");
  }
  if (detail != nullptr) *detail = std::move(result);
  return summary;
}

namespace {

// Integrates as far as the bound allows; a blow-up truncates the output.
std::vector<abcde::State> trajectory_until_blowup(const abcde::State& s0, const abcde::Params& p,
                                                  double dt, std::size_t substeps,
                                                  std::size_t samples, double bound) {
  const double h = dt / static_cast<double>(substeps);
  try {
    return abcde::integrate(s0, p, h, samples, {bound, substeps});
  } catch (const BlowUpError& e) {
    const std::size_t keep = (e.step() - 1) / substeps;
    if (keep == 0) return {s0};
    return abcde::integrate(s0, p, h, keep, {bound, substeps});
  }
}

}  // namespace

std::vector<std::string> emit_plot_data(const ExperimentConfig& cfg, const std::string& dir,
                                        double horizon, std::size_t stride) {
  if (stride < 1) throw Error(ErrorKind::config, "stride must be >= 1");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + dir + "': " + ec.message());

  const auto batch = cfg.batch();
  const auto samples = static_cast<std::size_t>(std::llround(horizon / batch.dt));
  const auto traj = trajectory_until_blowup(batch.initial, batch.params, batch.dt, batch.substeps,
                                            samples, batch.bound);

  const std::string fa = (fs::path(dir) / "attractor_xz.csv").string();
  const std::string fb = (fs::path(dir) / "attractor_x_y_minus_z.csv").string();
  const std::string fc = (fs::path(dir) / "r_runs.csv").string();
  const std::string meta = (fs::path(dir) / "plot_data.json").string();

  char buf[128];
  std::string a = "t,x,z\n", b = "t,x,y_minus_z\n";
  for (std::size_t i = 0; i < traj.size(); i += stride) {
    const double t = static_cast<double>(i) * batch.dt;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, traj[i].x, traj[i].z);
    a += buf;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, traj[i].x, traj[i].y - traj[i].z);
    b += buf;
  }
  io::write_text(fa, a);
  io::write_text(fb, b);

  constexpr std::size_t kRuns = 3;
  std::vector<std::vector<double>> r(kRuns);
  for (std::size_t k = 0; k < kRuns; ++k) {
    const auto tr = trajectory_until_blowup(abcde::jittered_initial(batch, k), batch.params,
                                            batch.dt, batch.substeps, samples, batch.bound);
    for (const auto& s : tr) r[k].push_back(s.r);
  }
  std::string c = "t,r_run0,r_run1,r_run2\n";
  for (std::size_t i = 0; i <= samples; i += stride) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(i) * batch.dt);
    c += buf;
    for (std::size_t k = 0; k < kRuns; ++k) {
      c += ',';
      if (i < r[k].size()) {
        std::snprintf(buf, sizeof buf, "%.17g", r[k][i]);
        c += buf;
      }
    }
    c += '\n';
  }
  io::write_text(fc, c);

  io::Json m;
  m["preset"] = batch.preset;
  m["seed"] = batch.seed;
  m["dt"] = batch.dt;
  m["stride"] = stride;
  m["horizon"] = horizon;
  m["initial"] = {batch.initial.x, batch.initial.y, batch.initial.z, batch.initial.r,
                  batch.initial.theta};
  m["files"] = {
      {"attractor_xz.csv",
       {{"description", "Lorenz subsystem projected on (x, z), unjittered initial state"},
        {"columns", {"t", "x", "z"}},
        {"rows", (traj.size() + stride - 1) / stride}}},
      {"attractor_x_y_minus_z.csv",
       {{"description", "projection on (x, y - z), same trajectory"},
        {"columns", {"t", "x", "y_minus_z"}},
        {"rows", (traj.size() + stride - 1) / stride}}},
      {"r_runs.csv",
       {{"description", "r(t) for runs 0-2 of the seeded batch; empty cells after a blow-up"},
        {"columns", {"t", "r_run0", "r_run1", "r_run2"}},
        {"run_samples", {r[0].size(), r[1].size(), r[2].size()}}}}};
  io::write_text(meta, m.dump(2) + "\n");
  return {fa, fb, fc, meta};
}

}  // namespace lpplvv
