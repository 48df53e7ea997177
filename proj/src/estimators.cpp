#include "lpplvv/estimators.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "lpplvv/error.hpp"

namespace lpplvv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(Algorithm a) {
  return a == Algorithm::subordinated ? "subordinated" : "phase_transition";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "subordinated") return Algorithm::subordinated;
  if (s == "phase_transition" || s == "phase-transition") return Algorithm::phase_transition;
  throw Error(ErrorKind::config, "unknown algorithm '" + s + "'");
}

double critical_time(const FitParams& p) {
  return std::visit(
      [](const auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, LpplParams>) {
          return v.tc;
        } else {
          return v.residual.tc;
        }
      },
      p);
}

std::vector<double> tc_candidates(const TimeSeries& ts, const WindowSpec& window,
                                  const TcGrid& grid) {
  if (!(grid.step > 0.0) || !(grid.min_offset > 0.0) || !(grid.max_offset_fraction > 0.0)) {
    throw Error(ErrorKind::config, "tc grid needs positive step, min offset and horizon");
  }
  const double max_offset =
      grid.max_offset_fraction * static_cast<double>(window.length());
  std::vector<double> out;
  const double t_end = ts.time(window.end_index);
  for (std::size_t k = 0;; ++k) {
    const double offset = grid.min_offset + static_cast<double>(k) * grid.step;
    if (offset > max_offset + 1e-9) break;
    out.push_back(t_end + offset * ts.dt());
  }
  if (out.empty()) {
    throw Error(ErrorKind::too_short, "window too short for any tc candidate");
  }
  return out;
}

namespace {

TcProfilePoint fit_subordinated_at(const TimeSeries& ts, const WindowSpec& window, double tc,
                                   const SearchConfig& cfg) {
  TcProfilePoint out;
  out.tc = tc;
  const LinearSubproblem sub(ts, window, tc);
  const Interval box[2] = {cfg.m_bounds, cfg.omega_bounds};
  const Objective objective = [&sub](std::span<const double> x) {
    return sub.profile_sse(x[0], x[1]);
  };
  double best = kInf;
  for (const auto& start : lattice_points(box, cfg.lattice_per_axis)) {
    const auto r = nelder_mead_bounded(objective, start, box, cfg.optimizer);
    out.evaluations += r.evals;
    if (r.f < best) {
      best = r.f;
      out.x = r.x;
      out.converged = r.converged;
    }
  }
  out.feasible = std::isfinite(best);
  out.sse = best;
  return out;
}

// Log-divergent residual fit at one tc; B enters linearly and is solved in
// closed form for every (omega, psi, D).
TcProfilePoint fit_log_divergent_at(const TimeSeries& ts, const WindowSpec& window,
                                    const std::vector<double>& residuals, double tc,
                                    const SearchConfig& cfg) {
  TcProfilePoint out;
  out.tc = tc;
  std::vector<double> log_tau;
  log_tau.reserve(window.sample_count());
  for (std::size_t i = window.start_index; i <= window.end_index; ++i) {
    const double tau = tc - ts.time(i);
    if (!(tau > 0.0)) throw Error(ErrorKind::domain, "tc inside the window");
    log_tau.push_back(std::log(tau));
  }
  const Objective objective = [&](std::span<const double> x) {
    const double omega = x[0], psi = x[1], amp = x[2];
    double gy = 0.0, gg = 0.0;
    for (std::size_t i = 0; i < log_tau.size(); ++i) {
      const double g = log_tau[i] * (1.0 + amp * std::cos(omega * log_tau[i] + psi));
      gy += g * residuals[i];
      gg += g * g;
    }
    if (!(gg > 0.0)) return kInf;
    const double b = gy / gg;
    double acc = 0.0;
    for (std::size_t i = 0; i < log_tau.size(); ++i) {
      const double g = log_tau[i] * (1.0 + amp * std::cos(omega * log_tau[i] + psi));
      const double e = residuals[i] - b * g;
      acc += e * e;
    }
    return acc;
  };

  const Interval box[3] = {cfg.omega_bounds, Interval{0.0, 2.0 * std::numbers::pi},
                           cfg.amplitude_bounds};
  // Same start count as the subordinated search: a lattice over (omega, psi)
  // with D at the middle of its range.
  const Interval start_box[2] = {box[0], box[1]};
  const double amp_mid = 0.5 * (cfg.amplitude_bounds.lo + cfg.amplitude_bounds.hi);
  double best = kInf;
  for (const auto& s : lattice_points(start_box, cfg.lattice_per_axis)) {
    const double start[3] = {s[0], s[1], amp_mid};
    const auto r = nelder_mead_bounded(objective, start, box, cfg.optimizer);
    out.evaluations += r.evals;
    if (r.f < best) {
      best = r.f;
      out.x = r.x;
      out.converged = r.converged;
    }
  }
  out.feasible = std::isfinite(best);
  out.sse = best;
  return out;
}

const TcProfilePoint& best_point(const std::vector<TcProfilePoint>& profile) {
  const TcProfilePoint* best = nullptr;
  for (const auto& p : profile) {
    if (p.feasible && (best == nullptr || p.sse < best->sse)) best = &p;
  }
  if (best == nullptr) {
    throw Error(ErrorKind::fit_failed, "no feasible tc candidate");
  }
  return *best;
}

std::size_t total_evaluations(const std::vector<TcProfilePoint>& profile) {
  std::size_t n = 0;
  for (const auto& p : profile) n += p.evaluations;
  return n;
}

}  // namespace

std::vector<TcProfilePoint> profile_subordinated(const TimeSeries& ts, const WindowSpec& window,
                                                 const std::vector<double>& tcs,
                                                 const SearchConfig& cfg, Execution ex) {
  return indexed_map<TcProfilePoint>(
      tcs.size(), ex, [&](std::size_t i) { return fit_subordinated_at(ts, window, tcs[i], cfg); });
}

std::vector<TcProfilePoint> profile_log_divergent(const TimeSeries& ts, const WindowSpec& window,
                                                  const std::vector<double>& residuals,
                                                  const std::vector<double>& tcs,
                                                  const SearchConfig& cfg, Execution ex) {
  if (residuals.size() != window.sample_count()) {
    throw Error(ErrorKind::invalid_input, "residuals do not match the window");
  }
  return indexed_map<TcProfilePoint>(tcs.size(), ex, [&](std::size_t i) {
    return fit_log_divergent_at(ts, window, residuals, tcs[i], cfg);
  });
}

FitResult fit_subordinated(const TimeSeries& ts, const WindowSpec& window,
                           const SearchConfig& cfg) {
  const auto tcs = tc_candidates(ts, window, cfg.tc_grid);
  const auto profile = profile_subordinated(ts, window, tcs, cfg, cfg.execution);
  const auto& best = best_point(profile);

  const auto lin = solve_linear_params(ts, window, best.tc, best.x[0], best.x[1]);
  FitResult out;
  out.algorithm = Algorithm::subordinated;
  out.params = LpplParams{lin.A, lin.B, lin.C, best.x[0], best.x[1], lin.psi, best.tc};
  out.sse = lin.sse;
  out.window = window;
  out.converged = best.converged;
  out.evaluations = total_evaluations(profile);
  return out;
}

ExpTrendParams fit_exp_trend(const TimeSeries& ts, const WindowSpec& window) {
  if (window.end_index >= ts.size() || window.start_index > window.end_index) {
    throw Error(ErrorKind::invalid_input, "window outside the series");
  }
  if (window.sample_count() < 4) {
    throw Error(ErrorKind::too_short, "exponential trend needs at least 4 samples");
  }
  const std::size_t n = window.sample_count();
  const double t_ref = ts.time(window.end_index);
  std::vector<double> tau(n), y(n);
  double y_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    tau[k] = ts.time(window.start_index + k) - t_ref;
    y[k] = ts[window.start_index + k];
    y_mean += y[k];
  }
  y_mean /= static_cast<double>(n);

  double yy = 0.0;
  for (double v : y) yy += (v - y_mean) * (v - y_mean);
  if (!(yy > 0.0)) return ExpTrendParams{y_mean, 0.0, 0.0, t_ref};

  struct Solve {
    double A, B, sse;
  };
  // Centred two-column least squares for fixed m.
  auto solve = [&](double m) -> Solve {
    std::vector<double> g(n);
    double g_mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      g[k] = std::exp(-m * tau[k]);
      g_mean += g[k];
    }
    g_mean /= static_cast<double>(n);
    double gg = 0.0, gy = 0.0, g_scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      gg += (g[k] - g_mean) * (g[k] - g_mean);
      gy += (g[k] - g_mean) * (y[k] - y_mean);
      g_scale += g[k] * g[k];
    }
    if (!(gg > 1e-20 * g_scale)) return {y_mean, 0.0, kInf};
    const double B = gy / gg;
    const double A = y_mean - B * g_mean;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = y[k] - A - B * g[k];
      acc += e * e;
    }
    return {A, B, acc};
  };

  const double duration = ts.time(window.end_index) - ts.time(window.start_index);
  constexpr int kGrid = 200;
  constexpr double kRate = 20.0;  // max |m| * duration
  int best_k = -1;
  double best_sse = kInf;
  for (int k = 0; k <= kGrid; ++k) {
    const double z = -kRate + 2.0 * kRate * k / kGrid;
    if (k == kGrid / 2) continue;  // m = 0 is collinear with the constant
    const double s = solve(z / duration).sse;
    if (s < best_sse) {
      best_sse = s;
      best_k = k;
    }
  }
  if (best_k < 0) return ExpTrendParams{y_mean, 0.0, 0.0, t_ref};

  const double lo = (-kRate + 2.0 * kRate * std::max(best_k - 1, 0) / kGrid) / duration;
  const double hi = (-kRate + 2.0 * kRate * std::min(best_k + 1, kGrid) / kGrid) / duration;
  const auto [m_star, sse_star] = boost::math::tools::brent_find_minima(
      [&](double m) { return solve(m).sse; }, lo, hi, std::numeric_limits<double>::digits);
  const double m_best = sse_star <= best_sse ? m_star : (-kRate + 2.0 * kRate * best_k / kGrid) / duration;
  const auto fin = solve(m_best);
  return ExpTrendParams{fin.A, fin.B, m_best, t_ref};
}

FitResult fit_phase_transition(const TimeSeries& ts, const WindowSpec& window,
                               const SearchConfig& cfg) {
  const auto trend = fit_exp_trend(ts, window);
  std::vector<double> residuals;
  residuals.reserve(window.sample_count());
  for (std::size_t i = window.start_index; i <= window.end_index; ++i) {
    residuals.push_back(ts[i] - exp_trend_eval(trend, ts.time(i)));
  }
  const auto tcs = tc_candidates(ts, window, cfg.tc_grid);
  const auto profile = profile_log_divergent(ts, window, residuals, tcs, cfg, cfg.execution);
  const auto& best = best_point(profile);

  LogDivergentParams res{0.0, best.x[2], best.x[0], best.x[1], best.tc};
  double gy = 0.0, gg = 0.0;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    const double g = log_divergent_eval(LogDivergentParams{1.0, res.D, res.omega, res.psi, res.tc},
                                        ts.time(window.start_index + k));
    gy += g * residuals[k];
    gg += g * g;
  }
  res.B = gg > 0.0 ? gy / gg : 0.0;
  res.psi = normalize_phase(res.psi);

  double total = 0.0;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    const double e = residuals[k] - log_divergent_eval(res, ts.time(window.start_index + k));
    total += e * e;
  }

  FitResult out;
  out.algorithm = Algorithm::phase_transition;
  out.params = PhaseTransitionParams{trend, res};
  out.sse = total;
  out.window = window;
  out.converged = best.converged;
  out.evaluations = total_evaluations(profile);
  return out;
}

FitResult fit(Algorithm algorithm, const TimeSeries& ts, const WindowSpec& window,
              const SearchConfig& cfg) {
  return algorithm == Algorithm::subordinated ? fit_subordinated(ts, window, cfg)
                                              : fit_phase_transition(ts, window, cfg);
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class Get>
double median_field(const std::vector<const FitResult*>& fits, Get&& get) {
  std::vector<double> v;
  v.reserve(fits.size());
  for (const auto* f : fits) v.push_back(get(*f));
  return median_of(std::move(v));
}

}  // namespace

FitParams median_estimate(const std::vector<FitResult>& fits) {
  std::vector<const FitResult*> ok;
  for (const auto& f : fits) {
    if (f.algorithm != fits.front().algorithm) {
      throw Error(ErrorKind::invalid_input, "median over fits from different algorithms");
    }
    if (f.converged) ok.push_back(&f);
  }
  if (ok.empty()) throw Error(ErrorKind::no_estimate, "no converged fit to take a median of");

  if (ok.front()->algorithm == Algorithm::subordinated) {
    auto get = [](const FitResult& f) { return std::get<LpplParams>(f.params); };
    LpplParams p;
    p.A = median_field(ok, [&](const FitResult& f) { return get(f).A; });
    p.B = median_field(ok, [&](const FitResult& f) { return get(f).B; });
    p.C = median_field(ok, [&](const FitResult& f) { return get(f).C; });
    p.m = median_field(ok, [&](const FitResult& f) { return get(f).m; });
    p.omega = median_field(ok, [&](const FitResult& f) { return get(f).omega; });
    p.psi = median_field(ok, [&](const FitResult& f) { return normalize_phase(get(f).psi); });
    p.tc = median_field(ok, [&](const FitResult& f) { return get(f).tc; });
    return p;
  }
  auto get = [](const FitResult& f) { return std::get<PhaseTransitionParams>(f.params); };
  PhaseTransitionParams p;
  p.trend.A = median_field(ok, [&](const FitResult& f) { return get(f).trend.A; });
  p.trend.B = median_field(ok, [&](const FitResult& f) { return get(f).trend.B; });
  p.trend.m = median_field(ok, [&](const FitResult& f) { return get(f).trend.m; });
  p.trend.t_ref = median_field(ok, [&](const FitResult& f) { return get(f).trend.t_ref; });
  p.residual.B = median_field(ok, [&](const FitResult& f) { return get(f).residual.B; });
  p.residual.D = median_field(ok, [&](const FitResult& f) { return get(f).residual.D; });
  p.residual.omega = median_field(ok, [&](const FitResult& f) { return get(f).residual.omega; });
  p.residual.psi =
      median_field(ok, [&](const FitResult& f) { return normalize_phase(get(f).residual.psi); });
  p.residual.tc = median_field(ok, [&](const FitResult& f) { return get(f).residual.tc; });
  return p;
}

}  // namespace lpplvv
