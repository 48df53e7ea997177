#pragma once

// LPPL model family: the full log-periodic power law, its power-law
// reduction, the exponential trend and the log-divergent residual form,
// plus the exact solve for the parameters that enter linearly.

#include <optional>
#include <vector>

#include "lpplvv/timeseries.hpp"

namespace lpplvv {

//   s(t) = A + B (tc - t)^m + C (tc - t)^m cos(omega ln(tc - t) - psi)
struct LpplParams {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double m = 0.5;
  double omega = 0.0;
  double psi = 0.0;
  double tc = 0.0;
};

//   s(t) = A + B exp(-m (t - t_ref))
// t_ref is zero for the textbook form; fitted trends anchor it at the
// window end so exp() stays in range for long time axes.
struct ExpTrendParams {
  double A = 0.0;
  double B = 0.0;
  double m = 0.0;
  double t_ref = 0.0;
};

//   r(t) = B ln(tc - t) [1 + D cos(omega ln(tc - t) + psi)]
struct LogDivergentParams {
  double B = 0.0;
  double D = 0.0;
  double omega = 0.0;
  double psi = 0.0;
  double tc = 0.0;
};

double lppl_eval(const LpplParams& p, double t);
double power_law_eval(double A, double B, double m, double tc, double t);
double exp_trend_eval(const ExpTrendParams& p, double t);
double log_divergent_eval(const LogDivergentParams& p, double t);

// Wraps an angle into [0, 2 pi).
double normalize_phase(double psi);

struct LinearSolution {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;    // >= 0
  double psi = 0.0;  // in [0, 2 pi)
  double sse = 0.0;
};

// Caches ln(tc - t) and the observations of one window for a fixed tc, so
// the (m, omega) search only pays for exp/cos/sin and a 4-column QR.
class LinearSubproblem {
 public:
  // Throws domain if any window sample is at or after tc, too_short below 5
  // samples.
  LinearSubproblem(const TimeSeries& ts, const WindowSpec& window, double tc);

  // Least squares over (A, B, C1, C2) with C cos(phi - psi) rewritten as
  // C1 cos(phi) + C2 sin(phi). Throws degenerate_design when the design is
  // numerically rank deficient (relative tolerance 1e-10).
  LinearSolution solve(double m, double omega) const;
  // As solve(), but returns nullopt instead of throwing degenerate_design.
  std::optional<LinearSolution> try_solve(double m, double omega) const;
  // SSE of the same least-squares problem via 4x4 normal equations on
  // unit-diagonal scaling; +inf when the design is numerically rank
  // deficient. Several times cheaper than try_solve, which is why the
  // (m, omega) search uses it.
  double profile_sse(double m, double omega) const;

  double tc() const noexcept { return tc_; }
  std::size_t size() const noexcept { return y_.size(); }

 private:
  double tc_;
  std::vector<double> log_tau_;
  std::vector<double> y_;
};

LinearSolution solve_linear_params(const TimeSeries& ts, const WindowSpec& window, double tc,
                                   double m, double omega);

// Sum of squared residuals of the full model over the window.
double sse(const TimeSeries& ts, const WindowSpec& window, const LpplParams& p);

}  // namespace lpplvv
