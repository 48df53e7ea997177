#pragma once

// The two competing critical-time estimators and subsample aggregation.
//
// subordinated:     tc profiled on a grid; at each tc, (m, omega) by
//                   multistart bounded simplex search; (A, B, C, psi) solved
//                   exactly inside every objective evaluation.
// phase_transition: exponential trend removed first, then the log-divergent
//                   form fitted to the residuals on the same tc grid.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "lpplvv/model.hpp"
#include "lpplvv/optimize.hpp"
#include "lpplvv/parallel.hpp"
#include "lpplvv/timeseries.hpp"

namespace lpplvv {

enum class Algorithm { subordinated, phase_transition };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// Candidate tc values lie at window end + offset * dt, offset running from
// min_offset in steps of `step` (all in samples) up to
// max_offset_fraction * window length.
struct TcGrid {
  double min_offset = 1.0;
  double step = 1.0;
  double max_offset_fraction = 0.5;
};

struct SearchConfig {
  TcGrid tc_grid;
  Interval m_bounds{0.05, 0.95};
  Interval omega_bounds{2.0, 25.0};
  Interval amplitude_bounds{0.0, 2.0};  // D of the log-divergent form
  std::size_t lattice_per_axis = 3;     // starts per tc = per_axis^2
  NelderMeadOptions optimizer;
  Execution execution = Execution::parallel;

  std::size_t multistart_count() const { return lattice_per_axis * lattice_per_axis; }
};

struct PhaseTransitionParams {
  ExpTrendParams trend;
  LogDivergentParams residual;
};

using FitParams = std::variant<LpplParams, PhaseTransitionParams>;

double critical_time(const FitParams& p);

struct FitResult {
  Algorithm algorithm = Algorithm::subordinated;
  FitParams params;
  double sse = 0.0;
  WindowSpec window;
  bool converged = false;
  std::size_t evaluations = 0;

  double tc() const { return critical_time(params); }
};

std::vector<double> tc_candidates(const TimeSeries& ts, const WindowSpec& window,
                                  const TcGrid& grid);

// Best inner fit at one tc candidate.
struct TcProfilePoint {
  double tc = 0.0;
  bool feasible = false;
  bool converged = false;
  double sse = 0.0;
  std::vector<double> x;  // (m, omega) or (omega, psi, D)
  std::size_t evaluations = 0;
};

// Per-candidate kernels. The execution policy only changes scheduling:
// serial and parallel runs return identical profiles.
std::vector<TcProfilePoint> profile_subordinated(const TimeSeries& ts, const WindowSpec& window,
                                                 const std::vector<double>& tcs,
                                                 const SearchConfig& cfg, Execution ex);
std::vector<TcProfilePoint> profile_log_divergent(const TimeSeries& ts, const WindowSpec& window,
                                                  const std::vector<double>& residuals,
                                                  const std::vector<double>& tcs,
                                                  const SearchConfig& cfg, Execution ex);

FitResult fit_subordinated(const TimeSeries& ts, const WindowSpec& window,
                           const SearchConfig& cfg);

// Profiles m over a grid of m * duration in [-20, 20] and refines with
// Brent; (A, B) are solved linearly at each m. Constant data gives
// (mean, 0, 0).
ExpTrendParams fit_exp_trend(const TimeSeries& ts, const WindowSpec& window);

FitResult fit_phase_transition(const TimeSeries& ts, const WindowSpec& window,
                               const SearchConfig& cfg);

FitResult fit(Algorithm algorithm, const TimeSeries& ts, const WindowSpec& window,
              const SearchConfig& cfg);

// Componentwise median over the converged fits (midpoint for even counts,
// phases wrapped to [0, 2 pi) first). Throws no_estimate if none converged,
// invalid_input if algorithms are mixed.
FitParams median_estimate(const std::vector<FitResult>& fits);

}  // namespace lpplvv
