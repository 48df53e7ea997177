#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lpplvv {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const noexcept { return hi - lo; }
};

struct NelderMeadOptions {
  double ftol = 1e-10;          // spread of simplex values, relative to 1 + |f_best|
  double xtol = 1e-8;           // simplex radius in box-normalized coordinates
  std::size_t max_evals = 2000;
  double initial_step = 0.1;    // in box-normalized coordinates
};

struct OptimResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t evals = 0;
  bool converged = false;
};

// Objective may return +inf to mark an infeasible point.
using Objective = std::function<double(std::span<const double>)>;

// Nelder-Mead on a box. The search runs in [0,1]^n coordinates mapped onto
// the box and every trial vertex is projected back onto it, so the
// objective is never evaluated outside the bounds. Fully deterministic.
OptimResult nelder_mead_bounded(const Objective& f, std::span<const double> x0,
                                std::span<const Interval> box,
                                const NelderMeadOptions& opt = {});

// Cell-centred lattice: `per_axis` points per dimension at (k + 1/2)/per_axis
// of each interval, last axis varying fastest.
std::vector<std::vector<double>> lattice_points(std::span<const Interval> box,
                                                std::size_t per_axis);

}  // namespace lpplvv
