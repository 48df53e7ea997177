#pragma once

// Five-variable ABCDE system: a Lorenz subsystem (x, y, z) driving a
// dissipative pair, integrated in the hyperbolic (r, theta) coordinates
//   b1 = r cosh(theta),  b2 = r sinh(theta).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpplvv/timeseries.hpp"

namespace lpplvv::abcde {

struct Params {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 2.667;
  double a1 = 0.1;
  double a2 = 0.2;
  double alpha = 0.2;
  double epsilon = 4.94;
};

// Control values exactly as printed (rho = 2.667, beta = 28). The Lorenz
// block then has stable fixed points and no strange attractor.
Params paper_verbatim_preset();
// Canonical Lorenz assignment (rho = 28, beta = 2.667), same a1, a2, epsilon.
Params lorenz_standard_preset();
// Throws config for unknown names.
Params preset(const std::string& name);

struct State {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

// Original coordinates; b1^2 - b2^2 == r^2.
struct StateB {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

// (x, y, z, r, theta) = (0, 1, 2, 1, 5.03999).
State reference_initial_state();

StateB to_b(const State& s);
// Requires b1 > |b2|, i.e. the image of r > 0.
State from_b(const StateB& s);

inline constexpr double kThetaLimit = 300.0;

State derivatives_rtheta(const State& s, const Params& p);
StateB derivatives_b(const StateB& s, const Params& p);

struct IntegrateOptions {
  double bound = 1e12;        // any |component| above this is a blow-up
  std::size_t substeps = 1;   // RK4 steps per saved sample
};

// Fixed-step classical RK4. Returns n + 1 states (s0 first), one per
// `dt * substeps` of simulated time. Throws BlowUpError with the offending
// step index when a component leaves the bound or theta leaves the
// hyperbolic guard.
std::vector<State> integrate(const State& s0, const Params& p, double dt, std::size_t n,
                             const IntegrateOptions& opt = {});
std::vector<StateB> integrate_b(const StateB& s0, const Params& p, double dt, std::size_t n,
                                const IntegrateOptions& opt = {});

struct BatchConfig {
  std::string preset = "lorenz-standard";
  Params params = lorenz_standard_preset();
  State initial = reference_initial_state();
  double dt = 0.005;           // sample spacing of the saved r series
  std::size_t substeps = 16;   // RK4 steps per sample
  double horizon = 400.0;
  std::size_t runs = 10;
  std::uint64_t seed = 20240101;
  double jitter = 1e-3;        // uniform half-width on (y, z, theta)
  double bound = 1e12;
};

// Jittered initial condition for a run; r is never perturbed.
State jittered_initial(const BatchConfig& cfg, std::size_t run);

// Counter-based uniform draw in [0, 1) keyed by (seed, run, stream).
double counter_uniform(std::uint64_t seed, std::uint64_t run, std::uint64_t stream);

struct RunResult {
  std::size_t id = 0;
  bool ok = false;
  std::string reason;                 // empty when ok
  std::optional<std::size_t> failed_step;
  std::optional<TimeSeries> r;        // r component, present when ok
};

struct BatchResult {
  std::vector<RunResult> runs;
  std::size_t failed() const;
};

RunResult simulate_run(const BatchConfig& cfg, std::size_t run);

// OpenMP fan-out over runs; output is ordered by run id and identical to
// simulate_batch_serial for any thread count.
BatchResult simulate_batch(const BatchConfig& cfg);
BatchResult simulate_batch_serial(const BatchConfig& cfg);

}  // namespace lpplvv::abcde
