#include "lpplvv/abcde.hpp"

#include <cmath>

#include "lpplvv/error.hpp"

namespace lpplvv::abcde {

Params paper_verbatim_preset() {
  Params p;
  p.sigma = 10.0;
  p.rho = 2.667;
  p.beta = 28.0;
  return p;
}

Params lorenz_standard_preset() {
  Params p;
  p.sigma = 10.0;
  p.rho = 28.0;
  p.beta = 2.667;
  return p;
}

Params preset(const std::string& name) {
  if (name == "paper-verbatim") return paper_verbatim_preset();
  if (name == "lorenz-standard") return lorenz_standard_preset();
  throw Error(ErrorKind::config, "unknown ABCDE preset '" + name + "'");
}

State reference_initial_state() { return State{0.0, 1.0, 2.0, 1.0, 5.03999}; }

StateB to_b(const State& s) {
  return StateB{s.x, s.y, s.z, s.r * std::cosh(s.theta), s.r * std::sinh(s.theta)};
}

State from_b(const StateB& s) {
  const double r2 = s.b1 * s.b1 - s.b2 * s.b2;
  if (!(s.b1 > 0.0) || !(r2 > 0.0)) {
    throw Error(ErrorKind::domain, "(b1, b2) outside the image of r > 0");
  }
  return State{s.x, s.y, s.z, std::sqrt(r2), std::atanh(s.b2 / s.b1)};
}

namespace {

bool finite(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z) &&
         std::isfinite(s.r) && std::isfinite(s.theta);
}

bool finite(const StateB& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z) &&
         std::isfinite(s.b1) && std::isfinite(s.b2);
}

using Vec = std::array<double, 5>;

Vec pack(const State& s) { return {s.x, s.y, s.z, s.r, s.theta}; }
Vec pack(const StateB& s) { return {s.x, s.y, s.z, s.b1, s.b2}; }
State unpack_state(const Vec& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
StateB unpack_state_b(const Vec& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

template <class S, class Deriv, class Unpack>
S rk4_step(const S& s, double h, Deriv&& f, Unpack&& unpack) {
  const Vec y = pack(s);
  const Vec k1 = pack(f(s));
  Vec tmp;
  for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  const Vec k2 = pack(f(unpack(tmp)));
  for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  const Vec k3 = pack(f(unpack(tmp)));
  for (int i = 0; i < 5; ++i) tmp[i] = y[i] + h * k3[i];
  const Vec k4 = pack(f(unpack(tmp)));
  Vec out;
  for (int i = 0; i < 5; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return unpack(out);
}

template <class S>
void check_bound(const S& s, double bound, std::size_t step) {
  for (double v : pack(s)) {
    if (!(std::abs(v) <= bound)) {
      throw BlowUpError(step, "state left the magnitude bound at step " + std::to_string(step));
    }
  }
}

template <class S, class Deriv, class Unpack>
std::vector<S> integrate_impl(const S& s0, double dt, std::size_t n, const IntegrateOptions& opt,
                              Deriv&& f, Unpack&& unpack) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_input, "step must be positive");
  if (n < 1) throw Error(ErrorKind::invalid_input, "need at least one step");
  if (opt.substeps < 1) throw Error(ErrorKind::invalid_input, "substeps must be >= 1");
  if (!finite(s0)) throw Error(ErrorKind::invalid_input, "initial state is not finite");

  std::vector<S> out;
  out.reserve(n + 1);
  out.push_back(s0);
  S s = s0;
  std::size_t step = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < opt.substeps; ++k) {
      ++step;
      try {
        s = rk4_step(s, dt, f, unpack);
      } catch (const Error& e) {
        throw BlowUpError(step, std::string(e.what()) + " at step " + std::to_string(step));
      }
      check_bound(s, opt.bound, step);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

State derivatives_rtheta(const State& s, const Params& p) {
  if (!finite(s)) throw Error(ErrorKind::numeric_overflow, "non-finite ABCDE state");
  if (!(std::abs(s.theta) < kThetaLimit)) {
    throw BlowUpError(0, "theta outside the hyperbolic guard");
  }
  const double sh = std::sinh(s.theta);
  const double ch = std::cosh(s.theta);
  const double da = p.a2 - p.a1;
  return State{
      p.sigma * (-s.x + s.y),
      -s.y + (p.rho - s.z) * s.x,
      -p.beta * s.z + s.x * s.y,
      p.epsilon * s.r * (-p.a1 + da * sh * sh),
      -p.epsilon * da * sh * ch + p.alpha * s.x,
  };
}

StateB derivatives_b(const StateB& s, const Params& p) {
  if (!finite(s)) throw Error(ErrorKind::numeric_overflow, "non-finite ABCDE state");
  return StateB{
      p.sigma * (-s.x + s.y),
      -s.y + (p.rho - s.z) * s.x,
      -p.beta * s.z + s.x * s.y,
      -p.epsilon * p.a1 * s.b1 + p.alpha * s.x * s.b2,
      -p.epsilon * p.a2 * s.b2 + p.alpha * s.x * s.b1,
  };
}

std::vector<State> integrate(const State& s0, const Params& p, double dt, std::size_t n,
                             const IntegrateOptions& opt) {
  return integrate_impl(
      s0, dt, n, opt, [&p](const State& s) { return derivatives_rtheta(s, p); }, unpack_state);
}

std::vector<StateB> integrate_b(const StateB& s0, const Params& p, double dt, std::size_t n,
                                const IntegrateOptions& opt) {
  return integrate_impl(
      s0, dt, n, opt, [&p](const StateB& s) { return derivatives_b(s, p); }, unpack_state_b);
}

double counter_uniform(std::uint64_t seed, std::uint64_t run, std::uint64_t stream) {
  // SplitMix64 finalizer over a mixed (seed, run, stream) counter.
  std::uint64_t z = seed ^ (run * 0x9E3779B97F4A7C15ULL) ^ (stream * 0xD1B54A32D192ED03ULL);
  for (int round = 0; round < 2; ++round) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
  }
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

State jittered_initial(const BatchConfig& cfg, std::size_t run) {
  State s = cfg.initial;
  auto draw = [&](std::uint64_t stream) {
    return cfg.jitter * (2.0 * counter_uniform(cfg.seed, run, stream) - 1.0);
  };
  s.y += draw(0);
  s.z += draw(1);
  s.theta += draw(2);
  return s;
}

std::size_t BatchResult::failed() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.ok ? 0 : 1;
  return n;
}

RunResult simulate_run(const BatchConfig& cfg, std::size_t run) {
  RunResult out;
  out.id = run;
  const auto samples = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  const double step = cfg.dt / static_cast<double>(cfg.substeps);
  try {
    const auto traj = integrate(jittered_initial(cfg, run), cfg.params, step, samples,
                                IntegrateOptions{cfg.bound, cfg.substeps});
    std::vector<double> r;
    r.reserve(traj.size());
    for (const auto& s : traj) r.push_back(s.r);
    out.r.emplace(0.0, cfg.dt, std::move(r));
    out.ok = true;
  } catch (const BlowUpError& e) {
    out.reason = std::string(to_string(e.kind())) + ": " + e.what();
    out.failed_step = e.step();
  } catch (const Error& e) {
    out.reason = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return out;
}

namespace {

void validate(const BatchConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.horizon >= cfg.dt) || cfg.substeps < 1) {
    throw Error(ErrorKind::config, "batch needs dt > 0, horizon >= dt and substeps >= 1");
  }
  if (!(cfg.initial.r > 0.0)) throw Error(ErrorKind::config, "initial r must be positive");
  if (!(cfg.jitter >= 0.0)) throw Error(ErrorKind::config, "jitter must be nonnegative");
}

}  // namespace

BatchResult simulate_batch_serial(const BatchConfig& cfg) {
  validate(cfg);
  BatchResult out;
  out.runs.reserve(cfg.runs);
  for (std::size_t i = 0; i < cfg.runs; ++i) out.runs.push_back(simulate_run(cfg, i));
  return out;
}

BatchResult simulate_batch(const BatchConfig& cfg) {
  validate(cfg);
  BatchResult out;
  out.runs.resize(cfg.runs);
  const auto n = static_cast<long>(cfg.runs);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    out.runs[static_cast<std::size_t>(i)] = simulate_run(cfg, static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace lpplvv::abcde
