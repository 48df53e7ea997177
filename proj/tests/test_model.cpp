#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "lpplvv/error.hpp"
#include "lpplvv/model.hpp"

using namespace lpplvv;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;
constexpr double kPi = std::numbers::pi;

double big_lppl(const LpplParams& p, double t) {
  const Big tau = Big(p.tc) - Big(t);
  const Big f = boost::multiprecision::pow(tau, Big(p.m));
  return (Big(p.A) + Big(p.B) * f +
          Big(p.C) * f * boost::multiprecision::cos(Big(p.omega) * boost::multiprecision::log(tau) - Big(p.psi)))
      .convert_to<double>();
}

TimeSeries lppl_series(const LpplParams& p, std::size_t n, double t0 = 0.0, double dt = 1.0,
                       double noise = 0.0, std::uint64_t seed = 1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lppl_eval(p, t0 + static_cast<double>(i) * dt) + (noise > 0.0 ? noise * eps(gen) : 0.0);
  }
  return TimeSeries(t0, dt, std::move(v));
}

WindowSpec whole(const TimeSeries& ts) { return WindowSpec{0, ts.size() - 1, WindowClass::half, -1}; }

const LpplParams kExample{1.0, -1.0, 0.1, 0.5, 10.0, 0.0, 100.0};

}  // namespace

TEST_CASE("lppl_eval examples") {
  CHECK(lppl_eval(kExample, 99.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(lppl_eval(kExample, 96.0) == doctest::Approx(big_lppl(kExample, 96.0)).epsilon(1e-14));
  try {
    lppl_eval(kExample, 100.0);
    FAIL("expected domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
  CHECK_THROWS_AS(lppl_eval(kExample, 100.5), Error);
}

TEST_CASE("model forms against 50-digit oracles") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const LpplParams p{u(gen) * 4 - 2, u(gen) * 4 - 2, u(gen) - 0.5, 0.05 + 0.9 * u(gen),
                       2 + 23 * u(gen), 2 * kPi * u(gen), 50 + 50 * u(gen)};
    const double t = p.tc - 0.01 - 60.0 * u(gen);
    CHECK(lppl_eval(p, t) == doctest::Approx(big_lppl(p, t)).epsilon(1e-13));

    const Big tau = Big(p.tc) - Big(t);
    const double pl = (Big(p.A) + Big(p.B) * boost::multiprecision::pow(tau, Big(p.m))).convert_to<double>();
    CHECK(power_law_eval(p.A, p.B, p.m, p.tc, t) == doctest::Approx(pl).epsilon(1e-13));

    const ExpTrendParams e{p.A, p.B, p.m - 0.5, 0.0};
    const double ex = (Big(e.A) + Big(e.B) * boost::multiprecision::exp(-Big(e.m) * Big(t))).convert_to<double>();
    CHECK(exp_trend_eval(e, t) == doctest::Approx(ex).epsilon(1e-13));

    const LogDivergentParams d{p.B, u(gen), p.omega, p.psi, p.tc};
    const Big lt = boost::multiprecision::log(tau);
    const double ld =
        (Big(d.B) * lt * (1 + Big(d.D) * boost::multiprecision::cos(Big(d.omega) * lt + Big(d.psi)))).convert_to<double>();
    CHECK(log_divergent_eval(d, t) == doctest::Approx(ld).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("reductions and trivial values") {
  LpplParams p = kExample;
  p.C = 0.0;
  for (double t : {0.0, 50.0, 99.9}) {
    CHECK(lppl_eval(p, t) == power_law_eval(p.A, p.B, p.m, p.tc, t));
    CHECK(power_law_eval(2.0, 0.0, 0.7, 10.0, t - 100.0) == 2.0);
    CHECK(power_law_eval(2.0, 3.0, 0.0, 200.0, t) == 5.0);
  }
  CHECK(power_law_eval(2.0, 3.0, 0.37, 10.0, 9.0) == 5.0);
  CHECK(exp_trend_eval(ExpTrendParams{2.0, 3.0, 0.0, 0.0}, 123.0) == 5.0);
  CHECK(exp_trend_eval(ExpTrendParams{2.0, 3.0, 1.7, 0.0}, 0.0) == 5.0);
  CHECK(exp_trend_eval(ExpTrendParams{2.0, 3.0, 1.7, 40.0}, 40.0) == 5.0);
  const LogDivergentParams d{1.3, 0.4, 7.0, 1.1, 20.0};
  CHECK(log_divergent_eval(d, 19.0) == 0.0);
  LogDivergentParams d0 = d;
  d0.D = 0.0;
  CHECK(log_divergent_eval(d0, 15.0) == doctest::Approx(1.3 * std::log(5.0)));
  CHECK_THROWS_AS(log_divergent_eval(d, 20.0), Error);
}

TEST_CASE("psi periodicity and C-sign symmetry") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const LpplParams p{u(gen), u(gen) - 0.5, u(gen) - 0.5, 0.05 + 0.9 * u(gen), 2 + 23 * u(gen),
                       2 * kPi * u(gen), 100.0};
    LpplParams shifted = p;
    shifted.psi += 2 * kPi;
    LpplParams flipped = p;
    flipped.C = -p.C;
    flipped.psi = p.psi + kPi;
    for (double t : {0.0, 37.5, 90.0, 99.99}) {
      CHECK(lppl_eval(shifted, t) == doctest::Approx(lppl_eval(p, t)).epsilon(1e-12));
      CHECK(lppl_eval(flipped, t) == doctest::Approx(lppl_eval(p, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalize_phase") {
  CHECK(normalize_phase(0.0) == 0.0);
  CHECK(normalize_phase(-kPi / 2) == doctest::Approx(1.5 * kPi));
  CHECK(normalize_phase(7 * kPi) == doctest::Approx(kPi));
  CHECK(normalize_phase(-1e-300) < 2 * kPi);
}

TEST_CASE("linear solve recovers noiseless parameters") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const LpplParams p{1 + u(gen), -0.5 - u(gen), 0.05 + 0.1 * u(gen), 0.2 + 0.6 * u(gen),
                       4 + 11 * u(gen), 2 * kPi * u(gen), 130.0 + 20 * u(gen)};
    const auto ts = lppl_series(p, 120);
    const auto s = solve_linear_params(ts, whole(ts), p.tc, p.m, p.omega);
    CHECK(s.A == doctest::Approx(p.A).epsilon(1e-8));
    CHECK(s.B == doctest::Approx(p.B).epsilon(1e-8));
    CHECK(s.C == doctest::Approx(p.C).epsilon(1e-8));
    CHECK(std::fabs(s.psi - p.psi) < 1e-8);
    double scale = 0.0;
    for (double v : ts.values()) scale += v * v;
    CHECK(s.sse <= 1e-16 * scale);

    const LinearSubproblem sub(ts, whole(ts), p.tc);
    CHECK(sub.profile_sse(p.m, p.omega) <= 1e-16 * scale);
  }
}

TEST_CASE("linear solve on a constant series") {
  const TimeSeries ts(0.0, 1.0, std::vector<double>(40, 3.25));
  const auto s = solve_linear_params(ts, whole(ts), 50.0, 0.5, 8.0);
  CHECK(s.A == doctest::Approx(3.25).epsilon(1e-10));
  CHECK(std::fabs(s.B) < 1e-9);
  CHECK(s.C < 1e-9);
  CHECK(s.sse < 1e-20);
}

TEST_CASE("linear solve preconditions") {
  const auto ts = lppl_series(kExample, 50);
  try {
    solve_linear_params(ts, whole(ts), 49.0, 0.5, 8.0);
    FAIL("tc inside the window must be rejected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
  CHECK_THROWS_AS(solve_linear_params(ts, WindowSpec{0, 3, WindowClass::half, -1}, 60.0, 0.5, 8.0),
                  Error);
  // m = 0 makes the power-law column collinear with the constant.
  try {
    solve_linear_params(ts, whole(ts), 60.0, 0.0, 8.0);
    FAIL("expected degenerate_design");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_design);
  }
  const LinearSubproblem sub(ts, whole(ts), 60.0);
  CHECK_FALSE(sub.try_solve(0.0, 8.0).has_value());
  CHECK(std::isinf(sub.profile_sse(0.0, 8.0)));
}

TEST_CASE("fast profile SSE agrees with the QR solve") {
  const LpplParams p{1.0, -0.4, 0.03, 0.4, 9.0, 1.0, 140.0};
  const auto ts = lppl_series(p, 120, 0.0, 1.0, 0.01, 4);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double tc : {121.0, 130.0, 160.0, 180.0}) {
    const LinearSubproblem sub(ts, whole(ts), tc);
    for (int k = 0; k < 50; ++k) {
      const double m = 0.05 + 0.9 * u(gen), omega = 2 + 23 * u(gen);
      const auto qr = sub.try_solve(m, omega);
      REQUIRE(qr.has_value());
      CHECK(sub.profile_sse(m, omega) == doctest::Approx(qr->sse).epsilon(1e-8));
    }
  }
}

TEST_CASE("linear solve is a local optimum") {
  const LpplParams p{1.0, -0.4, 0.03, 0.4, 9.0, 1.0, 140.0};
  const auto ts = lppl_series(p, 120, 0.0, 1.0, 0.01, 8);
  const auto s = solve_linear_params(ts, whole(ts), 135.0, 0.45, 8.5);
  const LpplParams fit{s.A, s.B, s.C, 0.45, 8.5, s.psi, 135.0};
  CHECK(sse(ts, whole(ts), fit) == doctest::Approx(s.sse).epsilon(1e-10));
  double LpplParams::*fields[] = {&LpplParams::A, &LpplParams::B, &LpplParams::C, &LpplParams::psi};
  for (auto f : fields) {
    for (double rel : {-0.01, 0.01}) {
      LpplParams q = fit;
      q.*f *= 1.0 + rel;
      CHECK(sse(ts, whole(ts), q) >= s.sse);
    }
  }
}

TEST_CASE("linear solve matches a brute-force grid over (A, B, C, psi)") {
  const LpplParams p{1.0, -0.5, 0.1, 0.5, 6.0, 2.0, 60.0};
  const auto ts = lppl_series(p, 40, 0.0, 1.0, 0.02, 21);
  const auto s = solve_linear_params(ts, whole(ts), p.tc, p.m, p.omega);

  constexpr int K = 25;
  auto axis = [](double lo, double hi, int k) { return lo + (hi - lo) * k / (K - 1); };
  const double lo[4] = {0.7, -0.8, 0.0, 0.0}, hi[4] = {1.3, -0.2, 0.2, 2 * kPi};
  double grid_min = INFINITY;
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      for (int c = 0; c < K; ++c)
        for (int d = 0; d < K; ++d) {
          const LpplParams q{axis(lo[0], hi[0], a), axis(lo[1], hi[1], b), axis(lo[2], hi[2], c),
                             p.m, p.omega, axis(lo[3], hi[3], d), p.tc};
          grid_min = std::min(grid_min, sse(ts, whole(ts), q));
        }
  // Grid resolution: the grid point nearest the exact optimum.
  auto snap = [&](double v, int j) {
    const double step = (hi[j] - lo[j]) / (K - 1);
    return lo[j] + std::round((v - lo[j]) / step) * step;
  };
  const LpplParams nearest{snap(s.A, 0), snap(s.B, 1), snap(s.C, 2), p.m, p.omega, snap(s.psi, 3), p.tc};
  const double resolution = sse(ts, whole(ts), nearest) - s.sse;
  CHECK(s.sse <= grid_min * (1 + 1e-12));
  CHECK(grid_min - s.sse <= resolution);
}

TEST_CASE("sse") {
  const LpplParams p{1.0, -0.4, 0.03, 0.4, 9.0, 1.0, 140.0};
  const auto ts = lppl_series(p, 30);
  CHECK(sse(ts, whole(ts), p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-25));

  std::vector<double> shifted = ts.values();
  for (auto& v : shifted) v += 5.0;
  LpplParams q = p;
  q.A += 5.0;
  q.B *= 1.01;
  const TimeSeries ts2(ts.t0(), ts.dt(), shifted);
  LpplParams q0 = p;
  q0.B *= 1.01;
  CHECK(sse(ts2, whole(ts2), q) == doctest::Approx(sse(ts, whole(ts), q0)).epsilon(1e-9));

  // Hand-summed five-point example: constant model A = 1 against 1, 2, 3, 4, 5.
  const TimeSeries five(0.0, 1.0, {1, 2, 3, 4, 5});
  const LpplParams flat{1.0, 0.0, 0.0, 0.5, 5.0, 0.0, 10.0};
  CHECK(sse(five, whole(five), flat) == 0 + 1 + 4 + 9 + 16);
  CHECK_THROWS_AS(sse(five, whole(five), LpplParams{1, 0, 0, 0.5, 5, 0, 3.0}), Error);
}
