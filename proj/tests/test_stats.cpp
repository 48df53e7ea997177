#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "lpplvv/error.hpp"
#include "lpplvv/stats.hpp"

using namespace lpplvv;
using namespace lpplvv::stats;

namespace {

ErrorSample sample(const std::vector<double>& v, std::size_t first_id = 0) {
  ErrorSample s;
  for (std::size_t i = 0; i < v.size(); ++i) s.errors[first_id + i] = v[i];
  return s;
}

double oracle_two_sided(double t, double dof) {
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

}  // namespace

TEST_CASE("incomplete beta against Boost.Math") {
  const double params[][3] = {{0.5, 0.5, 0.3}, {2.0, 3.0, 0.7},  {10.0, 0.5, 0.95},
                              {0.5, 20.0, 0.01}, {50.0, 50.0, 0.5}, {1.0, 1.0, 0.25},
                              {3.5, 0.5, 0.999}, {0.5, 282.0, 0.002}};
  for (const auto& p : params) {
    CHECK(incomplete_beta(p[0], p[1], p[2]) ==
          doctest::Approx(boost::math::ibeta(p[0], p[1], p[2])).epsilon(1e-12));
  }
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student t survival function to 1e-10") {
  const double dofs[] = {1.0, 2.0, 3.7, 8.0, 30.0, 564.0, 1e4};
  const double ts[] = {0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 8.0, 25.0};
  for (double dof : dofs) {
    boost::math::students_t dist(dof);
    for (double t : ts) {
      const double want = boost::math::cdf(boost::math::complement(dist, t));
      CHECK(std::fabs(student_t_sf(t, dof) - want) < 1e-10);
      CHECK(std::fabs(student_t_sf(-t, dof) - (1.0 - want)) < 1e-10);
    }
  }
}

TEST_CASE("paired t-test") {
  SUBCASE("identical samples") {
    const auto a = sample({1.0, 2.5, 0.3, 4.0});
    const auto r = t_test(a, a, true);
    CHECK(r.t_stat == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK(r.n == 4);
  }
  SUBCASE("matches an independent computation") {
    const std::vector<double> x{1.3, 2.1, 0.7, 4.2, 3.3, 1.9};
    const std::vector<double> y{1.0, 2.6, 0.2, 3.1, 3.0, 1.1};
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (d.size() - 1));
    const double t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
    const auto r = t_test(sample(x), sample(y), true);
    CHECK(r.t_stat == doctest::Approx(t).epsilon(1e-12));
    CHECK(r.dof == 5.0);
    CHECK(std::fabs(r.p_value - oracle_two_sided(t, 5.0)) < 1e-10);
  }
  SUBCASE("translation invariance") {
    const std::vector<double> x{1.3, 2.1, 0.7, 4.2};
    const std::vector<double> y{1.0, 2.6, 0.2, 3.1};
    auto xs = x, ys = y;
    for (auto& v : xs) v += 17.25;
    for (auto& v : ys) v += 17.25;
    CHECK(t_test(sample(xs), sample(ys), true).t_stat ==
          doctest::Approx(t_test(sample(x), sample(y), true).t_stat).epsilon(1e-9));
  }
  SUBCASE("mismatched ids") {
    CHECK_THROWS_AS(t_test(sample({1, 2, 3}), sample({1, 2, 3}, 1), true), Error);
    try {
      t_test(sample({1, 2, 3}), sample({1, 2}), true);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_pairing);
    }
  }
  SUBCASE("constant nonzero difference") {
    try {
      t_test(sample({2, 3, 4}), sample({1, 2, 3}), true);
      FAIL("expected degenerate_test");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_test);
    }
  }
  SUBCASE("a single nonzero difference gives t = 1 at any magnitude") {
    // (0, ..., 0, x): mean x/n and standard error x/n, so p cannot move with x.
    double first_p = -1.0;
    for (double big : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto r = t_test(sample({1, 1, 1, 1, 1 + big}), sample({1, 1, 1, 1, 1}), true);
      CHECK(r.t_stat == doctest::Approx(1.0).epsilon(1e-12));
      if (first_p < 0.0) first_p = r.p_value;
      CHECK(r.p_value == doctest::Approx(first_p).epsilon(1e-12));
    }
    CHECK(first_p == doctest::Approx(oracle_two_sided(1.0, 4.0)).epsilon(1e-10));
  }
  SUBCASE("p decreases as a common shift grows") {
    double prev = 2.0;
    for (double shift : {0.1, 0.3, 0.6, 1.0, 2.0}) {
      const auto r =
          t_test(sample({1 + shift, 1.2 + shift, 0.9 + shift, 1.1 + shift}), sample({1, 1, 1, 1}), true);
      CHECK(r.p_value < prev);
      prev = r.p_value;
    }
  }
}

TEST_CASE("Welch t-test") {
  // Means 3 and 4, variances 2.5 each: t = -1, dof = 8.
  const auto r = t_test(sample({1, 2, 3, 4, 5}), sample({2, 3, 4, 5, 6}, 100), false);
  CHECK(r.t_stat == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r.dof == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(std::fabs(r.p_value - oracle_two_sided(1.0, 8.0)) < 1e-10);
  CHECK_FALSE(r.paired);

  // Unequal variances and sizes.
  const std::vector<double> x{0.2, 1.7, 3.1, 0.4, 2.2, 5.0, 1.1};
  const std::vector<double> y{2.4, 2.5, 2.9, 2.2};
  auto moments = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double e : v) ss += (e - m) * (e - m);
    return std::pair{m, ss / (v.size() - 1)};
  };
  const auto [mx, vx] = moments(x);
  const auto [my, vy] = moments(y);
  const double sx = vx / x.size(), sy = vy / y.size();
  const double t = (mx - my) / std::sqrt(sx + sy);
  const double dof = (sx + sy) * (sx + sy) / (sx * sx / (x.size() - 1) + sy * sy / (y.size() - 1));
  const auto w = t_test(sample(x), sample(y), false);
  CHECK(w.t_stat == doctest::Approx(t).epsilon(1e-12));
  CHECK(w.dof == doctest::Approx(dof).epsilon(1e-12));
  CHECK(std::fabs(w.p_value - oracle_two_sided(t, dof)) < 1e-10);
}

TEST_CASE("Holm correction") {
  SUBCASE("reference table, naive multiplication") {
    const auto c = holm_bonferroni({0.49, 0.35, 0.81}, HolmMode::paper_naive);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == doctest::Approx(0.98).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(1.05).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(format_p(c[0]) == "0.98");
    CHECK(format_p(c[1]) == ">1");
    CHECK(format_p(c[2]) == "0.81");
  }
  SUBCASE("standard step-down") {
    const auto c = holm_bonferroni({0.49, 0.35, 0.81}, HolmMode::standard);
    for (double p : c) CHECK(p == 1.0);
    const auto d = holm_bonferroni({0.01, 0.04, 0.03}, HolmMode::standard);
    CHECK(d[0] == doctest::Approx(0.03));
    CHECK(d[1] == doctest::Approx(0.06));
    CHECK(d[2] == doctest::Approx(0.06));
  }
  SUBCASE("single p-value is unchanged") {
    CHECK(holm_bonferroni({0.3}, HolmMode::standard)[0] == 0.3);
    CHECK(holm_bonferroni({0.3}, HolmMode::paper_naive)[0] == 0.3);
  }
  SUBCASE("properties on random inputs") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> p(1 + trial % 6);
      for (auto& v : p) v = u(gen);
      const auto s = holm_bonferroni(p, HolmMode::standard);
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return p[i] < p[j]; });
      for (std::size_t k = 0; k < p.size(); ++k) {
        CHECK(s[k] >= p[k]);
        CHECK(s[k] <= 1.0);
        if (k > 0) CHECK(s[order[k]] >= s[order[k - 1]]);
      }
    }
  }
}

TEST_CASE("mean absolute error") {
  CHECK(mean_absolute_error(sample({1.0, -3.0, 2.0})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mean_absolute_error(ErrorSample{}), Error);
}

TEST_CASE("holm mode names") {
  CHECK(holm_mode_from_string(to_string(HolmMode::paper_naive)) == HolmMode::paper_naive);
  CHECK(holm_mode_from_string(to_string(HolmMode::standard)) == HolmMode::standard);
  CHECK_THROWS_AS(holm_mode_from_string("bonferroni"), Error);
}
