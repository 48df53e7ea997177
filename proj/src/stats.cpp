#include "lpplvv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "lpplvv/error.hpp"

namespace lpplvv::stats {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorKind::numeric_overflow, "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::invalid_input, "incomplete beta needs a, b > 0 and x in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorKind::invalid_input, "t distribution needs dof > 0");
  if (std::isnan(t)) throw Error(ErrorKind::invalid_input, "t statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  // P(|T| > |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  std::size_t n = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.n = v.size();
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(m.n);
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = m.n > 1 ? ss / static_cast<double>(m.n - 1) : 0.0;
  return m;
}

std::vector<double> values_of(const ErrorSample& s) {
  std::vector<double> v;
  v.reserve(s.errors.size());
  for (const auto& [id, e] : s.errors) v.push_back(e);
  return v;
}

double two_sided(double t, double dof) { return std::min(1.0, 2.0 * student_t_sf(std::abs(t), dof)); }

}  // namespace

TTestResult t_test(const ErrorSample& a, const ErrorSample& b, bool paired) {
  TTestResult out;
  out.paired = paired;
  if (paired) {
    if (a.errors.size() != b.errors.size()) {
      throw Error(ErrorKind::invalid_pairing, "paired samples differ in size");
    }
    std::vector<double> diff;
    diff.reserve(a.errors.size());
    for (const auto& [id, ea] : a.errors) {
      const auto it = b.errors.find(id);
      if (it == b.errors.end()) {
        throw Error(ErrorKind::invalid_pairing,
                    "simulation " + std::to_string(id) + " missing from the second sample");
      }
      diff.push_back(ea - it->second);
    }
    if (diff.size() < 2) throw Error(ErrorKind::invalid_input, "paired test needs n >= 2");
    const auto m = moments(diff);
    out.n = m.n;
    out.dof = static_cast<double>(m.n - 1);
    if (!(m.var > 0.0)) {
      if (m.mean == 0.0) {
        out.t_stat = 0.0;
        out.p_value = 1.0;
        return out;
      }
      throw Error(ErrorKind::degenerate_test, "differences have zero variance");
    }
    out.t_stat = m.mean / std::sqrt(m.var / static_cast<double>(m.n));
    out.p_value = two_sided(out.t_stat, out.dof);
    return out;
  }

  const auto va = values_of(a);
  const auto vb = values_of(b);
  if (va.size() < 2 || vb.size() < 2) {
    throw Error(ErrorKind::invalid_input, "Welch test needs n >= 2 in each sample");
  }
  const auto ma = moments(va);
  const auto mb = moments(vb);
  const double qa = ma.var / static_cast<double>(ma.n);
  const double qb = mb.var / static_cast<double>(mb.n);
  out.n = std::min(ma.n, mb.n);
  if (!(qa + qb > 0.0)) {
    if (ma.mean == mb.mean) {
      out.dof = static_cast<double>(ma.n + mb.n - 2);
      return out;
    }
    throw Error(ErrorKind::degenerate_test, "both samples have zero variance");
  }
  out.t_stat = (ma.mean - mb.mean) / std::sqrt(qa + qb);
  out.dof = (qa + qb) * (qa + qb) /
            (qa * qa / static_cast<double>(ma.n - 1) + qb * qb / static_cast<double>(mb.n - 1));
  out.p_value = two_sided(out.t_stat, out.dof);
  return out;
}

std::string to_string(HolmMode m) { return m == HolmMode::standard ? "standard" : "paper-naive"; }

HolmMode holm_mode_from_string(const std::string& s) {
  if (s == "standard") return HolmMode::standard;
  if (s == "paper-naive" || s == "paper_naive") return HolmMode::paper_naive;
  throw Error(ErrorKind::config, "unknown Holm mode '" + s + "'");
}

std::vector<double> holm_bonferroni(const std::vector<double>& p_raw, HolmMode mode) {
  if (p_raw.empty()) throw Error(ErrorKind::invalid_input, "no p-values to correct");
  for (double p : p_raw) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "p-value outside [0,1]");
  }
  const std::size_t m = p_raw.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_raw[i] < p_raw[j]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = order[k];
    double adj = p_raw[i] * static_cast<double>(m - k);
    if (mode == HolmMode::standard) {
      running = std::max(running, adj);
      adj = std::min(1.0, running);
    }
    out[i] = adj;
  }
  return out;
}

double mean_absolute_error(const ErrorSample& sample) {
  if (sample.errors.empty()) throw Error(ErrorKind::invalid_input, "empty error sample");
  double acc = 0.0;
  for (const auto& [id, e] : sample.errors) acc += std::fabs(e);
  return acc / static_cast<double>(sample.errors.size());
}

std::string format_p(double p) {
  if (p > 1.0) return ">1";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", p);
  return buf;
}

}  // namespace lpplvv::stats
