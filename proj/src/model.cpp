#include "lpplvv/model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

#include "lpplvv/error.hpp"

namespace lpplvv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double time_to_critical(double tc, double t) {
  const double tau = tc - t;
  if (!(tau > 0.0)) {
    throw Error(ErrorKind::domain, "model evaluated at or after the critical time");
  }
  return tau;
}

}  // namespace

double lppl_eval(const LpplParams& p, double t) {
  const double tau = time_to_critical(p.tc, t);
  const double f = std::pow(tau, p.m);
  return p.A + p.B * f + p.C * f * std::cos(p.omega * std::log(tau) - p.psi);
}

double power_law_eval(double A, double B, double m, double tc, double t) {
  return A + B * std::pow(time_to_critical(tc, t), m);
}

double exp_trend_eval(const ExpTrendParams& p, double t) {
  return p.A + p.B * std::exp(-p.m * (t - p.t_ref));
}

double log_divergent_eval(const LogDivergentParams& p, double t) {
  const double lt = std::log(time_to_critical(p.tc, t));
  return p.B * lt * (1.0 + p.D * std::cos(p.omega * lt + p.psi));
}

double normalize_phase(double psi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double out = std::fmod(psi, two_pi);
  if (out < 0.0) out += two_pi;
  // fmod of a tiny negative value can round up to exactly 2 pi
  if (out >= two_pi) out = 0.0;
  return out;
}

LinearSubproblem::LinearSubproblem(const TimeSeries& ts, const WindowSpec& window, double tc)
    : tc_(tc) {
  if (window.end_index >= ts.size() || window.start_index > window.end_index) {
    throw Error(ErrorKind::invalid_input, "window outside the series");
  }
  if (window.sample_count() < 5) {
    throw Error(ErrorKind::too_short, "linear solve needs at least 5 samples");
  }
  log_tau_.reserve(window.sample_count());
  y_.reserve(window.sample_count());
  for (std::size_t i = window.start_index; i <= window.end_index; ++i) {
    log_tau_.push_back(std::log(time_to_critical(tc, ts.time(i))));
    y_.push_back(ts[i]);
  }
}

std::optional<LinearSolution> LinearSubproblem::try_solve(double m, double omega) const {
  const auto n = static_cast<Eigen::Index>(y_.size());
  Eigen::Matrix<double, Eigen::Dynamic, 4> X(n, 4);
  Eigen::Map<const Eigen::VectorXd> y(y_.data(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lt = log_tau_[static_cast<std::size_t>(i)];
    const double f = std::exp(m * lt);
    const double phase = omega * lt;
    X(i, 0) = 1.0;
    X(i, 1) = f;
    X(i, 2) = f * std::cos(phase);
    X(i, 3) = f * std::sin(phase);
  }
  // Unit-norm columns so the rank decision does not depend on units.
  Eigen::Vector4d scale = X.colwise().norm().transpose();
  for (int j = 0; j < 4; ++j) {
    if (!(scale[j] > 0.0) || !std::isfinite(scale[j])) return std::nullopt;
    X.col(j) /= scale[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, Eigen::Dynamic, 4>> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) return std::nullopt;
  const Eigen::Vector4d coef_scaled = qr.solve(y);
  const double sse = (y - X * coef_scaled).squaredNorm();
  const Eigen::Vector4d coef = coef_scaled.cwiseQuotient(scale);

  LinearSolution out;
  out.A = coef[0];
  out.B = coef[1];
  out.C = std::hypot(coef[2], coef[3]);
  out.psi = normalize_phase(std::atan2(coef[3], coef[2]));
  out.sse = sse;
  return out;
}

double LinearSubproblem::profile_sse(double m, double omega) const {
  const std::size_t n = y_.size();
  thread_local std::vector<double> columns;
  columns.resize(3 * n);
  Eigen::Matrix4d G = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  G(0, 0) = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lt = log_tau_[i];
    const double f = std::exp(m * lt);
    const double phase = omega * lt;
    const double fc = f * std::cos(phase);
    const double fs = f * std::sin(phase);
    columns[3 * i] = f;
    columns[3 * i + 1] = fc;
    columns[3 * i + 2] = fs;
    const double y = y_[i];
    G(0, 1) += f;
    G(0, 2) += fc;
    G(0, 3) += fs;
    G(1, 1) += f * f;
    G(1, 2) += f * fc;
    G(1, 3) += f * fs;
    G(2, 2) += fc * fc;
    G(2, 3) += fc * fs;
    G(3, 3) += fs * fs;
    b[0] += y;
    b[1] += f * y;
    b[2] += fc * y;
    b[3] += fs * y;
  }
  Eigen::Vector4d scale;
  for (int j = 0; j < 4; ++j) {
    if (!(G(j, j) > 0.0) || !std::isfinite(G(j, j))) return kInf;
    scale[j] = 1.0 / std::sqrt(G(j, j));
  }
  const Eigen::Matrix4d Gs =
      scale.asDiagonal() * G.selfadjointView<Eigen::Upper>().toDenseMatrix() * scale.asDiagonal();
  const Eigen::LDLT<Eigen::Matrix4d> ldlt(Gs);
  // Gram pivots scale like squared singular values: 1e-13 here is roughly
  // a 3e-7 relative threshold on the design matrix.
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < 1e-13) return kInf;
  const Eigen::Vector4d coef = scale.cwiseProduct(ldlt.solve(scale.cwiseProduct(b)));
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y_[i] - coef[0] - coef[1] * columns[3 * i] - coef[2] * columns[3 * i + 1] -
                     coef[3] * columns[3 * i + 2];
    acc += e * e;
  }
  return acc;
}

LinearSolution LinearSubproblem::solve(double m, double omega) const {
  auto out = try_solve(m, omega);
  if (!out) {
    throw Error(ErrorKind::degenerate_design, "rank-deficient LPPL design at m=" +
                                                  std::to_string(m) +
                                                  ", omega=" + std::to_string(omega));
  }
  return *out;
}

LinearSolution solve_linear_params(const TimeSeries& ts, const WindowSpec& window, double tc,
                                   double m, double omega) {
  return LinearSubproblem(ts, window, tc).solve(m, omega);
}

double sse(const TimeSeries& ts, const WindowSpec& window, const LpplParams& p) {
  if (window.end_index >= ts.size() || window.start_index > window.end_index) {
    throw Error(ErrorKind::invalid_input, "window outside the series");
  }
  double acc = 0.0;
  for (std::size_t i = window.start_index; i <= window.end_index; ++i) {
    const double e = ts[i] - lppl_eval(p, ts.time(i));
    acc += e * e;
  }
  return acc;
}

}  // namespace lpplvv
