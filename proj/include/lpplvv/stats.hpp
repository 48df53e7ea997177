#pragma once

// Forecast-error aggregation, two-sided t-tests and Holm step-down
// correction for the pairwise window comparisons.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lpplvv/timeseries.hpp"

namespace lpplvv::stats {

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with `dof` degrees of freedom.
double student_t_sf(double t, double dof);

struct ErrorSample {
  WindowClass window_class = WindowClass::half;
  std::map<std::size_t, double> errors;  // simulation id -> |tc_hat - tc|
};

struct TTestResult {
  double t_stat = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool paired = true;
  std::size_t n = 0;
};

// Paired: one-sample t on per-simulation differences a - b. Unpaired:
// Welch with Welch-Satterthwaite degrees of freedom. Both two-sided.
TTestResult t_test(const ErrorSample& a, const ErrorSample& b, bool paired);

enum class HolmMode { standard, paper_naive };

std::string to_string(HolmMode m);
HolmMode holm_mode_from_string(const std::string& s);

// paper_naive: k-th smallest p times (m - k + 1), original order, no
// monotonicity, no cap. standard: also running max in ascending order and
// capped at 1.
std::vector<double> holm_bonferroni(const std::vector<double>& p_raw, HolmMode mode);

double mean_absolute_error(const ErrorSample& sample);

struct HypothesisTestRow {
  std::string label;
  double p_raw = 1.0;
  double p_corrected = 1.0;
  std::size_t n = 0;
};

// Two decimals; corrected values above 1 render as ">1".
std::string format_p(double p);

}  // namespace lpplvv::stats
