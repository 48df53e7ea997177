#include "lpplvv/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lpplvv/error.hpp"

namespace lpplvv {

namespace {

struct Vertex {
  std::vector<double> u;
  double f;
};

}  // namespace

OptimResult nelder_mead_bounded(const Objective& f, std::span<const double> x0,
                                std::span<const Interval> box, const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  if (n == 0 || box.size() != n) {
    throw Error(ErrorKind::invalid_input, "start point and box dimensions differ");
  }
  for (const auto& b : box) {
    if (!(b.hi > b.lo)) throw Error(ErrorKind::invalid_input, "empty search interval");
  }

  std::vector<double> x(n);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& u) {
    for (std::size_t i = 0; i < n; ++i) x[i] = box[i].lo + u[i] * box[i].width();
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  auto project = [](std::vector<double>& u) {
    for (auto& v : u) v = std::clamp(v, 0.0, 1.0);
  };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  {
    std::vector<double> u0(n);
    for (std::size_t i = 0; i < n; ++i) u0[i] = (x0[i] - box[i].lo) / box[i].width();
    project(u0);
    simplex.push_back({u0, eval(u0)});
    for (std::size_t i = 0; i < n; ++i) {
      auto u = u0;
      // Step inward when the start sits on the upper face.
      u[i] += (u[i] + opt.initial_step <= 1.0) ? opt.initial_step : -opt.initial_step;
      project(u);
      simplex.push_back({u, eval(u)});
    }
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::vector<double> centroid(n), trial(n);
  bool converged = false;

  while (true) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    const double f_best = simplex.front().f;
    const double f_worst = simplex.back().f;

    double radius = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        radius = std::max(radius, std::abs(simplex[k].u[i] - simplex[0].u[i]));
      }
    }
    const bool f_flat = std::isfinite(f_worst) &&
                        (f_worst - f_best) <= opt.ftol * (1.0 + std::abs(f_best));
    if (f_flat && radius <= opt.xtol) {
      converged = true;
      break;
    }
    if (evals >= opt.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k].u[i];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto toward = [&](double coeff) {
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = centroid[i] + coeff * (simplex[n].u[i] - centroid[i]);
      }
      project(trial);
      return eval(trial);
    };

    const double f_reflect = toward(-1.0);
    const auto reflected = trial;
    if (f_reflect < f_best) {
      const double f_expand = toward(-2.0);
      if (f_expand < f_reflect) {
        simplex[n] = {trial, f_expand};
      } else {
        simplex[n] = {reflected, f_reflect};
      }
      continue;
    }
    if (f_reflect < simplex[n - 1].f) {
      simplex[n] = {reflected, f_reflect};
      continue;
    }
    if (f_reflect < f_worst) {
      const double f_contract = toward(-0.5);
      if (f_contract <= f_reflect) {
        simplex[n] = {trial, f_contract};
        continue;
      }
    } else {
      const double f_contract = toward(0.5);
      if (f_contract < f_worst) {
        simplex[n] = {trial, f_contract};
        continue;
      }
    }
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        simplex[k].u[i] = simplex[0].u[i] + 0.5 * (simplex[k].u[i] - simplex[0].u[i]);
      }
      simplex[k].f = eval(simplex[k].u);
    }
  }

  const auto& best = simplex.front();
  OptimResult out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = box[i].lo + best.u[i] * box[i].width();
  out.f = best.f;
  out.evals = evals;
  out.converged = converged && std::isfinite(best.f);
  return out;
}

std::vector<std::vector<double>> lattice_points(std::span<const Interval> box,
                                                std::size_t per_axis) {
  if (per_axis < 1) throw Error(ErrorKind::invalid_input, "lattice needs >= 1 point per axis");
  const std::size_t dims = box.size();
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= per_axis;
  std::vector<std::vector<double>> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> p(dims);
    std::size_t rem = idx;
    for (std::size_t d = dims; d-- > 0;) {
      const std::size_t k = rem % per_axis;
      rem /= per_axis;
      p[d] = box[d].lo + (static_cast<double>(k) + 0.5) / static_cast<double>(per_axis) *
                             box[d].width();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace lpplvv
