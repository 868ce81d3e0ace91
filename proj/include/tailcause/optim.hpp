#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace tailcause::optim {

struct NelderMeadOptions {
  double ftol = 1e-11;        // relative spread of simplex values
  double xtol = 1e-9;         // relative simplex diameter
  std::size_t max_evals = 20000;
  std::size_t restarts = 4;   // fresh simplices around the incumbent
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  bool converged = false;
};

/// Minimizes f from x0. Infeasible points are signalled by f returning +inf
/// (or NaN, treated alike); every vertex of the starting simplex is pulled
/// toward x0 until feasible. `step` gives the initial edge length per axis.
template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, std::vector<double> step,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t dim = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  res.x = x0;
  res.value = eval(x0);
  if (!std::isfinite(res.value)) return res;

  for (std::size_t round = 0; round <= opt.restarts; ++round) {
    std::vector<std::vector<double>> simplex(dim + 1, res.x);
    std::vector<double> fv(dim + 1, res.value);
    for (std::size_t i = 0; i < dim; ++i) {
      double h = step[i];
      for (int tries = 0; tries < 40; ++tries) {
        simplex[i + 1] = res.x;
        simplex[i + 1][i] += h;
        fv[i + 1] = eval(simplex[i + 1]);
        if (std::isfinite(fv[i + 1])) break;
        h *= (tries % 2 == 0) ? -1.0 : 0.5;  // try the other side, then shrink
      }
    }

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    bool round_converged = false;
    const double start_value = res.value;

    while (res.evals < opt.max_evals) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];

      double diam = 0.0, scale = 0.0;
      for (std::size_t v = 0; v <= dim; ++v)
        for (std::size_t i = 0; i < dim; ++i) {
          diam = std::max(diam, std::abs(simplex[v][i] - simplex[best][i]));
          scale = std::max(scale, std::abs(simplex[best][i]));
        }
      const double spread = fv[worst] - fv[best];
      if (spread <= opt.ftol * (std::abs(fv[best]) + 1e-10) && diam <= opt.xtol * (scale + 1e-8)) {
        round_converged = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v <= dim; ++v) {
        if (v == worst) continue;
        for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v][i] / static_cast<double>(dim);
      }
      auto along = [&](double t, std::vector<double>& out) {
        for (std::size_t i = 0; i < dim; ++i) out[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
      };

      along(-1.0, trial);
      const double fr = eval(trial);
      if (fr < fv[best]) {
        along(-2.0, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          simplex[worst] = trial2;
          fv[worst] = fe;
        } else {
          simplex[worst] = trial;
          fv[worst] = fr;
        }
        continue;
      }
      if (fr < fv[second]) {
        simplex[worst] = trial;
        fv[worst] = fr;
        continue;
      }
      const bool outside = fr < fv[worst];
      along(outside ? -0.5 : 0.5, trial2);
      const double fc = eval(trial2);
      if (fc < (outside ? fr : fv[worst])) {
        simplex[worst] = trial2;
        fv[worst] = fc;
        continue;
      }
      for (std::size_t v = 0; v <= dim; ++v) {
        if (v == best) continue;
        for (std::size_t i = 0; i < dim; ++i) simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
        fv[v] = eval(simplex[v]);
      }
    }

    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    if (fv[best] < res.value) {
      res.value = fv[best];
      res.x = simplex[best];
    }
    res.converged = round_converged;
    if (!round_converged) break;
    // A restart that cannot improve the incumbent confirms the optimum.
    if (round > 0 && start_value - res.value <= opt.ftol * (std::abs(res.value) + 1e-10)) break;
    for (std::size_t i = 0; i < dim; ++i) step[i] = std::max(std::abs(step[i]) * 0.1, 1e-4 * (std::abs(res.x[i]) + 1e-3));
  }
  return res;
}

}  // namespace tailcause::optim
