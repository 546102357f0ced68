#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace eventpi {

struct NelderMeadOptions {
  int max_evals = 2000;
  double simplex_tol = 1e-8;   // converged when simplex diameter drops below
  double init_step = 0.25;     // initial simplex edge on the unconstrained scale
  int max_restarts = 2;        // re-seed simplex around the incumbent optimum
  double restart_shrink = 0.1; // step scale applied at each restart
};

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer. Deterministic: fixed expansion and
// restart schedule, no randomness. The objective may return +inf to reject
// infeasible points.
inline NelderMeadResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, NelderMeadOptions opts = {}) {
  const std::size_t d = x0.size();
  NelderMeadResult res;
  res.x = x0;

  int evals = 0;
  const auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  if (d == 0) {
    res.fmin = eval(x0);
    res.evals = evals;
    res.converged = true;
    return res;
  }

  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> v;
  std::vector<double> fv;

  const auto build_simplex = [&](const std::vector<double>& center,
                                 double step) {
    v.assign(d + 1, center);
    fv.assign(d + 1, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      v[i + 1][i] += step * std::max(1.0, std::abs(center[i]));
    }
    for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(v[i]);
  };

  const auto order = [&] {
    std::vector<std::size_t> idx(d + 1);
    for (std::size_t i = 0; i <= d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> v2(d + 1);
    std::vector<double> f2(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
      v2[i] = v[idx[i]];
      f2[i] = fv[idx[i]];
    }
    v.swap(v2);
    fv.swap(f2);
  };

  const auto diameter = [&] {
    double dmax = 0.0;
    for (std::size_t i = 1; i <= d; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        dmax = std::max(dmax, std::abs(v[i][k] - v[0][k]));
      }
    }
    return dmax;
  };

  double step = opts.init_step;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_x = x0;
  bool converged = false;

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    build_simplex(restart == 0 ? x0 : best_x, step);
    order();

    while (evals < opts.max_evals) {
      if (diameter() < opts.simplex_tol) {
        converged = true;
        break;
      }
      std::vector<double> centroid(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) centroid[k] += v[i][k];
      }
      for (std::size_t k = 0; k < d; ++k) centroid[k] /= static_cast<double>(d);

      const auto blend = [&](double c) {
        std::vector<double> x(d);
        for (std::size_t k = 0; k < d; ++k) {
          x[k] = centroid[k] + c * (centroid[k] - v[d][k]);
        }
        return x;
      };

      const auto xr = blend(alpha);
      const double fr = eval(xr);
      if (fr < fv[0]) {
        const auto xe = blend(gamma);
        const double fe = eval(xe);
        if (fe < fr) {
          v[d] = xe;
          fv[d] = fe;
        } else {
          v[d] = xr;
          fv[d] = fr;
        }
      } else if (fr < fv[d - 1]) {
        v[d] = xr;
        fv[d] = fr;
      } else {
        const auto xc = blend(fr < fv[d] ? rho : -rho);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[d])) {
          v[d] = xc;
          fv[d] = fc;
        } else {
          for (std::size_t i = 1; i <= d; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
              v[i][k] = v[0][k] + sigma * (v[i][k] - v[0][k]);
            }
            fv[i] = eval(v[i]);
          }
        }
      }
      order();
    }

    const bool improved = fv[0] < best_f - 1e-10;
    if (fv[0] < best_f) {
      best_f = fv[0];
      best_x = v[0];
    }
    step *= opts.restart_shrink;
    if (evals >= opts.max_evals) break;
    if (restart > 0 && !improved) break;  // incumbent is stable
  }

  res.x = best_x;
  res.fmin = best_f;
  res.evals = evals;
  res.converged = converged && std::isfinite(best_f);
  return res;
}

}  // namespace eventpi
