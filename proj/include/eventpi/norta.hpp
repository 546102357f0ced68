#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "eventpi/errors.hpp"
#include "eventpi/mathfn.hpp"
#include "eventpi/rng.hpp"

namespace eventpi {

// NORTA generation of (entry, dropout) pairs: correlated standard normals are
// pushed through Phi and then the inverse CDFs of the Uniform(0, tau_a) and
// Exponential(psi) margins. The auxiliary normal correlation rho_star is
// calibrated by bisection so the achieved Pearson correlation of the margins
// hits the requested target.

inline constexpr int kNortaCalibrationSample = 20000;
inline constexpr double kNortaTolerance = 1e-3;
inline constexpr int kNortaMaxIterations = 100;

struct NortaCalibration {
  double rho_star = 0.0;
  double achieved = 0.0;
  int iterations = 0;
};

namespace detail {

inline std::pair<double, double> norta_pair(double n1, double n2,
                                            double rho_star, double tau_a,
                                            double psi) {
  const double m2 = rho_star * n1 + std::sqrt(1.0 - rho_star * rho_star) * n2;
  const double u1 = norm_cdf(n1);
  const double u2 = norm_cdf(m2);
  const double entry = tau_a * u1;
  const double dropout = -std::log1p(-u2) / psi;
  return {entry, dropout};
}

}  // namespace detail

inline void sample_entry_dropout(std::size_t n, double tau_a, double psi,
                                 double rho_star, Rng& rng,
                                 std::vector<double>& entry,
                                 std::vector<double>& dropout) {
  entry.resize(n);
  dropout.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double n1 = rng.normal();
    const double n2 = rng.normal();
    const auto [e, l] = detail::norta_pair(n1, n2, rho_star, tau_a, psi);
    entry[i] = e;
    dropout[i] = l;
  }
}

// Bisection on rho_star with common random numbers: the same base normal
// sample is re-transformed at every candidate, so the objective is monotone
// and the iteration deterministic given the seed.
inline NortaCalibration calibrate_norta_rho(double tau_a, double psi,
                                            double rho_target,
                                            std::uint64_t seed,
                                            int sample = kNortaCalibrationSample,
                                            double tol = kNortaTolerance,
                                            int max_iter = kNortaMaxIterations) {
  if (!(rho_target > -1.0 && rho_target < 1.0)) {
    throw CalibrationError("target correlation must lie in (-1,1)");
  }
  NortaCalibration out;
  if (rho_target == 0.0) return out;  // independent margins, exactly

  Rng rng(seed);
  std::vector<double> n1(static_cast<std::size_t>(sample));
  std::vector<double> n2(n1.size());
  for (std::size_t i = 0; i < n1.size(); ++i) {
    n1[i] = rng.normal();
    n2[i] = rng.normal();
  }
  std::vector<double> e(n1.size()), l(n1.size());
  const auto corr_at = [&](double rho_star) {
    for (std::size_t i = 0; i < n1.size(); ++i) {
      const auto [ei, li] = detail::norta_pair(n1[i], n2[i], rho_star, tau_a, psi);
      e[i] = ei;
      l[i] = li;
    }
    return pearson_corr(e, l);
  };

  double lo = -0.999999, hi = 0.999999;
  if (corr_at(hi) < rho_target - tol || corr_at(lo) > rho_target + tol) {
    throw CalibrationError("target correlation unattainable for these margins");
  }
  out.iterations = 2;
  double mid = 0.0, achieved = 0.0;
  while (out.iterations < max_iter) {
    mid = 0.5 * (lo + hi);
    achieved = corr_at(mid);
    ++out.iterations;
    if (std::abs(achieved - rho_target) <= tol) break;
    if (achieved < rho_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.rho_star = mid;
  out.achieved = achieved;
  return out;
}

// Calibrate-and-sample convenience used by the simulation harness.
inline std::pair<std::vector<double>, std::vector<double>> norta_entry_dropout(
    std::size_t n, double tau_a, double psi, double rho_target,
    std::uint64_t seed) {
  const auto cal =
      calibrate_norta_rho(tau_a, psi, rho_target, derive_seed(seed, {0}));
  Rng rng = Rng::stream(seed, {1});
  std::vector<double> entry, dropout;
  sample_entry_dropout(n, tau_a, psi, cal.rho_star, rng, entry, dropout);
  return {std::move(entry), std::move(dropout)};
}

}  // namespace eventpi
