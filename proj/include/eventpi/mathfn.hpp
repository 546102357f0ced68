#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace eventpi {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double expit(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 / (1 + exp(x))), stable for both signs of x.
inline double log_expit(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double log_norm_sf(double x) {
  const double s = norm_sf(x);
  if (s > 0.0) return std::log(s);
  // erfc underflows around x ~ 38; fall back to the asymptotic tail.
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * M_PI);
}

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double log_norm_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI);
}

inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

// Regularized lower/upper incomplete gamma and the lower inverse.
inline double gamma_p(double a, double x) { return boost::math::gamma_p(a, x); }
inline double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }
inline double gamma_p_inv(double a, double p) {
  return boost::math::gamma_p_inv(a, p);
}
inline double gamma_q_inv(double a, double q) {
  return boost::math::gamma_q_inv(a, q);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return kNaN;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double pearson_corr(std::span<const double> x,
                           std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

// Linear-interpolation sample quantile (R type 7). `sorted` must be ascending.
inline double quantile_type7_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

// Two-sample-free Kolmogorov-Smirnov statistic of a sample against a CDF.
// `cdf_at` receives each sorted sample value.
template <class F>
double ks_statistic(std::vector<double> sample, F&& cdf_at) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf_at(sample[i]);
    ks = std::max(ks, std::abs((static_cast<double>(i) + 1.0) / n - f));
    ks = std::max(ks, std::abs(static_cast<double>(i) / n - f));
  }
  return ks;
}

}  // namespace eventpi
