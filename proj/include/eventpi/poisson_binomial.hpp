#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "eventpi/mathfn.hpp"

namespace eventpi {

enum class PoiBinMethod {
  exact_dp,       // O(m^2) convolution recursion, exact
  poisson_approx, // Poisson(sum pi) masses truncated to {0..m}
  normal_approx,  // continuity-corrected normal
  brute_force,    // 2^m enumeration; test oracle, m <= 20
};

// ExactDP is exact and cheap up to a few thousand terms; beyond that the
// Poisson approximation is the sensible default.
inline PoiBinMethod poibin_auto_method(std::size_t m) {
  return m <= 2000 ? PoiBinMethod::exact_dp : PoiBinMethod::poisson_approx;
}

// Distribution of the sum of independent Bernoulli(pi_j) indicators on
// support {0, ..., m}.
struct PoiBin {
  std::vector<double> pi;
  PoiBinMethod method = PoiBinMethod::exact_dp;

  int size() const { return static_cast<int>(pi.size()); }

  double mean() const {
    return std::accumulate(pi.begin(), pi.end(), 0.0);
  }

  double variance() const {
    double v = 0.0;
    for (double p : pi) v += p * (1.0 - p);
    return v;
  }

  std::vector<double> pmf() const {
    check();
    switch (method) {
      case PoiBinMethod::exact_dp: return pmf_exact();
      case PoiBinMethod::brute_force: return pmf_brute();
      case PoiBinMethod::poisson_approx: return pmf_poisson();
      case PoiBinMethod::normal_approx: return pmf_normal();
    }
    return {};
  }

  std::vector<double> cmf_all() const {
    auto f = pmf();
    double run = 0.0;
    for (double& v : f) {
      run += v;
      v = run;
    }
    return f;
  }

  double cmf(int y) const {
    if (y < 0 || y > size()) {
      throw std::domain_error("poisson-binomial cmf: y outside support");
    }
    return cmf_all()[static_cast<std::size_t>(y)];
  }

  // Left-continuous generalized inverse: min{y : F(y) >= q}.
  int quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) {
      throw std::domain_error("poisson-binomial quantile: q outside (0,1)");
    }
    const auto f = cmf_all();
    for (std::size_t y = 0; y < f.size(); ++y) {
      if (f[y] >= q) return static_cast<int>(y);
    }
    return size();
  }

 private:
  void check() const {
    for (double p : pi) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("poisson-binomial probabilities must be in [0,1]");
      }
    }
  }

  std::vector<double> pmf_exact() const {
    std::vector<double> f(pi.size() + 1, 0.0);
    f[0] = 1.0;
    std::size_t upto = 0;
    for (double p : pi) {
      ++upto;
      for (std::size_t k = upto; k-- > 1;) {
        f[k] = f[k] * (1.0 - p) + f[k - 1] * p;
      }
      f[0] *= 1.0 - p;
    }
    return f;
  }

  std::vector<double> pmf_brute() const {
    const std::size_t m = pi.size();
    if (m > 20) {
      throw std::invalid_argument("brute-force poisson-binomial limited to m <= 20");
    }
    std::vector<double> f(m + 1, 0.0);
    const std::size_t total = std::size_t{1} << m;
    for (std::size_t mask = 0; mask < total; ++mask) {
      double pr = 1.0;
      int ones = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (mask & (std::size_t{1} << j)) {
          pr *= pi[j];
          ++ones;
        } else {
          pr *= 1.0 - pi[j];
        }
      }
      f[static_cast<std::size_t>(ones)] += pr;
    }
    return f;
  }

  std::vector<double> pmf_poisson() const {
    const double lambda = mean();
    std::vector<double> f(pi.size() + 1, 0.0);
    if (lambda == 0.0) {
      f[0] = 1.0;
      return f;
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double kk = static_cast<double>(k);
      f[k] = std::exp(kk * std::log(lambda) - lambda - std::lgamma(kk + 1.0));
    }
    return f;  // tail beyond m is dropped, not renormalized
  }

  std::vector<double> pmf_normal() const {
    const double mu = mean();
    const double sd = std::sqrt(variance());
    std::vector<double> f(pi.size() + 1, 0.0);
    if (sd == 0.0) {
      f[static_cast<std::size_t>(std::lround(mu))] = 1.0;
      return f;
    }
    double prev = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double hi = norm_cdf((static_cast<double>(k) + 0.5 - mu) / sd);
      f[k] = hi - prev;
      prev = hi;
    }
    return f;
  }
};

}  // namespace eventpi
