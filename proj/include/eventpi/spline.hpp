#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace eventpi {

// Restricted (natural) cubic spline on log time, the Royston-Parmar basis:
//
//   s(x) = c0 + c1 x + sum_i c_{i+2} v_i(x)
//   v_i(x) = (x-k_i)^3_+ - l_i (x-k_lo)^3_+ - (1-l_i) (x-k_hi)^3_+
//   l_i = (k_hi - k_i) / (k_hi - k_lo)
//
// s is linear beyond the boundary knots and C2 everywhere. Basis dimension is
// number of internal knots + 2 (intercept and linear term included).
class RestrictedCubicSpline {
 public:
  // `knots` holds boundary and internal knots together, strictly increasing:
  // knots.front()/knots.back() are the boundaries.
  explicit RestrictedCubicSpline(std::vector<double> knots)
      : knots_(std::move(knots)) {
    if (knots_.size() < 2) {
      throw std::invalid_argument("spline needs at least the boundary knots");
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i] > knots_[i - 1])) {
        throw std::invalid_argument("spline knots must be strictly increasing");
      }
    }
  }

  std::size_t dim() const { return knots_.size(); }  // internal + 2
  std::size_t internal_count() const { return knots_.size() - 2; }
  double boundary_lo() const { return knots_.front(); }
  double boundary_hi() const { return knots_.back(); }
  const std::vector<double>& knots() const { return knots_; }

  std::vector<double> basis(double x) const {
    std::vector<double> out(dim());
    out[0] = 1.0;
    out[1] = x;
    const double klo = knots_.front(), khi = knots_.back();
    for (std::size_t i = 1; i + 1 < knots_.size(); ++i) {
      const double ki = knots_[i];
      const double li = (khi - ki) / (khi - klo);
      out[i + 1] = cube_plus(x - ki) - li * cube_plus(x - klo) -
                   (1.0 - li) * cube_plus(x - khi);
    }
    return out;
  }

  std::vector<double> basis_deriv(double x) const {
    std::vector<double> out(dim());
    out[0] = 0.0;
    out[1] = 1.0;
    const double klo = knots_.front(), khi = knots_.back();
    for (std::size_t i = 1; i + 1 < knots_.size(); ++i) {
      const double ki = knots_[i];
      const double li = (khi - ki) / (khi - klo);
      out[i + 1] = 3.0 * (sq_plus(x - ki) - li * sq_plus(x - klo) -
                          (1.0 - li) * sq_plus(x - khi));
    }
    return out;
  }

  double eval(double x, std::span<const double> coef) const {
    return eval_from(knots_, coef, x);
  }

  double eval_deriv(double x, std::span<const double> coef) const {
    return eval_deriv_from(knots_, coef, x);
  }

  // Allocation-free evaluation straight from spans; used in likelihood loops.
  static double eval_from(std::span<const double> knots,
                          std::span<const double> coef, double x) {
    double s = coef[0] + coef[1] * x;
    const double klo = knots.front(), khi = knots.back();
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
      const double li = (khi - knots[i]) / (khi - klo);
      s += coef[i + 1] * (cube_plus(x - knots[i]) - li * cube_plus(x - klo) -
                          (1.0 - li) * cube_plus(x - khi));
    }
    return s;
  }

  static double eval_deriv_from(std::span<const double> knots,
                                std::span<const double> coef, double x) {
    double s = coef[1];
    const double klo = knots.front(), khi = knots.back();
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
      const double li = (khi - knots[i]) / (khi - klo);
      s += 3.0 * coef[i + 1] *
           (sq_plus(x - knots[i]) - li * sq_plus(x - klo) -
            (1.0 - li) * sq_plus(x - khi));
    }
    return s;
  }

 private:
  static double cube_plus(double u) { return u > 0.0 ? u * u * u : 0.0; }
  static double sq_plus(double u) { return u > 0.0 ? u * u : 0.0; }

  std::vector<double> knots_;
};

}  // namespace eventpi
