#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace eventpi {

// Adaptive Gauss-Kronrod 7-15 integration on a finite interval.
// The error estimate per panel is |K15 - G7|; panels are bisected until the
// local estimate meets the (split) absolute tolerance or the relative one.

namespace gk15 {

// Nodes/weights of the 15-point Kronrod extension of 7-point Gauss (QUADPACK).
inline constexpr std::array<double, 8> nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
void panel(F&& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kronrod_w[7] * fc;
  double resg = gauss_w[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double x = h * nodes[i];
    const double fsum = f(c - x) + f(c + x);
    resk += kronrod_w[i] * fsum;
    if (i % 2 == 1) resg += gauss_w[i / 2] * fsum;
  }
  result = resk * h;
  err = std::abs((resk - resg) * h);
}

}  // namespace gk15

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_depth = 48;
};

namespace detail {

template <class F>
double gk_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                   int depth) {
  double result, err;
  gk15::panel(f, a, b, result, err);
  if (depth <= 0 || err <= std::max(abs_tol, rel_tol * std::abs(result))) {
    return result;
  }
  const double c = 0.5 * (a + b);
  return gk_adaptive(f, a, c, 0.5 * abs_tol, rel_tol, depth - 1) +
         gk_adaptive(f, c, b, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace detail

template <class F>
double integrate(F&& f, double a, double b, QuadratureOptions opts = {}) {
  if (a == b) return 0.0;
  return detail::gk_adaptive(f, a, b, opts.abs_tol, opts.rel_tol,
                             opts.max_depth);
}

}  // namespace eventpi
