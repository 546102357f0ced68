#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "eventpi/errors.hpp"
#include "eventpi/mathfn.hpp"
#include "eventpi/spline.hpp"

namespace eventpi {

enum class Family {
  exponential,
  weibull,
  log_normal,
  log_logistic,
  generalized_gamma,
  royston_parmar,
};

// Covariate-effect scale: the linear predictor beta'z shifts g(S(t)) where
//   PH: g(S) = log(-log S),  PO: g(S) = log((1-S)/S),  LP: g(S) = -probit(S).
enum class Link {
  proportional_hazards,
  proportional_odds,
  linear_probit,
};

struct DistributionFamily {
  Family tag = Family::weibull;
  // Royston-Parmar only: all knots on the log-time scale, boundaries included,
  // strictly increasing. knot_count() = number of internal knots.
  std::vector<double> knot_locations;

  int knot_count() const {
    return knot_locations.empty()
               ? 0
               : static_cast<int>(knot_locations.size()) - 2;
  }

  int n_baseline_params() const {
    switch (tag) {
      case Family::exponential: return 1;
      case Family::weibull: return 2;
      case Family::log_normal: return 2;
      case Family::log_logistic: return 2;
      case Family::generalized_gamma: return 3;
      case Family::royston_parmar: return knot_count() + 2;
    }
    return 0;
  }
};

inline DistributionFamily make_family(Family tag) { return {tag, {}}; }

inline DistributionFamily make_royston_parmar(std::vector<double> knots) {
  DistributionFamily f;
  f.tag = Family::royston_parmar;
  f.knot_locations = std::move(knots);
  RestrictedCubicSpline check(f.knot_locations);  // validates ordering
  return f;
}

struct ParamVector {
  std::vector<double> baseline;
  std::vector<double> beta;
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::weibull: return "weibull";
    case Family::log_normal: return "lognormal";
    case Family::log_logistic: return "loglogistic";
    case Family::generalized_gamma: return "gengamma";
    case Family::royston_parmar: return "royston-parmar";
  }
  return "?";
}

inline std::string link_name(Link l) {
  switch (l) {
    case Link::proportional_hazards: return "ph";
    case Link::proportional_odds: return "po";
    case Link::linear_probit: return "lp";
  }
  return "?";
}

// g(S) on the chosen scale; strictly monotone decreasing in S.
inline double transform_survival(Link link, double s) {
  if (!(s > 0.0 && s < 1.0)) {
    throw std::domain_error("transform_survival: s must lie strictly in (0,1)");
  }
  switch (link) {
    case Link::proportional_hazards: return std::log(-std::log(s));
    case Link::proportional_odds: return std::log1p(-s) - std::log(s);
    case Link::linear_probit: return -norm_quantile(s);
  }
  return kNaN;
}

inline double inverse_transform_survival(Link link, double v) {
  switch (link) {
    case Link::proportional_hazards: return std::exp(-std::exp(v));
    case Link::proportional_odds: return expit(-v);
    case Link::linear_probit: return norm_cdf(-v);
  }
  return kNaN;
}

namespace detail {

inline void check_params(const DistributionFamily& fam,
                         std::span<const double> p, Link /*link*/) {
  if (static_cast<int>(p.size()) != fam.n_baseline_params()) {
    throw ModelError("parameter vector size does not match family");
  }
  for (double v : p) {
    if (!std::isfinite(v)) throw ModelError("non-finite model parameter");
  }
  switch (fam.tag) {
    case Family::exponential:
      if (!(p[0] > 0.0)) throw ModelError("exponential rate must be > 0");
      break;
    case Family::weibull:
      if (!(p[0] > 0.0 && p[1] > 0.0)) {
        throw ModelError("weibull shape/scale must be > 0");
      }
      break;
    case Family::log_normal:
      if (!(p[1] > 0.0)) throw ModelError("lognormal sigma must be > 0");
      break;
    case Family::log_logistic:
      if (!(p[0] > 0.0 && p[1] > 0.0)) {
        throw ModelError("loglogistic shape/scale must be > 0");
      }
      break;
    case Family::generalized_gamma:
      if (!(p[1] > 0.0)) throw ModelError("gengamma sigma must be > 0");
      break;
    case Family::royston_parmar:
      break;
  }
}

// ---- Baseline (covariate-free) distribution functions -------------------
//
// Parameter layout:
//   exponential        {rate}                    H(t) = rate * t
//   weibull            {shape, scale}            H(t) = scale * t^shape
//   log_normal         {mu, sigma}               F(t) = Phi((log t - mu)/sigma)
//   log_logistic       {shape, scale}            logit F = shape*(log t-log scale)
//   generalized_gamma  {mu, sigma, Q}            Prentice form; Q=1 Weibull,
//                                                Q=0 log-normal
//   royston_parmar     spline coefficients       g(S(t)) = s(log t) on `link`
//
// Royston-Parmar is the only family whose baseline depends on the link.

inline double gg_expqw(double q, double w) {
  const double e = q * w;
  return std::exp(std::min(e, 700.0));
}

inline double base_cdf(const DistributionFamily& fam, Link link,
                       std::span<const double> p, double t) {
  if (!(t > 0.0)) return 0.0;
  switch (fam.tag) {
    case Family::exponential:
      return -std::expm1(-p[0] * t);
    case Family::weibull:
      return -std::expm1(-p[1] * std::pow(t, p[0]));
    case Family::log_normal:
      return norm_cdf((std::log(t) - p[0]) / p[1]);
    case Family::log_logistic:
      return expit(p[0] * (std::log(t) - std::log(p[1])));
    case Family::generalized_gamma: {
      const double mu = p[0], sigma = p[1], q = p[2];
      if (q == 0.0) return norm_cdf((std::log(t) - mu) / sigma);
      const double w = (std::log(t) - mu) / sigma;
      const double a = 1.0 / (q * q);
      const double ug = a * gg_expqw(q, w);
      return q > 0.0 ? gamma_p(a, ug) : gamma_q(a, ug);
    }
    case Family::royston_parmar: {
      const double s = RestrictedCubicSpline::eval_from(fam.knot_locations, p,
                                                        std::log(t));
      return 1.0 - inverse_transform_survival(link, s);
    }
  }
  return kNaN;
}

inline double base_log_sf(const DistributionFamily& fam, Link link,
                          std::span<const double> p, double t) {
  if (!(t > 0.0)) return 0.0;
  switch (fam.tag) {
    case Family::exponential:
      return -p[0] * t;
    case Family::weibull:
      return -p[1] * std::pow(t, p[0]);
    case Family::log_normal:
      return log_norm_sf((std::log(t) - p[0]) / p[1]);
    case Family::log_logistic:
      return log_expit(p[0] * (std::log(t) - std::log(p[1])));
    case Family::generalized_gamma: {
      const double mu = p[0], sigma = p[1], q = p[2];
      if (q == 0.0) return log_norm_sf((std::log(t) - mu) / sigma);
      const double w = (std::log(t) - mu) / sigma;
      const double a = 1.0 / (q * q);
      const double ug = a * gg_expqw(q, w);
      const double sf = q > 0.0 ? gamma_q(a, ug) : gamma_p(a, ug);
      return std::log(sf);
    }
    case Family::royston_parmar: {
      const double s = RestrictedCubicSpline::eval_from(fam.knot_locations, p,
                                                        std::log(t));
      switch (link) {
        case Link::proportional_hazards: return -std::exp(s);
        case Link::proportional_odds: return log_expit(-s);
        case Link::linear_probit: return log_norm_sf(s);
      }
      return kNaN;
    }
  }
  return kNaN;
}

// Limit of log f(t) as t -> 0+, driven by the effective power of t.
inline double base_log_pdf_at_zero(const DistributionFamily& fam,
                                   std::span<const double> p) {
  double shape = kNaN;
  switch (fam.tag) {
    case Family::exponential: return std::log(p[0]);
    case Family::weibull: shape = p[0]; break;
    case Family::log_normal: return -kInf;
    case Family::log_logistic:
      shape = p[0];
      if (shape == 1.0) return -std::log(p[1]);
      break;
    case Family::generalized_gamma:
      if (p[2] <= 0.0) return -kInf;
      shape = 1.0 / (p[2] * p[1]);
      break;
    case Family::royston_parmar:
      shape = p[1];  // linear tail slope of the spline below the lower knot
      break;
  }
  return shape < 1.0 ? kInf : -kInf;
}

inline double base_log_pdf(const DistributionFamily& fam, Link link,
                           std::span<const double> p, double t) {
  if (!(t > 0.0)) return base_log_pdf_at_zero(fam, p);
  switch (fam.tag) {
    case Family::exponential:
      return std::log(p[0]) - p[0] * t;
    case Family::weibull: {
      const double shape = p[0], scale = p[1];
      return std::log(shape) + std::log(scale) +
             (shape - 1.0) * std::log(t) - scale * std::pow(t, shape);
    }
    case Family::log_normal: {
      const double w = (std::log(t) - p[0]) / p[1];
      return log_norm_pdf(w) - std::log(p[1]) - std::log(t);
    }
    case Family::log_logistic: {
      const double r = p[0] * (std::log(t) - std::log(p[1]));
      return std::log(p[0]) - std::log(t) + log_expit(r) + log_expit(-r);
    }
    case Family::generalized_gamma: {
      const double mu = p[0], sigma = p[1], q = p[2];
      const double w = (std::log(t) - mu) / sigma;
      if (q == 0.0) {
        return log_norm_pdf(w) - std::log(sigma) - std::log(t);
      }
      const double a = 1.0 / (q * q);
      return std::log(std::abs(q)) - std::log(sigma) - std::log(t) +
             a * std::log(a) - std::lgamma(a) + a * (q * w - gg_expqw(q, w));
    }
    case Family::royston_parmar: {
      const double x = std::log(t);
      const double s =
          RestrictedCubicSpline::eval_from(fam.knot_locations, p, x);
      const double ds =
          RestrictedCubicSpline::eval_deriv_from(fam.knot_locations, p, x);
      if (!(ds > 0.0)) return kNaN;  // non-monotone candidate: no density
      const double common = -x + std::log(ds);
      switch (link) {
        case Link::proportional_hazards: return common + s - std::exp(s);
        case Link::proportional_odds:
          return common + log_expit(s) + log_expit(-s);
        case Link::linear_probit: return common + log_norm_pdf(s);
      }
      return kNaN;
    }
  }
  return kNaN;
}

inline double base_quantile(const DistributionFamily& fam, Link link,
                            std::span<const double> p, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("quantile: u must lie in (0,1)");
  }
  switch (fam.tag) {
    case Family::exponential:
      return -std::log1p(-u) / p[0];
    case Family::weibull:
      return std::pow(-std::log1p(-u) / p[1], 1.0 / p[0]);
    case Family::log_normal:
      return std::exp(p[0] + p[1] * norm_quantile(u));
    case Family::log_logistic:
      return std::exp(std::log(p[1]) + logit(u) / p[0]);
    case Family::generalized_gamma: {
      const double mu = p[0], sigma = p[1], q = p[2];
      if (q == 0.0) return std::exp(mu + sigma * norm_quantile(u));
      const double a = 1.0 / (q * q);
      const double ug = q > 0.0 ? gamma_p_inv(a, u) : gamma_q_inv(a, u);
      const double w = std::log(ug / a) / q;
      return std::exp(mu + sigma * w);
    }
    case Family::royston_parmar: {
      // Invert s(x) = g(1-u) by bracketed bisection on x = log t.
      RestrictedCubicSpline sp(fam.knot_locations);
      const double target = transform_survival(link, 1.0 - u);
      double lo = sp.boundary_lo() - 10.0;
      double hi = sp.boundary_hi() + 10.0;
      double step = 10.0;
      while (sp.eval(lo, p) > target) {
        lo -= step;
        step *= 2.0;
        if (lo < -1e6) throw ModelError("spline quantile: no lower bracket");
      }
      step = 10.0;
      while (sp.eval(hi, p) < target) {
        hi += step;
        step *= 2.0;
        if (hi > 1e6) throw ModelError("spline quantile: no upper bracket");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sp.eval(mid, p) < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return std::exp(0.5 * (lo + hi));
    }
  }
  return kNaN;
}

// ---- Covariate-effect composition on the link scale ---------------------

inline double shifted_u(Link link, double u, double eta) {
  // u' with F0(t) = u' corresponding to F(t|z) = u.
  switch (link) {
    case Link::proportional_hazards:
      return -std::expm1(std::exp(-eta) * std::log1p(-u));
    case Link::proportional_odds:
      return expit(logit(u) - eta);
    case Link::linear_probit:
      return norm_cdf(norm_quantile(u) - eta);
  }
  return kNaN;
}

}  // namespace detail

// Parametric time-to-event distribution with covariate effects acting on the
// chosen transformed-survival scale. All evaluation is pure and thread-safe.
struct SurvivalModel {
  DistributionFamily family;
  Link link = Link::proportional_hazards;
  ParamVector params;

  double linear_predictor(std::span<const double> z) const {
    if (z.size() != params.beta.size()) {
      throw ModelError("covariate vector length does not match beta");
    }
    return dot(params.beta, z);
  }

  double cdf(double t, std::span<const double> z = {}) const {
    detail::check_params(family, params.baseline, link);
    if (t < 0.0) throw std::domain_error("cdf: t must be >= 0");
    const double eta = linear_predictor(z);
    if (eta == 0.0) return detail::base_cdf(family, link, params.baseline, t);
    switch (link) {
      case Link::proportional_hazards:
        return -std::expm1(std::exp(eta) *
                           detail::base_log_sf(family, link, params.baseline, t));
      case Link::proportional_odds: {
        const double f0 = detail::base_cdf(family, link, params.baseline, t);
        if (f0 <= 0.0 || f0 >= 1.0) return f0;
        return expit(logit(f0) + eta);
      }
      case Link::linear_probit: {
        const double f0 = detail::base_cdf(family, link, params.baseline, t);
        if (f0 <= 0.0 || f0 >= 1.0) return f0;
        return norm_cdf(norm_quantile(f0) + eta);
      }
    }
    return kNaN;
  }

  double log_survival(double t, std::span<const double> z = {}) const {
    detail::check_params(family, params.baseline, link);
    const double eta = linear_predictor(z);
    switch (link) {
      case Link::proportional_hazards:
        return std::exp(eta) *
               detail::base_log_sf(family, link, params.baseline, t);
      case Link::proportional_odds: {
        const double f0 = detail::base_cdf(family, link, params.baseline, t);
        if (f0 <= 0.0) return 0.0;
        if (f0 >= 1.0) return -kInf;
        return log_expit(-(logit(f0) + eta));
      }
      case Link::linear_probit: {
        const double f0 = detail::base_cdf(family, link, params.baseline, t);
        if (f0 <= 0.0) return 0.0;
        if (f0 >= 1.0) return -kInf;
        return log_norm_sf(norm_quantile(f0) + eta);
      }
    }
    return kNaN;
  }

  double survival(double t, std::span<const double> z = {}) const {
    return std::exp(log_survival(t, z));
  }

  double cumulative_hazard(double t, std::span<const double> z = {}) const {
    return -log_survival(t, z);
  }

  double log_pdf(double t, std::span<const double> z = {}) const {
    detail::check_params(family, params.baseline, link);
    const double eta = linear_predictor(z);
    const double lf0 = detail::base_log_pdf(family, link, params.baseline, t);
    if (eta == 0.0 || !std::isfinite(lf0)) return lf0;
    switch (link) {
      case Link::proportional_hazards: {
        const double lsf0 =
            detail::base_log_sf(family, link, params.baseline, t);
        return eta + (std::exp(eta) - 1.0) * lsf0 + lf0;
      }
      case Link::proportional_odds: {
        const double f0 = detail::base_cdf(family, link, params.baseline, t);
        return eta + lf0 -
               2.0 * std::log((1.0 - f0) + std::exp(eta) * f0);
      }
      case Link::linear_probit: {
        const double f0 = detail::base_cdf(family, link, params.baseline, t);
        if (f0 <= 0.0 || f0 >= 1.0) return -kInf;
        const double q0 = norm_quantile(f0);
        return lf0 + log_norm_pdf(q0 + eta) - log_norm_pdf(q0);
      }
    }
    return kNaN;
  }

  double pdf(double t, std::span<const double> z = {}) const {
    const double lp = log_pdf(t, z);
    if (std::isnan(lp)) return kNaN;
    return lp == kInf ? kInf : std::exp(lp);
  }

  double hazard(double t, std::span<const double> z = {}) const {
    return std::exp(log_pdf(t, z) - log_survival(t, z));
  }

  double quantile(double u, std::span<const double> z = {}) const {
    detail::check_params(family, params.baseline, link);
    if (!(u > 0.0 && u < 1.0)) {
      throw std::domain_error("quantile: u must lie in (0,1)");
    }
    const double eta = linear_predictor(z);
    const double u0 = eta == 0.0 ? u : detail::shifted_u(link, u, eta);
    return detail::base_quantile(family, link, params.baseline, u0);
  }
};

// Marginal loss-to-follow-up distribution, no covariates. The `none` state is
// the no-dropout sentinel: G == 0 everywhere (no random censoring).
struct DropoutModel {
  bool is_none = true;
  DistributionFamily family;
  std::vector<double> params;  // psi

  static DropoutModel none() { return DropoutModel{}; }

  static DropoutModel parametric(DistributionFamily fam,
                                 std::vector<double> psi) {
    if (fam.tag == Family::royston_parmar) {
      throw ModelError("spline dropout models are not supported");
    }
    DropoutModel m;
    m.is_none = false;
    m.family = std::move(fam);
    m.params = std::move(psi);
    detail::check_params(m.family, m.params, Link::proportional_hazards);
    return m;
  }

  double cdf(double t) const {
    if (is_none) return 0.0;
    return detail::base_cdf(family, Link::proportional_hazards, params, t);
  }

  double log_survival(double t) const {
    if (is_none) return 0.0;
    return detail::base_log_sf(family, Link::proportional_hazards, params, t);
  }

  double survival(double t) const { return std::exp(log_survival(t)); }

  double log_pdf(double t) const {
    if (is_none) return -kInf;
    return detail::base_log_pdf(family, Link::proportional_hazards, params, t);
  }

  double pdf(double t) const {
    const double lp = log_pdf(t);
    return lp == kInf ? kInf : std::exp(lp);
  }

  double quantile(double u) const {
    if (is_none) throw ModelError("quantile of the no-dropout sentinel");
    return detail::base_quantile(family, Link::proportional_hazards, params, u);
  }
};

// Spec'd free-function view of the spline basis used by Royston-Parmar models.
inline std::vector<double> spline_basis(const std::vector<double>& knots,
                                        double log_t) {
  return RestrictedCubicSpline(knots).basis(log_t);
}

}  // namespace eventpi
