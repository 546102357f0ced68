#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eventpi/data.hpp"
#include "eventpi/errors.hpp"
#include "eventpi/km.hpp"
#include "eventpi/mathfn.hpp"
#include "eventpi/nelder_mead.hpp"
#include "eventpi/survival.hpp"

namespace eventpi {

template <class ModelT>
struct FitResult {
  ModelT model;
  double loglik = 0.0;
  int n_params = 0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  int n_uncensored = 0;
};

// Likelihood evaluation never touches the density at exactly t = 0
// (Weibull-type densities are infinite there for shape < 1).
inline constexpr double kTimeFloor = 2.220446049250313e-16;

// Censored log likelihood of the event-time model, Sum over subjects of
// delta * log f(t|z) + (1 - delta) * log S(t|z).
inline double loglik(const SurvivalModel& model, const InterimDataset& data,
                     std::string* diagnostic = nullptr) {
  double ll = 0.0;
  for (const auto& s : data.subjects) {
    const double t = std::max(s.t_obs, kTimeFloor);
    double term;
    if (s.delta == 1) {
      term = model.log_pdf(t, s.z);
      if (term == -kInf && diagnostic) {
        *diagnostic = "zero density at observed event (subject '" + s.id + "')";
      }
    } else {
      term = model.log_survival(t, s.z);
    }
    if (std::isnan(term)) return -kInf;
    ll += term;
    if (ll == -kInf) return ll;
  }
  return ll;
}

// Dropout likelihood: epsilon * log g(t) + (1 - epsilon) * log(1 - G(t)).
// Events and administrative censorings enter as right-censored dropouts.
inline double dropout_loglik(const DropoutModel& model,
                             const InterimDataset& data) {
  if (model.is_none) return data.n_dropouts() == 0 ? 0.0 : -kInf;
  double ll = 0.0;
  for (const auto& s : data.subjects) {
    const double t = std::max(s.t_obs, kTimeFloor);
    const double term =
        s.epsilon == 1 ? model.log_pdf(t) : model.log_survival(t);
    if (std::isnan(term)) return -kInf;
    ll += term;
    if (ll == -kInf) return ll;
  }
  return ll;
}

namespace detail {

// Unconstrained reparameterization used by the optimizer: positive shape and
// scale parameters move on the log scale, everything else stays as-is.
inline std::vector<double> to_unconstrained(const DistributionFamily& fam,
                                            std::span<const double> p) {
  std::vector<double> x(p.begin(), p.end());
  switch (fam.tag) {
    case Family::exponential: x[0] = std::log(p[0]); break;
    case Family::weibull:
    case Family::log_logistic:
      x[0] = std::log(p[0]);
      x[1] = std::log(p[1]);
      break;
    case Family::log_normal:
    case Family::generalized_gamma:
      x[1] = std::log(p[1]);
      break;
    case Family::royston_parmar: break;
  }
  return x;
}

inline std::vector<double> from_unconstrained(const DistributionFamily& fam,
                                              std::span<const double> x) {
  std::vector<double> p(x.begin(), x.end());
  switch (fam.tag) {
    case Family::exponential: p[0] = std::exp(x[0]); break;
    case Family::weibull:
    case Family::log_logistic:
      p[0] = std::exp(x[0]);
      p[1] = std::exp(x[1]);
      break;
    case Family::log_normal:
    case Family::generalized_gamma:
      p[1] = std::exp(x[1]);
      break;
    case Family::royston_parmar: break;
  }
  return p;
}

// rank([1 Z]) must equal d+1: catches duplicate and constant covariates.
inline void check_covariate_rank(const InterimDataset& data) {
  const std::size_t d = data.covariate_names.size();
  if (d == 0) return;
  const std::size_t m = d + 1;
  std::vector<std::vector<double>> g(m, std::vector<double>(m, 0.0));
  for (const auto& s : data.subjects) {
    std::vector<double> row(m, 1.0);
    for (std::size_t k = 0; k < d; ++k) row[k + 1] = s.z[k];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) g[i][j] += row[i] * row[j];
    }
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, g[i][i]);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::abs(g[r][c]) > std::abs(g[piv][c])) piv = r;
    }
    if (std::abs(g[piv][c]) <= 1e-10 * scale) continue;
    std::swap(g[c], g[piv]);
    ++rank;
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = g[r][c] / g[c][c];
      for (std::size_t j = c; j < m; ++j) g[r][j] -= f * g[c][j];
    }
  }
  if (rank != m) {
    throw FitError("covariate matrix is rank deficient");
  }
}

// Censored-exponential event rate, the moment anchor for all starts.
inline double exponential_rate_start(const InterimDataset& data,
                                     bool dropout_view) {
  double exposure = 0.0;
  int events = 0;
  for (const auto& s : data.subjects) {
    exposure += s.t_obs;
    events += dropout_view ? s.epsilon : s.delta;
  }
  if (exposure <= 0.0 || events == 0) return 1.0;
  return static_cast<double>(events) / exposure;
}

// Least squares of g-transformed Nelson-Aalen survival on the spline basis.
inline std::vector<double> spline_start(const InterimDataset& data,
                                        const DistributionFamily& fam,
                                        Link link) {
  std::vector<double> times;
  std::vector<int> events;
  for (const auto& s : data.subjects) {
    times.push_back(s.t_obs);
    events.push_back(s.delta);
  }
  const StepCurve na = nelson_aalen(times, events);
  RestrictedCubicSpline sp(fam.knot_locations);
  const std::size_t m = sp.dim();

  std::vector<std::vector<double>> xtx(m, std::vector<double>(m, 0.0));
  std::vector<double> xty(m, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < na.time.size(); ++i) {
    const double surv = std::exp(-na.value[i]);
    if (!(surv > 0.0 && surv < 1.0) || !(na.time[i] > 0.0)) continue;
    const double y = transform_survival(link, surv);
    const auto b = sp.basis(std::log(na.time[i]));
    for (std::size_t r = 0; r < m; ++r) {
      xty[r] += b[r] * y;
      for (std::size_t c = 0; c < m; ++c) xtx[r][c] += b[r] * b[c];
    }
    ++used;
  }

  const double rate = exponential_rate_start(data, false);
  std::vector<double> fallback(m, 0.0);
  fallback[0] = std::log(std::max(rate, 1e-8));
  fallback[1] = 1.0;
  if (used < m) return fallback;

  // Solve the (small) normal equations in place.
  std::vector<double> coef(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::abs(xtx[r][c]) > std::abs(xtx[piv][c])) piv = r;
    }
    if (std::abs(xtx[piv][c]) < 1e-12) return fallback;
    std::swap(xtx[c], xtx[piv]);
    std::swap(xty[c], xty[piv]);
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = xtx[r][c] / xtx[c][c];
      for (std::size_t j = c; j < m; ++j) xtx[r][j] -= f * xtx[c][j];
      xty[r] -= f * xty[c];
    }
  }
  for (std::size_t c = m; c-- > 0;) {
    double s = xty[c];
    for (std::size_t j = c + 1; j < m; ++j) s -= xtx[c][j] * coef[j];
    coef[c] = s / xtx[c][c];
  }
  if (!(coef[1] > 0.0)) return fallback;  // need an increasing transform
  return coef;
}

inline std::vector<double> baseline_start(const InterimDataset& data,
                                          const DistributionFamily& fam,
                                          Link link, bool dropout_view) {
  const double rate = exponential_rate_start(data, dropout_view);
  switch (fam.tag) {
    case Family::exponential: return {rate};
    case Family::weibull: return {1.0, rate};
    case Family::log_normal: return {std::log(std::log(2.0) / rate), 1.0};
    case Family::log_logistic: return {1.0, std::log(2.0) / rate};
    case Family::generalized_gamma:
      return {-std::log(rate), 1.0, 1.0};
    case Family::royston_parmar: return spline_start(data, fam, link);
  }
  return {};
}

}  // namespace detail

// Internal knots at percentiles of the uncensored log event times (median for
// one knot, tertiles for two, quartiles for three), boundary knots at the
// extremes of the uncensored log event times.
inline DistributionFamily royston_parmar_from_data(const InterimDataset& data,
                                                   int n_internal) {
  std::vector<double> logs;
  for (const auto& s : data.subjects) {
    if (s.delta == 1) logs.push_back(std::log(std::max(s.t_obs, kTimeFloor)));
  }
  std::sort(logs.begin(), logs.end());
  if (logs.size() < 2 || logs.front() == logs.back()) {
    throw InsufficientDataError(
        "spline knot placement needs at least two distinct event times");
  }
  std::vector<double> knots;
  knots.push_back(logs.front());
  for (int i = 1; i <= n_internal; ++i) {
    const double p = static_cast<double>(i) / (n_internal + 1);
    knots.push_back(quantile_type7_sorted(logs, p));
  }
  knots.push_back(logs.back());
  return make_royston_parmar(std::move(knots));
}

inline FitResult<SurvivalModel> fit_event_model(
    const InterimDataset& data, const DistributionFamily& family, Link link,
    std::optional<ParamVector> init = std::nullopt,
    NelderMeadOptions opts = {}) {
  const int n_events = data.n_events();
  if (n_events == 0) {
    throw InsufficientDataError("no events observed: cannot fit event model");
  }
  detail::check_covariate_rank(data);

  const std::size_t d = data.covariate_names.size();
  ParamVector start;
  if (init) {
    start = *init;
  } else {
    start.baseline = detail::baseline_start(data, family, link, false);
    start.beta.assign(d, 0.0);
  }

  std::vector<double> x0 = detail::to_unconstrained(family, start.baseline);
  x0.insert(x0.end(), start.beta.begin(), start.beta.end());

  SurvivalModel work{family, link, {}};
  const std::size_t nb = family.n_baseline_params();
  const auto objective = [&](const std::vector<double>& x) {
    work.params.baseline = detail::from_unconstrained(
        family, std::span<const double>(x.data(), nb));
    work.params.beta.assign(x.begin() + nb, x.end());
    const double ll = loglik(work, data);
    return -ll;
  };

  const auto r = nelder_mead_minimize(objective, x0, opts);

  FitResult<SurvivalModel> out;
  out.model.family = family;
  out.model.link = link;
  out.model.params.baseline = detail::from_unconstrained(
      family, std::span<const double>(r.x.data(), nb));
  out.model.params.beta.assign(r.x.begin() + nb, r.x.end());
  out.loglik = -r.fmin;
  out.n_params = static_cast<int>(nb + d);
  out.aic = -2.0 * out.loglik + 2.0 * out.n_params;
  out.bic = -2.0 * out.loglik + out.n_params * std::log(n_events);
  out.converged = r.converged;
  out.iterations = r.evals;
  out.n_uncensored = n_events;
  return out;
}

inline FitResult<DropoutModel> fit_dropout_model(
    const InterimDataset& data, const DistributionFamily& family,
    std::optional<std::vector<double>> init = std::nullopt,
    NelderMeadOptions opts = {}) {
  const int n_drop = data.n_dropouts();
  if (n_drop == 0) {
    // No random censoring observed: the G == 0 sentinel regime.
    FitResult<DropoutModel> out;
    out.model = DropoutModel::none();
    out.converged = true;
    return out;
  }
  if (family.tag == Family::royston_parmar) {
    throw ModelError("spline dropout models are not supported");
  }

  const std::vector<double> start =
      init ? *init : detail::baseline_start(data, family,
                                            Link::proportional_hazards, true);
  const std::vector<double> x0 = detail::to_unconstrained(family, start);

  const auto objective = [&](const std::vector<double>& x) {
    DropoutModel m = DropoutModel::parametric(
        family, detail::from_unconstrained(family, x));
    return -dropout_loglik(m, data);
  };

  const auto r = nelder_mead_minimize(objective, x0, opts);

  FitResult<DropoutModel> out;
  out.model =
      DropoutModel::parametric(family, detail::from_unconstrained(family, r.x));
  out.loglik = -r.fmin;
  out.n_params = family.n_baseline_params();
  out.aic = -2.0 * out.loglik + 2.0 * out.n_params;
  out.bic = -2.0 * out.loglik + out.n_params * std::log(n_drop);
  out.converged = r.converged;
  out.iterations = r.evals;
  out.n_uncensored = n_drop;
  return out;
}

}  // namespace eventpi
