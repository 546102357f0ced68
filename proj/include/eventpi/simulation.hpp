#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "eventpi/bootstrap.hpp"
#include "eventpi/data.hpp"
#include "eventpi/errors.hpp"
#include "eventpi/event_prob.hpp"
#include "eventpi/fit.hpp"
#include "eventpi/norta.hpp"
#include "eventpi/poisson_binomial.hpp"
#include "eventpi/rng.hpp"
#include "eventpi/survival.hpp"

namespace eventpi {

enum class Study { s1, s2 };

// One cell of the simulation factor grid. t_c is measured from accrual end;
// the calendar interim time is accrual_span + t_c. Under S1, the dropout rate
// is psi = k * lambda0 and entry/dropout are NORTA-correlated at rho; S2 has
// administrative censoring only.
struct ScenarioSpec {
  Study study = Study::s2;
  double t_c = 1.0;
  double dt = 1.0;
  double hr = 0.8;
  double rho = 0.0;              // S1 only
  double k = 0.0;                // S1 only: psi / lambda0
  double p_censor_target = 0.5;
  int n = 1000;
  int N = 200;
  int B = 100;
  double accrual_span = 3.0;
  double alpha = 0.05;
  double weibull_shape = 0.6;

  double interim_calendar_time() const { return accrual_span + t_c; }
};

struct GeneratedTrial {
  InterimDataset dataset;
  double true_shape = 0.0;
  double true_lambda0 = 0.0;
  double true_beta = 0.0;
  double true_dropout_rate = 0.0;  // 0 under S2
  SurvivalModel true_event_model;
  DropoutModel true_dropout_model;
  ConditionalProbabilityVector true_pi;
  int realized_future_events = 0;  // events in the horizon window, from latents
};

struct MetricsRow {
  int rep = 0;
  bool failed = false;
  int m_at_risk = 0;
  int lower = 0, upper = 0;
  int true_lower = 0, true_upper = 0;
  int realized_y = 0;
  double ccp = kNaN;
  bool covered = false;
  double rel_bias_lower = kNaN;
  double rel_bias_upper = kNaN;
  double width_ratio = kNaN;
};

struct ScenarioResult {
  ScenarioSpec scenario;
  double lambda0 = 0.0;
  double psi = 0.0;
  double rho_star = 0.0;
  std::vector<MetricsRow> rows;
  double ucp = kNaN;
  double ucp_se = kNaN;
  double mean_rel_bias_lower = kNaN;
  double mean_rel_bias_upper = kNaN;
  double mean_width_ratio = kNaN;
  double mean_true_lower = kNaN;
  double mean_true_upper = kNaN;
  int n_failed = 0;
  bool unreliable = false;
};

// Procedure under evaluation in a scenario. `oracle` plugs the generating
// parameters straight into the predictive distribution (no estimation).
struct ModelUnderTest {
  bool oracle = false;
  Family family = Family::weibull;
  int rp_internal_knots = 1;  // royston_parmar only
  Link link = Link::proportional_hazards;
  Family dropout_family = Family::exponential;
};

// Weibull proportional-hazards event times with a Bernoulli(0.5) treatment
// flag: T = (-log U / (lambda0 exp(beta Z)))^(1/shape).
inline std::pair<std::vector<double>, std::vector<int>> generate_weibull_ph(
    std::size_t n, double shape, double lambda0, double beta,
    std::uint64_t seed) {
  if (!(shape > 0.0 && lambda0 > 0.0)) {
    throw std::invalid_argument("weibull shape and scale must be positive");
  }
  Rng rng(seed);
  std::vector<double> times(n);
  std::vector<int> arm(n);
  for (std::size_t i = 0; i < n; ++i) {
    arm[i] = rng.bernoulli(0.5);
    const double rate = lambda0 * std::exp(beta * arm[i]);
    times[i] = std::pow(-std::log1p(-rng.uniform01()) / rate, 1.0 / shape);
  }
  return {std::move(times), std::move(arm)};
}

namespace detail {

struct LatentTrial {
  std::vector<double> event_time;
  std::vector<int> arm;
  std::vector<double> entry;
  std::vector<double> dropout;  // +inf under S2
};

inline LatentTrial latent_trial(const ScenarioSpec& sc, double lambda0,
                                double rho_star, std::uint64_t seed) {
  LatentTrial lt;
  const double beta = std::log(sc.hr);
  auto [times, arm] = generate_weibull_ph(
      static_cast<std::size_t>(sc.n), sc.weibull_shape, lambda0, beta,
      derive_seed(seed, {1}));
  lt.event_time = std::move(times);
  lt.arm = std::move(arm);

  Rng rng = Rng::stream(seed, {2});
  const std::size_t n = lt.event_time.size();
  if (sc.study == Study::s1) {
    const double psi = sc.k * lambda0;
    sample_entry_dropout(n, sc.accrual_span, psi, rho_star, rng, lt.entry,
                         lt.dropout);
  } else {
    lt.entry.resize(n);
    lt.dropout.assign(n, kInf);
    for (std::size_t i = 0; i < n; ++i) {
      lt.entry[i] = rng.uniform(0.0, sc.accrual_span);
    }
  }
  return lt;
}

inline double censoring_proportion(const LatentTrial& lt, double t_cal) {
  std::size_t admin = 0;
  for (std::size_t i = 0; i < lt.event_time.size(); ++i) {
    const double tau = t_cal - lt.entry[i];
    if (tau < std::min(lt.event_time[i], lt.dropout[i])) ++admin;
  }
  return static_cast<double>(admin) / static_cast<double>(lt.event_time.size());
}

}  // namespace detail

struct LambdaCalibration {
  double lambda0 = 0.0;
  double achieved = 0.0;
  int iterations = 0;
  double rho_star = 0.0;  // from the final inner NORTA calibration (S1)
  bool converged = false;
};

inline constexpr int kLambdaCalibrationSample = 20000;
inline constexpr double kLambdaTolerance = 1e-3;
inline constexpr int kLambdaMaxIterations = 300;

// Bisection on lambda0 so the simulated interim-censoring proportion matches
// the target. Each candidate is scored on a fresh Monte Carlo sample; under
// S1 the NORTA rho calibration is re-run per candidate because psi = k*lambda0
// moves the dropout margin.
inline LambdaCalibration calibrate_lambda0(const ScenarioSpec& sc,
                                           std::uint64_t seed) {
  if (!(sc.p_censor_target > 0.0 && sc.p_censor_target < 1.0)) {
    throw CalibrationError("target censoring proportion must lie in (0,1)");
  }
  LambdaCalibration out;
  const double t_cal = sc.interim_calendar_time();
  ScenarioSpec cal = sc;
  cal.n = kLambdaCalibrationSample;

  int evals = 0;
  const auto phat = [&](double lambda) {
    const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(++evals)});
    double rho_star = 0.0;
    if (sc.study == Study::s1) {
      rho_star = calibrate_norta_rho(sc.accrual_span, sc.k * lambda, sc.rho,
                                     derive_seed(s, {7}))
                     .rho_star;
    }
    out.rho_star = rho_star;
    const auto lt = detail::latent_trial(cal, lambda, rho_star, s);
    return detail::censoring_proportion(lt, t_cal);
  };

  double lo = 1e-6, hi = 1.0;
  if (phat(lo) < sc.p_censor_target) {
    throw CalibrationError("censoring target unreachable at the lower bracket");
  }
  int doublings = 0;
  while (phat(hi) > sc.p_censor_target) {
    hi *= 2.0;
    if (++doublings > 60) {
      throw CalibrationError("no upper bracket for the censoring bisection");
    }
  }

  double mid = 0.5 * (lo + hi), p = 0.0;
  while (evals < kLambdaMaxIterations) {
    mid = 0.5 * (lo + hi);
    p = phat(mid);
    if (std::abs(p - sc.p_censor_target) <= kLambdaTolerance) {
      out.converged = true;
      break;
    }
    if (p > sc.p_censor_target) {
      lo = mid;  // too little hazard: too much censoring
    } else {
      hi = mid;
    }
  }
  out.lambda0 = mid;
  out.achieved = p;
  out.iterations = evals;
  return out;
}

inline GeneratedTrial generate_trial(const ScenarioSpec& sc, double lambda0,
                                     double rho_star, std::uint64_t seed) {
  const auto lt = detail::latent_trial(sc, lambda0, rho_star, seed);
  const double t_cal = sc.interim_calendar_time();
  const double beta = std::log(sc.hr);

  GeneratedTrial out;
  out.true_shape = sc.weibull_shape;
  out.true_lambda0 = lambda0;
  out.true_beta = beta;
  out.true_dropout_rate = sc.study == Study::s1 ? sc.k * lambda0 : 0.0;

  out.true_event_model =
      SurvivalModel{make_family(Family::weibull),
                    Link::proportional_hazards,
                    {{sc.weibull_shape, lambda0}, {beta}}};
  out.true_dropout_model =
      sc.study == Study::s1
          ? DropoutModel::parametric(make_family(Family::exponential),
                                     {out.true_dropout_rate})
          : DropoutModel::none();

  out.dataset.t_c = t_cal;
  out.dataset.covariate_names = {"treat"};
  out.dataset.subjects.reserve(lt.event_time.size());
  for (std::size_t i = 0; i < lt.event_time.size(); ++i) {
    const double tau = t_cal - lt.entry[i];
    const double t = lt.event_time[i], l = lt.dropout[i];
    SubjectRecord s;
    s.id = "s" + std::to_string(i + 1);
    s.entry_time = lt.entry[i];
    s.z = {static_cast<double>(lt.arm[i])};
    if (t <= std::min(l, tau)) {
      s.delta = 1;
      s.t_obs = t;
    } else if (l < t && l <= tau) {
      s.epsilon = 1;
      s.t_obs = l;
    } else {
      s.gamma = 1;
      s.t_obs = tau;
    }
    out.dataset.subjects.push_back(std::move(s));
  }
  validate(out.dataset);

  out.true_pi =
      pi_vector(out.true_event_model, out.true_dropout_model, out.dataset, sc.dt);

  int future = 0;
  for (std::size_t i = 0; i < lt.event_time.size(); ++i) {
    const double tau = t_cal - lt.entry[i];
    if (tau < std::min(lt.event_time[i], lt.dropout[i])) {
      if (lt.event_time[i] <= std::min(tau + sc.dt, lt.dropout[i])) ++future;
    }
  }
  out.realized_future_events = future;
  return out;
}

namespace detail {

inline MetricsRow evaluate_replicate(const ScenarioSpec& sc,
                                     const ModelUnderTest& mut,
                                     const GeneratedTrial& trial,
                                     std::uint64_t bootstrap_seed) {
  MetricsRow row;
  row.m_at_risk = trial.dataset.n_at_risk();
  row.realized_y = trial.realized_future_events;

  // Reference interval from the exact predictive law at the true pi.
  PoiBin truth{trial.true_pi.pi, PoiBinMethod::exact_dp};
  const auto tcmf = truth.cmf_all();
  const auto tquant = [&](double q) {
    for (std::size_t y = 0; y < tcmf.size(); ++y) {
      if (tcmf[y] >= q) return static_cast<int>(y);
    }
    return truth.size();
  };
  row.true_lower = tquant(sc.alpha / 2.0);
  row.true_upper = tquant(1.0 - sc.alpha / 2.0);

  if (mut.oracle) {
    row.lower = row.true_lower;
    row.upper = row.true_upper;
  } else {
    EventModelSpec espec;
    espec.link = mut.link;
    espec.family = mut.family == Family::royston_parmar
                       ? royston_parmar_from_data(trial.dataset,
                                                  mut.rp_internal_knots)
                       : make_family(mut.family);
    DropoutModelSpec dspec{make_family(mut.dropout_family)};
    BootstrapConfig bcfg;
    bcfg.B = sc.B;
    bcfg.alpha = sc.alpha;
    bcfg.master_seed = bootstrap_seed;
    bcfg.threads = 1;  // parallelism lives at the Monte Carlo level
    const auto cmf = bootstrap_cmf(trial.dataset, espec, dspec, sc.dt, bcfg);
    const auto pi = prediction_interval(cmf, sc.alpha, sc.dt);
    row.lower = pi.lower;
    row.upper = pi.upper;
  }

  const double mass_below =
      row.lower > 0 ? tcmf[static_cast<std::size_t>(row.lower) - 1] : 0.0;
  row.ccp = tcmf[static_cast<std::size_t>(row.upper)] - mass_below;
  row.covered = row.lower <= row.realized_y && row.realized_y <= row.upper;

  if (row.true_lower > 0) {
    row.rel_bias_lower =
        static_cast<double>(row.lower - row.true_lower) / row.true_lower;
  }
  if (row.true_upper > 0) {
    row.rel_bias_upper =
        static_cast<double>(row.upper - row.true_upper) / row.true_upper;
  }
  const int true_width = row.true_upper - row.true_lower;
  if (true_width > 0) {
    row.width_ratio = static_cast<double>(row.upper - row.lower) / true_width;
  }
  return row;
}

}  // namespace detail

// Full Monte Carlo evaluation of one scenario cell: calibrate the generating
// scale, simulate N trials, build the interval under the model under test,
// and score CCP/bias/width against the true-pi predictive distribution.
inline ScenarioResult run_scenario(const ScenarioSpec& sc,
                                   const ModelUnderTest& mut,
                                   std::uint64_t seed, int threads = 0) {
  ScenarioResult res;
  res.scenario = sc;

  const auto cal = calibrate_lambda0(sc, derive_seed(seed, {0xCA1}));
  res.lambda0 = cal.lambda0;
  res.psi = sc.study == Study::s1 ? sc.k * cal.lambda0 : 0.0;
  double rho_star = 0.0;
  if (sc.study == Study::s1) {
    rho_star = calibrate_norta_rho(sc.accrual_span, res.psi, sc.rho,
                                   derive_seed(seed, {0xF0}))
                   .rho_star;
  }
  res.rho_star = rho_star;

  res.rows.assign(static_cast<std::size_t>(sc.N), MetricsRow{});
  const int n_threads =
      threads > 0 ? threads
                  : static_cast<int>(
                        std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= sc.N) break;
      MetricsRow row;
      row.rep = k;
      try {
        const auto trial = generate_trial(
            sc, cal.lambda0, rho_star,
            derive_seed(seed, {1, static_cast<std::uint64_t>(k)}));
        row = detail::evaluate_replicate(
            sc, mut, trial,
            derive_seed(seed, {2, static_cast<std::uint64_t>(k)}));
        row.rep = k;
      } catch (const std::exception&) {
        row.failed = true;
      }
      res.rows[static_cast<std::size_t>(k)] = row;
    }
  };
  if (n_threads <= 1 || sc.N == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double sum_ccp = 0.0, sum_var = 0.0, sum_rbl = 0.0, sum_rbu = 0.0,
         sum_wr = 0.0, sum_tl = 0.0, sum_tu = 0.0;
  int ok = 0, n_rbl = 0, n_rbu = 0, n_wr = 0;
  for (const auto& row : res.rows) {
    if (row.failed) {
      ++res.n_failed;
      continue;
    }
    ++ok;
    sum_ccp += row.ccp;
    sum_var += row.ccp * (1.0 - row.ccp);
    sum_tl += row.true_lower;
    sum_tu += row.true_upper;
    if (std::isfinite(row.rel_bias_lower)) {
      sum_rbl += row.rel_bias_lower;
      ++n_rbl;
    }
    if (std::isfinite(row.rel_bias_upper)) {
      sum_rbu += row.rel_bias_upper;
      ++n_rbu;
    }
    if (std::isfinite(row.width_ratio)) {
      sum_wr += row.width_ratio;
      ++n_wr;
    }
  }
  if (ok > 0) {
    res.ucp = sum_ccp / ok;
    res.ucp_se = std::sqrt(sum_var / ok / ok);
    res.mean_true_lower = sum_tl / ok;
    res.mean_true_upper = sum_tu / ok;
    if (n_rbl > 0) res.mean_rel_bias_lower = sum_rbl / n_rbl;
    if (n_rbu > 0) res.mean_rel_bias_upper = sum_rbu / n_rbu;
    if (n_wr > 0) res.mean_width_ratio = sum_wr / n_wr;
  }
  res.unreliable = res.n_failed * 10 > sc.N;
  return res;
}

}  // namespace eventpi
