#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "eventpi/data.hpp"
#include "eventpi/errors.hpp"
#include "eventpi/event_prob.hpp"
#include "eventpi/fit.hpp"
#include "eventpi/poisson_binomial.hpp"
#include "eventpi/rng.hpp"
#include "eventpi/survival.hpp"

namespace eventpi {

struct BootstrapConfig {
  int B = 1000;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  int max_refit_retries = 2;
  std::optional<PoiBinMethod> poibin_method;  // unset: auto by at-risk count
  int threads = 0;                            // 0: hardware concurrency
};

// Averaged conditional CMF of the future event count over the bootstrap
// replicates, on the fixed support {0..m} of the observed at-risk set.
struct BootstrapCmf {
  int m = 0;
  std::vector<double> cmf;
  int replicates_used = 0;
  int replicates_dropped = 0;

  double mean() const {
    double s = 0.0;
    for (int y = 0; y < m; ++y) s += 1.0 - cmf[static_cast<std::size_t>(y)];
    return s;
  }
};

struct PredictionInterval {
  int lower = 0;
  int upper = 0;
  double alpha = 0.05;
  double horizon = 0.0;
  int m_at_risk = 0;
};

struct EventModelSpec {
  DistributionFamily family;
  Link link = Link::proportional_hazards;
};

struct DropoutModelSpec {
  DistributionFamily family = make_family(Family::exponential);
};

// Inverse-transform draw from the event-time distribution truncated to
// (0, tau]: t = F^{-1}(u F(tau|z) | z). The covariate effect is folded in on
// the model's own link scale by the quantile transform.
inline double sample_truncated(const SurvivalModel& model,
                               std::span<const double> z, double tau,
                               double u) {
  const double mass = model.cdf(tau, z);
  if (!(mass > 0.0)) {
    throw DegenerateTruncationError("truncation mass F(tau|z) is zero");
  }
  return model.quantile(u * mass, z);
}

inline double sample_truncated(const DropoutModel& model, double tau,
                               double u) {
  const double mass = model.cdf(tau);
  if (!(mass > 0.0)) {
    throw DegenerateTruncationError("dropout truncation mass G(tau) is zero");
  }
  return model.quantile(u * mass);
}

// One bootstrap replicate of the data: event and dropout times are redrawn
// from their conditionals truncated at tau_j; indicators, entry dates,
// covariates, and administrative times stay fixed.
inline InterimDataset resample_dataset(const InterimDataset& data,
                                       const SurvivalModel& event,
                                       const DropoutModel& dropout,
                                       std::uint64_t seed) {
  Rng rng(seed);
  InterimDataset out = data;
  for (auto& s : out.subjects) {
    const double tau = data.t_c - s.entry_time;
    try {
      if (s.delta == 1) {
        s.t_obs = sample_truncated(event, s.z, tau, rng.uniform01());
      } else if (s.epsilon == 1) {
        s.t_obs = sample_truncated(dropout, tau, rng.uniform01());
      } else {
        s.t_obs = tau;
      }
    } catch (const DegenerateTruncationError& e) {
      throw DegenerateTruncationError(std::string(e.what()) + " (subject '" +
                                      s.id + "')");
    }
  }
  return out;
}

namespace detail {

struct ReplicateCmfs {
  bool ok = false;
  std::vector<std::vector<double>> cmf_per_horizon;
};

inline ReplicateCmfs run_replicate(const InterimDataset& data,
                                   const SurvivalModel& fitted_event,
                                   const DropoutModel& fitted_dropout,
                                   std::span<const double> horizons,
                                   const BootstrapConfig& cfg, int b,
                                   PoiBinMethod method) {
  ReplicateCmfs rep;
  for (int retry = 0; retry <= cfg.max_refit_retries; ++retry) {
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(b),
                                      static_cast<std::uint64_t>(retry)});
    const InterimDataset star =
        resample_dataset(data, fitted_event, fitted_dropout, seed);

    FitResult<SurvivalModel> ef;
    try {
      ef = fit_event_model(star, fitted_event.family, fitted_event.link,
                           fitted_event.params);
    } catch (const FitError&) {
      continue;
    }
    if (!ef.converged) continue;

    DropoutModel drop_star = DropoutModel::none();
    if (!fitted_dropout.is_none) {
      FitResult<DropoutModel> df;
      try {
        df = fit_dropout_model(star, fitted_dropout.family,
                               fitted_dropout.params);
      } catch (const FitError&) {
        continue;
      }
      if (!df.converged) continue;
      drop_star = df.model;
    }

    rep.cmf_per_horizon.clear();
    bool horizons_ok = true;
    for (double dt : horizons) {
      ConditionalProbabilityVector pis;
      try {
        pis = pi_vector(ef.model, drop_star, star, dt);
      } catch (const std::exception&) {
        horizons_ok = false;
        break;
      }
      PoiBin pb{std::move(pis.pi), method};
      rep.cmf_per_horizon.push_back(pb.cmf_all());
    }
    if (!horizons_ok) continue;
    rep.ok = true;
    return rep;
  }
  return rep;
}

}  // namespace detail

// Algorithm: fit on the observed data, then B times (resample, refit,
// recompute pi*, evaluate the conditional CMF), averaging the CMFs. The
// result is a deterministic function of (data, specs, cfg): replicate b's
// stream depends only on (master_seed, b, retry), and the reduction runs in
// replicate order regardless of the thread count.
inline std::vector<BootstrapCmf> bootstrap_cmfs(const InterimDataset& data,
                                                const EventModelSpec& event_spec,
                                                const DropoutModelSpec& dropout_spec,
                                                std::span<const double> horizons,
                                                const BootstrapConfig& cfg) {
  const auto event_fit =
      fit_event_model(data, event_spec.family, event_spec.link);
  if (!event_fit.converged) {
    throw FitError("event model fit did not converge on the observed data");
  }
  const auto dropout_fit = fit_dropout_model(data, dropout_spec.family);
  if (!dropout_fit.converged) {
    throw FitError("dropout model fit did not converge on the observed data");
  }

  const int m = data.n_at_risk();
  std::vector<BootstrapCmf> out(horizons.size());
  for (auto& c : out) {
    c.m = m;
    c.cmf.assign(static_cast<std::size_t>(m) + 1, 0.0);
  }

  if (m == 0) {
    for (auto& c : out) {
      c.cmf.assign(1, 1.0);
      c.replicates_used = cfg.B;
    }
    return out;
  }

  const PoiBinMethod method = cfg.poibin_method
                                  ? *cfg.poibin_method
                                  : poibin_auto_method(static_cast<std::size_t>(m));

  std::vector<detail::ReplicateCmfs> reps(static_cast<std::size_t>(cfg.B));
  const int n_threads = cfg.threads > 0
                            ? cfg.threads
                            : static_cast<int>(std::max(
                                  1u, std::thread::hardware_concurrency()));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (;;) {
      const int b = next.fetch_add(1);
      if (b >= cfg.B) break;
      reps[static_cast<std::size_t>(b)] = detail::run_replicate(
          data, event_fit.model, dropout_fit.model, horizons, cfg, b, method);
    }
  };
  if (n_threads <= 1 || cfg.B == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int used = 0;
  for (int b = 0; b < cfg.B; ++b) {
    const auto& rep = reps[static_cast<std::size_t>(b)];
    if (!rep.ok) continue;
    ++used;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      for (std::size_t y = 0; y <= static_cast<std::size_t>(m); ++y) {
        out[h].cmf[y] += rep.cmf_per_horizon[h][y];
      }
    }
  }
  const int dropped = cfg.B - used;
  if (used == 0 || dropped > cfg.B / 5) {
    throw BootstrapError("more than 20% of bootstrap replicates failed (" +
                         std::to_string(dropped) + " of " +
                         std::to_string(cfg.B) + ")");
  }
  for (auto& c : out) {
    for (double& v : c.cmf) v /= used;
    c.replicates_used = used;
    c.replicates_dropped = dropped;
  }
  return out;
}

inline BootstrapCmf bootstrap_cmf(const InterimDataset& data,
                                  const EventModelSpec& event_spec,
                                  const DropoutModelSpec& dropout_spec,
                                  double dt, const BootstrapConfig& cfg) {
  const double horizons[] = {dt};
  return bootstrap_cmfs(data, event_spec, dropout_spec, horizons, cfg)[0];
}

// min{y : F(y) >= q} applied at both tails of the averaged CMF.
inline PredictionInterval prediction_interval(const BootstrapCmf& cmf,
                                              double alpha,
                                              double horizon = 0.0) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("prediction interval: alpha outside (0,1)");
  }
  const auto quant = [&](double q) {
    for (std::size_t y = 0; y < cmf.cmf.size(); ++y) {
      if (cmf.cmf[y] >= q) return static_cast<int>(y);
    }
    return cmf.m;
  };
  PredictionInterval pi;
  pi.lower = quant(alpha / 2.0);
  pi.upper = quant(1.0 - alpha / 2.0);
  pi.alpha = alpha;
  pi.horizon = horizon;
  pi.m_at_risk = cmf.m;
  return pi;
}

// Comparison baseline: single plug-in CMF at the point estimates, no
// bootstrap refitting.
inline PredictionInterval plugin_interval(const InterimDataset& data,
                                          const SurvivalModel& event,
                                          const DropoutModel& dropout,
                                          double dt, double alpha,
                                          std::optional<PoiBinMethod> method =
                                              std::nullopt) {
  const int m = data.n_at_risk();
  PredictionInterval pi;
  pi.alpha = alpha;
  pi.horizon = dt;
  pi.m_at_risk = m;
  if (m == 0) return pi;
  auto pis = pi_vector(event, dropout, data, dt);
  PoiBin pb{std::move(pis.pi),
            method ? *method : poibin_auto_method(static_cast<std::size_t>(m))};
  pi.lower = pb.quantile(alpha / 2.0);
  pi.upper = pb.quantile(1.0 - alpha / 2.0);
  return pi;
}

}  // namespace eventpi
