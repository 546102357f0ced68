#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "eventpi/data.hpp"
#include "eventpi/errors.hpp"
#include "eventpi/mathfn.hpp"
#include "eventpi/quadrature.hpp"
#include "eventpi/survival.hpp"

namespace eventpi {

// Per at-risk subject probability of an event inside (tau_j, tau_j + dt],
// in dataset order of the gamma = 1 subjects.
struct ConditionalProbabilityVector {
  std::vector<double> pi;
  double horizon = 0.0;
};

namespace detail {

// Absorb quadrature noise only; anything bigger is a real defect upstream.
inline double clamp_probability(double q) {
  if (q >= 0.0 && q <= 1.0) return q;
  if (q < 0.0 && q >= -1e-10) return 0.0;
  if (q > 1.0 && q - 1.0 <= 1e-10) return 1.0;
  throw ModelError("conditional probability outside [0,1] beyond tolerance: " +
                   std::to_string(q));
}

inline constexpr double kTimeFloorSliver = 1e-12;

}  // namespace detail

// Interim-censoring-only special case: pi = 1 - S(tau+dt|z)/S(tau|z).
inline double pi_no_dropout(const SurvivalModel& event,
                            const AtRiskProfile& prof, double dt) {
  if (dt == 0.0) return 0.0;
  const double ls_now = event.log_survival(prof.tau, prof.z);
  if (!(std::exp(ls_now) > 0.0)) {
    throw AtRiskUnderflowError("survival mass at tau underflowed");
  }
  const double ls_later = event.log_survival(prof.tau + dt, prof.z);
  return detail::clamp_probability(-std::expm1(ls_later - ls_now));
}

// Exponential event rate with exponential dropout, in closed form.
inline double pi_exponential_closed(double lambda_z, double psi, double dt) {
  if (psi == 0.0) return -std::expm1(-lambda_z * dt);
  return lambda_z / (lambda_z + psi) * -std::expm1(-(lambda_z + psi) * dt);
}

// General formula: the event-window mass net of dropout interception,
// normalized by the probability of being at risk at tau.
inline double pi_general(const SurvivalModel& event, const DropoutModel& dropout,
                         const AtRiskProfile& prof, double dt) {
  if (dropout.is_none) return pi_no_dropout(event, prof, dt);
  if (dt == 0.0) return 0.0;

  const double tau = prof.tau;

  // Closed form when both processes are exponential on the hazard scale.
  if (event.family.tag == Family::exponential &&
      event.link == Link::proportional_hazards &&
      dropout.family.tag == Family::exponential) {
    const double lambda_z =
        event.params.baseline[0] * std::exp(event.linear_predictor(prof.z));
    return pi_exponential_closed(lambda_z, dropout.params[0], dt);
  }

  const double surv_event = std::exp(event.log_survival(tau, prof.z));
  const double surv_drop = dropout.survival(tau);
  const double denom = surv_event * surv_drop;
  if (denom < 1e-300) {
    throw AtRiskUnderflowError("at-risk probability underflowed at tau=" +
                               std::to_string(tau));
  }

  const double mass_window =
      surv_event - std::exp(event.log_survival(tau + dt, prof.z));

  const auto integrand = [&](double u) {
    return dropout.cdf(u) * event.pdf(u, prof.z);
  };

  double integral = 0.0;
  double lo = tau;
  if (tau < detail::kTimeFloorSliver) {
    // Integrable density singularity possible at t = 0: excise a sliver and
    // use the closed-form cdf increment there.
    const double sliver = 1e-8;
    integral += dropout.cdf(sliver) *
                (event.cdf(sliver, prof.z) - event.cdf(tau, prof.z));
    lo = sliver;
  }
  integral += integrate(integrand, lo, tau + dt);

  return detail::clamp_probability((mass_window - integral) / denom);
}

inline ConditionalProbabilityVector pi_vector(const SurvivalModel& event,
                                              const DropoutModel& dropout,
                                              const InterimDataset& data,
                                              double dt) {
  ConditionalProbabilityVector out;
  out.horizon = dt;
  for (const auto& s : data.subjects) {
    if (s.gamma != 1) continue;
    const AtRiskProfile prof{data.t_c - s.entry_time, s.z};
    try {
      out.pi.push_back(pi_general(event, dropout, prof, dt));
    } catch (const std::exception& e) {
      throw ModelError(std::string(e.what()) + " (subject '" + s.id + "')");
    }
  }
  return out;
}

}  // namespace eventpi
