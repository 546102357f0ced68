#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventpi/bootstrap.hpp"
#include "eventpi/config.hpp"
#include "eventpi/csv.hpp"
#include "eventpi/fit.hpp"
#include "eventpi/km.hpp"
#include "eventpi/simulation.hpp"

namespace eventpi {

namespace detail {

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
}

inline DistributionFamily resolve_family(const ModelChoice& m,
                                         const InterimDataset& data) {
  if (m.family == Family::royston_parmar) {
    return royston_parmar_from_data(data, m.knots);
  }
  return make_family(m.family);
}

}  // namespace detail

// ---- fit -----------------------------------------------------------------

struct FitReportRow {
  std::string name;
  int q = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
};

inline std::vector<ModelChoice> default_fit_models() {
  std::vector<ModelChoice> out = {
      {Family::weibull, Link::proportional_hazards, 0},
      {Family::log_normal, Link::linear_probit, 0},
      {Family::log_logistic, Link::proportional_odds, 0},
      {Family::generalized_gamma, Link::proportional_hazards, 0},
  };
  for (int k = 1; k <= 3; ++k) {
    out.push_back({Family::royston_parmar, Link::proportional_hazards, k});
    out.push_back({Family::royston_parmar, Link::proportional_odds, k});
    out.push_back({Family::royston_parmar, Link::linear_probit, k});
  }
  return out;
}

inline std::vector<FitReportRow> cmd_fit(const std::string& csv_path,
                                         const RunConfig& cfg,
                                         std::ostream& os = std::cout) {
  const auto data = read_trial_csv(csv_path, cfg.covariates, cfg.t_c);
  const auto models =
      cfg.fit_models.empty() ? default_fit_models() : cfg.fit_models;

  std::vector<FitReportRow> rows;
  for (const auto& m : models) {
    const auto fit =
        fit_event_model(data, detail::resolve_family(m, data), m.link);
    rows.push_back(
        {m.label(), fit.n_params, fit.loglik, fit.aic, fit.bic, fit.converged});
  }
  std::sort(rows.begin(), rows.end(),
            [](const FitReportRow& a, const FitReportRow& b) {
              return a.bic < b.bic;
            });

  os << "model,q,loglik,aic,bic,converged\n";
  for (const auto& r : rows) {
    os << r.name << ',' << r.q << ',' << format_double(r.loglik) << ','
       << format_double(r.aic) << ',' << format_double(r.bic) << ','
       << (r.converged ? 1 : 0) << '\n';
  }

  detail::ensure_dir(cfg.output_dir);
  nlohmann::json j;
  j["n_subjects"] = data.n();
  j["n_events"] = data.n_events();
  j["models"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["models"].push_back({{"model", r.name},
                           {"q", r.q},
                           {"loglik", r.loglik},
                           {"aic", r.aic},
                           {"bic", r.bic},
                           {"converged", r.converged}});
  }
  std::ofstream(cfg.output_dir + "/fit.json") << j.dump(2) << '\n';
  return rows;
}

// ---- predict ---------------------------------------------------------------

struct PredictRow {
  double horizon = 0.0;
  int m_at_risk = 0;
  int lower = 0;
  int upper = 0;
  int plugin_lower = 0;
  int plugin_upper = 0;
  double cmf_mean = 0.0;
};

inline std::vector<PredictRow> cmd_predict(const std::string& csv_path,
                                           const RunConfig& cfg,
                                           std::ostream& warn = std::cerr) {
  if (cfg.horizons.empty()) {
    throw ParseError("predict requires at least one horizon in the config");
  }
  const auto data = read_trial_csv(csv_path, cfg.covariates, cfg.t_c);

  EventModelSpec espec;
  espec.family = detail::resolve_family(cfg.model, data);
  espec.link = cfg.model.link;
  DropoutModelSpec dspec{make_family(cfg.dropout_family)};

  BootstrapConfig bcfg;
  bcfg.B = cfg.B;
  bcfg.alpha = cfg.alpha;
  bcfg.master_seed = cfg.seed;
  bcfg.poibin_method = cfg.poibin_method;
  bcfg.threads = cfg.threads;

  if (data.n_at_risk() == 0) {
    warn << "warning: no at-risk subjects; all intervals are [0,0]\n";
  }

  const auto event_fit = fit_event_model(data, espec.family, espec.link);
  const auto dropout_fit = fit_dropout_model(data, dspec.family);
  const auto cmfs =
      bootstrap_cmfs(data, espec, dspec, cfg.horizons, bcfg);

  std::vector<PredictRow> rows;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const auto pi = prediction_interval(cmfs[h], cfg.alpha, cfg.horizons[h]);
    const auto plug = plugin_interval(data, event_fit.model, dropout_fit.model,
                                      cfg.horizons[h], cfg.alpha,
                                      cfg.poibin_method);
    rows.push_back({cfg.horizons[h], pi.m_at_risk, pi.lower, pi.upper,
                    plug.lower, plug.upper, cmfs[h].mean()});
  }

  detail::ensure_dir(cfg.output_dir);
  {
    std::ofstream csv(cfg.output_dir + "/predict_trajectory.csv");
    csv << "horizon,m_at_risk,lower,upper,plugin_lower,plugin_upper,cmf_mean\n";
    for (const auto& r : rows) {
      csv << format_double(r.horizon) << ',' << r.m_at_risk << ',' << r.lower
          << ',' << r.upper << ',' << r.plugin_lower << ',' << r.plugin_upper
          << ',' << format_double(r.cmf_mean) << '\n';
    }
  }
  nlohmann::json j;
  j["model"] = cfg.model.label();
  j["alpha"] = cfg.alpha;
  j["B"] = cfg.B;
  j["seed"] = cfg.seed;
  j["t_c"] = data.t_c;
  j["n_subjects"] = data.n();
  j["m_at_risk"] = data.n_at_risk();
  j["event_loglik"] = event_fit.loglik;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"horizon", r.horizon},
                         {"m_at_risk", r.m_at_risk},
                         {"lower", r.lower},
                         {"upper", r.upper},
                         {"plugin_lower", r.plugin_lower},
                         {"plugin_upper", r.plugin_upper},
                         {"cmf_mean", r.cmf_mean}});
  }
  std::ofstream(cfg.output_dir + "/predict.json") << j.dump(2) << '\n';
  return rows;
}

// ---- simulate ---------------------------------------------------------------

inline std::vector<ScenarioResult> cmd_simulate(const RunConfig& cfg,
                                                std::ostream& os = std::cout) {
  if (cfg.scenarios.empty()) {
    throw ParseError("simulate requires a 'scenarios' block in the config");
  }
  ModelUnderTest mut;
  mut.oracle = cfg.scenario_oracle;
  mut.family = cfg.model.family;
  mut.rp_internal_knots = cfg.model.knots;
  mut.link = cfg.model.link;
  mut.dropout_family = cfg.dropout_family;

  std::vector<ScenarioResult> results;
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    results.push_back(run_scenario(
        cfg.scenarios[i], mut,
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}), cfg.threads));
  }

  detail::ensure_dir(cfg.output_dir);
  const auto study_tag = [](Study s) { return s == Study::s1 ? "S1" : "S2"; };
  {
    std::ofstream csv(cfg.output_dir + "/replicates.csv");
    csv << "scenario,study,t_c,dt,hr,rho,k,p_censor,rep,failed,m_at_risk,"
           "lower,upper,true_lower,true_upper,realized_y,ccp,covered,"
           "rel_bias_lower,rel_bias_upper,width_ratio\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& sc = results[i].scenario;
      for (const auto& r : results[i].rows) {
        csv << i << ',' << study_tag(sc.study) << ',' << format_double(sc.t_c)
            << ',' << format_double(sc.dt) << ',' << format_double(sc.hr)
            << ',' << format_double(sc.rho) << ',' << format_double(sc.k)
            << ',' << format_double(sc.p_censor_target) << ',' << r.rep << ','
            << (r.failed ? 1 : 0) << ',' << r.m_at_risk << ',' << r.lower
            << ',' << r.upper << ',' << r.true_lower << ',' << r.true_upper
            << ',' << r.realized_y << ',' << format_double(r.ccp) << ','
            << (r.covered ? 1 : 0) << ',' << format_double(r.rel_bias_lower)
            << ',' << format_double(r.rel_bias_upper) << ','
            << format_double(r.width_ratio) << '\n';
      }
    }
  }
  {
    std::ofstream csv(cfg.output_dir + "/summary.csv");
    csv << "scenario,study,t_c,dt,hr,rho,k,p_censor,lambda0,psi,ucp,ucp_se,"
           "mean_rel_bias_lower,mean_rel_bias_upper,mean_width_ratio,"
           "mean_true_lower,mean_true_upper,n_failed,unreliable\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& res = results[i];
      const auto& sc = res.scenario;
      csv << i << ',' << study_tag(sc.study) << ',' << format_double(sc.t_c)
          << ',' << format_double(sc.dt) << ',' << format_double(sc.hr) << ','
          << format_double(sc.rho) << ',' << format_double(sc.k) << ','
          << format_double(sc.p_censor_target) << ','
          << format_double(res.lambda0) << ',' << format_double(res.psi) << ','
          << format_double(res.ucp) << ',' << format_double(res.ucp_se) << ','
          << format_double(res.mean_rel_bias_lower) << ','
          << format_double(res.mean_rel_bias_upper) << ','
          << format_double(res.mean_width_ratio) << ','
          << format_double(res.mean_true_lower) << ','
          << format_double(res.mean_true_upper) << ',' << res.n_failed << ','
          << (res.unreliable ? 1 : 0) << '\n';
    }
  }

  for (std::size_t i = 0; i < results.size(); ++i) {
    os << "scenario " << i << ": UCP=" << results[i].ucp
       << " (se=" << results[i].ucp_se << "), width ratio "
       << results[i].mean_width_ratio << ", failed " << results[i].n_failed
       << "\n";
  }
  return results;
}

// ---- calibrate -------------------------------------------------------------

inline LambdaCalibration cmd_calibrate(const RunConfig& cfg,
                                       std::ostream& os = std::cout) {
  if (!cfg.calibrate_cell) {
    throw ParseError("calibrate requires a 'calibrate' block in the config");
  }
  const auto cal = calibrate_lambda0(*cfg.calibrate_cell, cfg.seed);
  os << "lambda0=" << format_double(cal.lambda0)
     << " achieved_censoring=" << format_double(cal.achieved)
     << " iterations=" << cal.iterations;
  if (cfg.calibrate_cell->study == Study::s1) {
    os << " psi=" << format_double(cal.lambda0 * cfg.calibrate_cell->k)
       << " rho_star=" << format_double(cal.rho_star);
  }
  os << '\n';

  detail::ensure_dir(cfg.output_dir);
  nlohmann::json j;
  j["lambda0"] = cal.lambda0;
  j["achieved_censoring"] = cal.achieved;
  j["iterations"] = cal.iterations;
  j["converged"] = cal.converged;
  if (cfg.calibrate_cell->study == Study::s1) {
    j["psi"] = cal.lambda0 * cfg.calibrate_cell->k;
    j["rho_star"] = cal.rho_star;
  }
  std::ofstream(cfg.output_dir + "/calibrate.json") << j.dump(2) << '\n';
  return cal;
}

// ---- diagnose ----------------------------------------------------------------

struct DiagnosticRow {
  std::string stratum;
  std::string link;
  double log_t = 0.0;
  double value = 0.0;
};

// Kaplan-Meier survival per covariate stratum, pushed through each link
// transform against log time: linearity diagnoses the baseline/link choice.
inline std::vector<DiagnosticRow> cmd_diagnose(const std::string& csv_path,
                                               const RunConfig& cfg,
                                               std::ostream& warn = std::cerr) {
  const auto data = read_trial_csv(csv_path, cfg.covariates, cfg.t_c);

  std::map<std::vector<double>, std::pair<std::vector<double>, std::vector<int>>>
      strata;
  for (const auto& s : data.subjects) {
    auto& [times, events] = strata[s.z];
    times.push_back(s.t_obs);
    events.push_back(s.delta);
  }

  const Link links[] = {Link::proportional_hazards, Link::proportional_odds,
                        Link::linear_probit};
  std::vector<DiagnosticRow> rows;
  for (const auto& [z, te] : strata) {
    std::string label = "z=(";
    for (std::size_t i = 0; i < z.size(); ++i) {
      label += (i ? "," : "") + format_double(z[i]);
    }
    label += ")";
    bool any_event = false;
    for (int e : te.second) any_event |= e == 1;
    if (!any_event) {
      warn << "warning: stratum " << label << " has no events; skipped\n";
      continue;
    }
    const auto km = kaplan_meier(te.first, te.second);
    for (std::size_t i = 0; i < km.time.size(); ++i) {
      if (!(km.value[i] > 0.0 && km.value[i] < 1.0) || !(km.time[i] > 0.0)) {
        continue;
      }
      for (Link link : links) {
        rows.push_back({label, link_name(link), std::log(km.time[i]),
                        transform_survival(link, km.value[i])});
      }
    }
  }

  detail::ensure_dir(cfg.output_dir);
  std::ofstream csv(cfg.output_dir + "/diagnostics.csv");
  csv << "stratum,link,log_t,value\n";
  for (const auto& r : rows) {
    csv << r.stratum << ',' << r.link << ',' << format_double(r.log_t) << ','
        << format_double(r.value) << '\n';
  }
  return rows;
}

}  // namespace eventpi
