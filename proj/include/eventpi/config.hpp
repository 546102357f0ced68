#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventpi/errors.hpp"
#include "eventpi/poisson_binomial.hpp"
#include "eventpi/simulation.hpp"
#include "eventpi/survival.hpp"

namespace eventpi {

inline Family family_from_string(const std::string& s) {
  if (s == "exponential" || s == "exp") return Family::exponential;
  if (s == "weibull") return Family::weibull;
  if (s == "lognormal" || s == "log-normal") return Family::log_normal;
  if (s == "loglogistic" || s == "log-logistic") return Family::log_logistic;
  if (s == "gengamma" || s == "generalized-gamma") {
    return Family::generalized_gamma;
  }
  if (s == "royston-parmar" || s == "rp") return Family::royston_parmar;
  throw ParseError("unknown distribution family '" + s + "'");
}

inline Link link_from_string(const std::string& s) {
  if (s == "ph") return Link::proportional_hazards;
  if (s == "po") return Link::proportional_odds;
  if (s == "lp") return Link::linear_probit;
  throw ParseError("unknown link scale '" + s + "' (expected ph, po, lp)");
}

inline std::optional<PoiBinMethod> poibin_from_string(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "exact") return PoiBinMethod::exact_dp;
  if (s == "poisson") return PoiBinMethod::poisson_approx;
  if (s == "normal") return PoiBinMethod::normal_approx;
  if (s == "brute") return PoiBinMethod::brute_force;
  throw ParseError("unknown poibin method '" + s + "'");
}

struct ModelChoice {
  Family family = Family::weibull;
  Link link = Link::proportional_hazards;
  int knots = 0;  // royston_parmar internal knots

  std::string label() const {
    std::string name = family_name(family);
    if (family == Family::royston_parmar) {
      name += "(" + std::to_string(knots) + ")";
    }
    return name + "-" + link_name(link);
  }
};

struct RunConfig {
  int schema_version = 1;
  std::string time_unit = "years";
  std::uint64_t seed = 0;
  int threads = 0;
  double alpha = 0.05;
  std::vector<std::string> covariates;
  std::optional<double> t_c;
  ModelChoice model;
  Family dropout_family = Family::exponential;
  std::vector<double> horizons;
  int B = 1000;
  std::optional<PoiBinMethod> poibin_method;  // nullopt: auto
  std::string output_dir = ".";
  std::vector<ModelChoice> fit_models;
  std::vector<ScenarioSpec> scenarios;
  bool scenario_oracle = false;
  std::optional<ScenarioSpec> calibrate_cell;
};

namespace detail {

inline ModelChoice model_choice_from_json(const nlohmann::json& j) {
  ModelChoice m;
  if (j.contains("family")) m.family = family_from_string(j.at("family"));
  if (j.contains("link")) m.link = link_from_string(j.at("link"));
  if (j.contains("knots")) m.knots = j.at("knots").get<int>();
  return m;
}

inline std::vector<double> number_list(const nlohmann::json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<double>());
  } else {
    out.push_back(j.get<double>());
  }
  return out;
}

inline std::vector<ScenarioSpec> expand_scenarios(const nlohmann::json& j) {
  ScenarioSpec base;
  if (j.contains("study")) {
    const std::string s = j.at("study");
    if (s == "S1" || s == "s1") {
      base.study = Study::s1;
    } else if (s == "S2" || s == "s2") {
      base.study = Study::s2;
    } else {
      throw ParseError("scenario study must be S1 or S2");
    }
  }
  if (j.contains("n")) base.n = j.at("n").get<int>();
  if (j.contains("N")) base.N = j.at("N").get<int>();
  if (j.contains("B")) base.B = j.at("B").get<int>();
  if (j.contains("alpha")) base.alpha = j.at("alpha").get<double>();
  if (j.contains("accrual_span")) {
    base.accrual_span = j.at("accrual_span").get<double>();
  }

  const auto levels = [&](const char* key,
                          double fallback) -> std::vector<double> {
    if (!j.contains(key)) return {fallback};
    return number_list(j.at(key));
  };
  const auto t_cs = levels("t_c", base.t_c);
  const auto dts = levels("dt", base.dt);
  const auto hrs = levels("hr", base.hr);
  const auto ps = levels("p_censor", base.p_censor_target);
  const auto rhos = levels("rho", base.rho);
  const auto ks = levels("k", base.k);

  std::vector<ScenarioSpec> out;
  for (double tc : t_cs) {
    for (double dt : dts) {
      for (double hr : hrs) {
        for (double p : ps) {
          for (double rho : rhos) {
            for (double k : ks) {
              ScenarioSpec sc = base;
              sc.t_c = tc;
              sc.dt = dt;
              sc.hr = hr;
              sc.p_censor_target = p;
              sc.rho = rho;
              sc.k = k;
              out.push_back(sc);
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  if (!j.contains("schema_version")) {
    throw ParseError("config missing schema_version");
  }
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != 1) {
    throw ParseError("unsupported config schema_version " +
                     std::to_string(cfg.schema_version));
  }
  if (j.contains("time_unit")) cfg.time_unit = j.at("time_unit");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ParseError("alpha must lie in (0,1)");
  }
  if (j.contains("covariates")) {
    for (const auto& c : j.at("covariates")) {
      cfg.covariates.push_back(c.get<std::string>());
    }
  }
  if (j.contains("t_c")) cfg.t_c = j.at("t_c").get<double>();
  if (j.contains("model")) {
    cfg.model = detail::model_choice_from_json(j.at("model"));
  }
  if (j.contains("dropout_family")) {
    cfg.dropout_family = family_from_string(j.at("dropout_family"));
  }
  if (j.contains("horizons")) {
    cfg.horizons = detail::number_list(j.at("horizons"));
    for (std::size_t i = 0; i < cfg.horizons.size(); ++i) {
      if (!(cfg.horizons[i] > 0.0) ||
          (i > 0 && !(cfg.horizons[i] > cfg.horizons[i - 1]))) {
        throw ParseError("horizons must be positive and strictly increasing");
      }
    }
  }
  if (j.contains("B")) cfg.B = j.at("B").get<int>();
  if (cfg.B < 1) throw ParseError("B must be >= 1");
  if (j.contains("poibin_method")) {
    cfg.poibin_method = poibin_from_string(j.at("poibin_method"));
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir");
  if (j.contains("fit_models")) {
    for (const auto& m : j.at("fit_models")) {
      cfg.fit_models.push_back(detail::model_choice_from_json(m));
    }
  }
  if (j.contains("scenarios")) {
    cfg.scenarios = detail::expand_scenarios(j.at("scenarios"));
    if (j.at("scenarios").contains("oracle")) {
      cfg.scenario_oracle = j.at("scenarios").at("oracle").get<bool>();
    }
  }
  if (j.contains("calibrate")) {
    const auto cells = detail::expand_scenarios(j.at("calibrate"));
    if (cells.size() != 1) {
      throw ParseError("calibrate must describe a single scenario cell");
    }
    cfg.calibrate_cell = cells.front();
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
}

}  // namespace eventpi
