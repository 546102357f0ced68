#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eventpi/errors.hpp"

namespace eventpi {

// One patient at the interim cut. Exactly one of delta (event), epsilon
// (dropout), gamma (administratively censored at t_c) is 1.
struct SubjectRecord {
  std::string id;
  double entry_time = 0.0;  // calendar study time of entry
  double t_obs = 0.0;       // follow-up time since entry
  int delta = 0;
  int epsilon = 0;
  int gamma = 0;
  std::vector<double> z;
};

struct InterimDataset {
  std::vector<SubjectRecord> subjects;
  double t_c = 0.0;  // interim calendar time; accrual closed
  std::vector<std::string> covariate_names;

  std::size_t n() const { return subjects.size(); }

  int n_events() const {
    int k = 0;
    for (const auto& s : subjects) k += s.delta;
    return k;
  }

  int n_dropouts() const {
    int k = 0;
    for (const auto& s : subjects) k += s.epsilon;
    return k;
  }

  int n_at_risk() const {
    int k = 0;
    for (const auto& s : subjects) k += s.gamma;
    return k;
  }
};

// Elapsed follow-up and covariates of a subject still at risk at t_c.
struct AtRiskProfile {
  double tau = 0.0;  // t_c - entry_time
  std::vector<double> z;
};

inline std::vector<AtRiskProfile> at_risk_profiles(const InterimDataset& data) {
  std::vector<AtRiskProfile> out;
  for (const auto& s : data.subjects) {
    if (s.gamma == 1) out.push_back({data.t_c - s.entry_time, s.z});
  }
  return out;
}

// Structural checks applied at ingestion boundaries (CSV reader, generators).
inline void validate(const InterimDataset& data) {
  const std::size_t d = data.covariate_names.size();
  for (const auto& s : data.subjects) {
    const auto where = [&] { return " (subject '" + s.id + "')"; };
    const int sum = s.delta + s.epsilon + s.gamma;
    if (sum != 1 || s.delta < 0 || s.epsilon < 0 || s.gamma < 0 ||
        s.delta > 1 || s.epsilon > 1 || s.gamma > 1) {
      throw ParseError("exactly one of event/dropout/admin flags must be 1" +
                       where());
    }
    if (!(s.entry_time >= 0.0) || !std::isfinite(s.entry_time)) {
      throw ParseError("entry_time must be finite and >= 0" + where());
    }
    if (!(s.t_obs > 0.0) || !std::isfinite(s.t_obs)) {
      throw ParseError("time_obs must be finite and > 0" + where());
    }
    if (s.entry_time > data.t_c + 1e-9) {
      throw ParseError("entry after the interim time" + where());
    }
    if (s.t_obs > data.t_c - s.entry_time + 1e-9) {
      throw ParseError("follow-up extends past the interim time" + where());
    }
    if (s.gamma == 1 &&
        std::abs(s.t_obs - (data.t_c - s.entry_time)) > 1e-9) {
      throw ParseError(
          "administratively censored subject must have t_obs = t_c - entry" +
          where());
    }
    if (s.z.size() != d) {
      throw ParseError("covariate vector length mismatch" + where());
    }
  }
}

}  // namespace eventpi
