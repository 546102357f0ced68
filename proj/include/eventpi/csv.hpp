#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eventpi/data.hpp"
#include "eventpi/errors.hpp"

namespace eventpi {

// Doubles are serialized with 17 significant digits so a write/read
// round-trip reproduces them exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no,
                           const std::string& col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                     "' is not a number: '" + s + "'");
  }
}

inline int parse_indicator(const std::string& s, std::size_t line_no,
                           const std::string& col) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError("line " + std::to_string(line_no) + ": column '" + col +
                   "' must be 0 or 1, got '" + s + "'");
}

}  // namespace detail

// Trial CSV schema: id, entry_time, time_obs, event, dropout plus the
// covariate columns named in the configuration. The administrative-censoring
// flag is derived as 1 - event - dropout and must come out 0/1. If t_c is not
// supplied it is inferred as the latest entry + follow-up in the file.
inline InterimDataset read_trial_csv(const std::string& path,
                                     const std::vector<std::string>& covariates,
                                     std::optional<double> t_c = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw ParseError("'" + path + "': empty file");
  }
  const auto header = detail::split_csv_line(line);
  const auto col_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ParseError("'" + path + "': missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t c_id = col_of("id");
  const std::size_t c_entry = col_of("entry_time");
  const std::size_t c_tobs = col_of("time_obs");
  const std::size_t c_event = col_of("event");
  const std::size_t c_drop = col_of("dropout");
  std::vector<std::size_t> c_cov;
  for (const auto& name : covariates) c_cov.push_back(col_of(name));

  InterimDataset data;
  data.covariate_names = covariates;

  std::size_t line_no = 1;
  double max_follow = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(f.size()));
    }
    SubjectRecord s;
    s.id = f[c_id];
    s.entry_time = detail::parse_double(f[c_entry], line_no, "entry_time");
    s.t_obs = detail::parse_double(f[c_tobs], line_no, "time_obs");
    s.delta = detail::parse_indicator(f[c_event], line_no, "event");
    s.epsilon = detail::parse_indicator(f[c_drop], line_no, "dropout");
    const int gamma = 1 - s.delta - s.epsilon;
    if (gamma < 0 || gamma > 1) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": event and dropout flags are inconsistent");
    }
    s.gamma = gamma;
    for (std::size_t k = 0; k < c_cov.size(); ++k) {
      s.z.push_back(detail::parse_double(f[c_cov[k]], line_no, covariates[k]));
    }
    max_follow = std::max(max_follow, s.entry_time + s.t_obs);
    data.subjects.push_back(std::move(s));
  }

  data.t_c = t_c.value_or(max_follow);
  validate(data);
  return data;
}

inline void write_trial_csv(const InterimDataset& data,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "id,entry_time,time_obs,event,dropout";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << '\n';
  for (const auto& s : data.subjects) {
    out << s.id << ',' << format_double(s.entry_time) << ','
        << format_double(s.t_obs) << ',' << s.delta << ',' << s.epsilon;
    for (double z : s.z) out << ',' << format_double(z);
    out << '\n';
  }
}

}  // namespace eventpi
