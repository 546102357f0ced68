#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace eventpi {

// Right-continuous step function given by (time, value) pairs, times ascending.
struct StepCurve {
  std::vector<double> time;
  std::vector<double> value;

  double at(double t, double before_first = 1.0) const {
    if (time.empty() || t < time.front()) return before_first;
    auto it = std::upper_bound(time.begin(), time.end(), t);
    return value[static_cast<std::size_t>(it - time.begin()) - 1];
  }
};

namespace detail {

struct RiskTable {
  std::vector<double> event_times;  // distinct, ascending
  std::vector<int> d;               // events at each time
  std::vector<int> n;               // at-risk just before each time
};

inline RiskTable risk_table(std::span<const double> times,
                            std::span<const int> events) {
  std::vector<std::size_t> idx(times.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  RiskTable tab;
  std::size_t at_risk = times.size();
  std::size_t i = 0;
  while (i < idx.size()) {
    const double t = times[idx[i]];
    int d = 0;
    std::size_t j = i;
    while (j < idx.size() && times[idx[j]] == t) {
      d += events[idx[j]];
      ++j;
    }
    if (d > 0) {
      tab.event_times.push_back(t);
      tab.d.push_back(d);
      tab.n.push_back(static_cast<int>(at_risk));
    }
    at_risk -= (j - i);
    i = j;
  }
  return tab;
}

}  // namespace detail

inline StepCurve kaplan_meier(std::span<const double> times,
                              std::span<const int> events) {
  const auto tab = detail::risk_table(times, events);
  StepCurve km;
  double s = 1.0;
  for (std::size_t i = 0; i < tab.event_times.size(); ++i) {
    s *= 1.0 - static_cast<double>(tab.d[i]) / tab.n[i];
    km.time.push_back(tab.event_times[i]);
    km.value.push_back(s);
  }
  return km;
}

inline StepCurve nelson_aalen(std::span<const double> times,
                              std::span<const int> events) {
  const auto tab = detail::risk_table(times, events);
  StepCurve na;
  double h = 0.0;
  for (std::size_t i = 0; i < tab.event_times.size(); ++i) {
    h += static_cast<double>(tab.d[i]) / tab.n[i];
    na.time.push_back(tab.event_times[i]);
    na.value.push_back(h);
  }
  return na;
}

}  // namespace eventpi
