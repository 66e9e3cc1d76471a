#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/step_function.hpp"

namespace survcomp {

namespace detail {

struct EventCounts {
  double time;
  std::size_t events;
  std::size_t at_risk;
};

// Distinct times carrying at least one "event" (as selected by `is_event`),
// with the number at risk (time >= t) just before each.
template <class IsEvent>
std::vector<EventCounts> event_counts(std::span<const Record> records, IsEvent is_event) {
  std::vector<std::pair<double, bool>> obs;
  obs.reserve(records.size());
  for (const Record& r : records) obs.emplace_back(r.time, is_event(r));
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<EventCounts> out;
  std::size_t i = 0;
  while (i < obs.size()) {
    const double t = obs[i].first;
    const std::size_t at_risk = obs.size() - i;
    std::size_t events = 0;
    for (; i < obs.size() && obs[i].first == t; ++i) events += obs[i].second ? 1 : 0;
    if (events > 0) out.push_back({t, events, at_risk});
  }
  return out;
}

inline StepFunction product_limit(const std::vector<EventCounts>& counts) {
  std::vector<double> knots, values;
  knots.reserve(counts.size());
  values.reserve(counts.size());
  double s = 1.0;
  for (const auto& c : counts) {
    s *= 1.0 - static_cast<double>(c.events) / static_cast<double>(c.at_risk);
    knots.push_back(c.time);
    values.push_back(s);
  }
  return StepFunction(1.0, std::move(knots), std::move(values));
}

}  // namespace detail

/// Product-limit estimate of the survival function of all given records
/// (group labels are ignored; filter first for a one-group view).
inline StepFunction kaplan_meier(std::span<const Record> records) {
  if (records.empty()) throw invalid_input_error("kaplan_meier: empty sample");
  return detail::product_limit(detail::event_counts(records, [](const Record& r) { return r.event; }));
}

inline StepFunction kaplan_meier(const SurvivalDataset& data, int group) {
  const auto records = data.group_records(group);
  return kaplan_meier(records);
}

/// Product-limit estimate of the censoring survival function (censorings
/// play the role of events). At tied times the censored subjects are
/// counted at risk, consistent with events preceding censorings.
inline StepFunction censoring_kaplan_meier(std::span<const Record> records) {
  if (records.empty()) throw invalid_input_error("censoring_kaplan_meier: empty sample");
  return detail::product_limit(detail::event_counts(records, [](const Record& r) { return !r.event; }));
}

/// Cumulative hazard estimate: sum of events / at-risk over event times.
inline StepFunction nelson_aalen(std::span<const Record> records) {
  if (records.empty()) throw invalid_input_error("nelson_aalen: empty sample");
  const auto counts = detail::event_counts(records, [](const Record& r) { return r.event; });
  std::vector<double> knots, values;
  double a = 0.0;
  for (const auto& c : counts) {
    a += static_cast<double>(c.events) / static_cast<double>(c.at_risk);
    knots.push_back(c.time);
    values.push_back(a);
  }
  return StepFunction(0.0, std::move(knots), std::move(values));
}

/// Truncation time: 90% of the smaller of the two per-group maximum
/// observed times (event or censored).
inline double default_tau(const SurvivalDataset& data) {
  data.require_two_groups();
  return 0.9 * std::min(data.max_time(1), data.max_time(2));
}

}  // namespace survcomp
