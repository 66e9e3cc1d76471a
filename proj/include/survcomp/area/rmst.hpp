#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/estimators.hpp"
#include "survcomp/core/tails.hpp"
#include "survcomp/core/test_outcome.hpp"

namespace survcomp {

struct RmstEstimate {
  double value = 0.0;
  double variance = 0.0;
  double tau = 0.0;
};

inline void check_tau(std::span<const Record> records, double tau) {
  if (records.empty()) throw invalid_input_error("rmst: empty group");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw invalid_input_error("rmst: tau must be positive and finite");
  double last = 0.0;
  for (const Record& r : records) last = std::max(last, r.time);
  if (tau > last) {
    throw invalid_input_error("rmst: tau = " + std::to_string(tau) + " exceeds the follow-up of the group (" +
                              std::to_string(last) + ")");
  }
}

/// Restricted mean survival time: the exact integral of the Kaplan-Meier
/// step function over [0, tau], with the Greenwood-type variance
///   sum_{t_i <= tau} (int_{t_i}^tau S)^2 d_i / (y_i (y_i - d_i)).
inline RmstEstimate rmst(std::span<const Record> records, double tau) {
  check_tau(records, tau);
  const auto counts = detail::event_counts(records, [](const Record& r) { return r.event; });
  const StepFunction km = detail::product_limit(counts);
  RmstEstimate out;
  out.tau = tau;
  out.value = km.integral(0.0, tau);
  for (const auto& c : counts) {
    if (c.time > tau) break;
    if (c.at_risk == c.events) continue;  // KM is zero afterwards, so the tail area is zero too
    const double tail = km.integral(c.time, tau);
    const double y = static_cast<double>(c.at_risk);
    const double d = static_cast<double>(c.events);
    out.variance += tail * tail * d / (y * (y - d));
  }
  return out;
}

/// Two-sided test of equal RMST: (RMST_1 - RMST_2) / sqrt(var_1 + var_2)
/// against the standard normal. tau defaults to default_tau(data).
inline TestOutcome rmst_diff_test(const SurvivalDataset& data, std::optional<double> tau = std::nullopt) {
  data.require_two_groups();
  const double t = tau.value_or(default_tau(data));
  const auto g1 = data.group_records(1);
  const auto g2 = data.group_records(2);
  const RmstEstimate r1 = rmst(g1, t);
  const RmstEstimate r2 = rmst(g2, t);
  const double diff = r1.value - r2.value;
  const double se = std::sqrt(r1.variance + r2.variance);
  TestOutcome out;
  out.method = "RMST";
  out.detail["tau"] = t;
  out.detail["rmst1"] = r1.value;
  out.detail["rmst2"] = r2.value;
  out.detail["difference"] = diff;
  if (!(se > 0.0)) {
    if (diff != 0.0) throw degenerate_variance_error("rmst: zero variance with a non-zero difference");
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  out.statistic = diff / se;
  out.p_value = normal_two_sided_p(out.statistic);
  return out;
}

}  // namespace survcomp
