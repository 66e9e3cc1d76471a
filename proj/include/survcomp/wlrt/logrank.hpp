#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/risk_table.hpp"
#include "survcomp/core/tails.hpp"
#include "survcomp/core/test_outcome.hpp"
#include "survcomp/wlrt/weights.hpp"

namespace survcomp {

/// Unweighted per-row pieces of the weighted log-rank statistic:
/// score_i = N_i1 - Y_i1 N_i / Y_i and the hypergeometric variance
/// variance_i = (Y_i1/Y_i)(1 - Y_i1/Y_i) N_i (Y_i - N_i)/(Y_i - 1),
/// with the tie factor taken as 1 when Y_i = 1.
struct LogrankTerms {
  std::vector<double> score;
  std::vector<double> variance;
};

inline LogrankTerms logrank_terms(const RiskTable& table) {
  LogrankTerms t;
  t.score.reserve(table.size());
  t.variance.reserve(table.size());
  for (const RiskRow& row : table.rows()) {
    const double y = static_cast<double>(row.at_risk());
    const double y1 = static_cast<double>(row.at_risk1);
    const double n = static_cast<double>(row.events());
    const double n1 = static_cast<double>(row.events1);
    const double p1 = y1 / y;
    const double ties = row.at_risk() > 1 ? (y - n) / (y - 1.0) : 1.0;
    t.score.push_back(n1 - y1 * n / y);
    t.variance.push_back(p1 * (1.0 - p1) * ties * n);
  }
  return t;
}

struct WeightedLogrank {
  double score = 0.0;
  double variance = 0.0;
  double z = 0.0;
};

inline WeightedLogrank weighted_logrank(const LogrankTerms& terms, std::span<const double> weights) {
  WeightedLogrank out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.score += weights[i] * terms.score[i];
    out.variance += weights[i] * weights[i] * terms.variance[i];
  }
  if (!(out.variance > 0.0)) throw degenerate_variance_error();
  out.z = out.score / std::sqrt(out.variance);
  return out;
}

inline WeightedLogrank weighted_logrank(const RiskTable& table, std::span<const double> weights) {
  return weighted_logrank(logrank_terms(table), weights);
}

/// Standardized weighted log-rank statistic Z_n(w).
inline double weighted_logrank_z(const RiskTable& table, const WeightFunction& w) {
  return weighted_logrank(table, evaluate_weights(w, table)).z;
}

/// Two-sided test from Z^2 against the chi-squared law with one degree of freedom.
inline TestOutcome weighted_logrank_test(const SurvivalDataset& data, const WeightFunction& w, std::string method) {
  data.require_two_groups();
  const RiskTable table = build_risk_table(data);
  const auto result = weighted_logrank(table, evaluate_weights(w, table));
  TestOutcome out;
  out.method = std::move(method);
  out.statistic = result.z;
  out.p_value = chi_squared_sf(result.z * result.z, 1.0);
  out.detail["event_times"] = static_cast<double>(table.size());
  out.detail["variance"] = result.variance;
  return out;
}

inline TestOutcome logrank_test(const SurvivalDataset& data) { return weighted_logrank_test(data, Constant{}, "LR"); }

inline TestOutcome peto_peto_test(const SurvivalDataset& data) {
  return weighted_logrank_test(data, PetoPeto{}, "PP");
}

}  // namespace survcomp
