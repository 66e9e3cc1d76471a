#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/risk_table.hpp"
#include "survcomp/core/tails.hpp"
#include "survcomp/core/test_outcome.hpp"
#include "survcomp/wlrt/logrank.hpp"
#include "survcomp/wlrt/weights.hpp"

namespace survcomp {

struct TwoStageConfig {
  double alpha = 0.05;
  double epsilon = 0.1;
  std::size_t n_boot = 500;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  /// Per-stage level 1 - sqrt(1 - alpha); both stages use the same value.
  double stage_alpha() const { return 1.0 - std::sqrt(1.0 - alpha); }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input_error("two-stage: alpha must lie in (0, 1)");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw invalid_input_error("two-stage: epsilon must lie in (0, 0.5)");
    if (n_boot < 1) throw invalid_input_error("two-stage: n_boot must be at least 1");
  }
};

/// Sign-switching weight for a candidate crossing after event time m
/// (1-based): -1 up to m, c_m afterwards. c_m = A_m / B_m, where A_m and
/// B_m are the log-rank variance mass on rows <= m and > m, makes the
/// estimated covariance with the unweighted log-rank score
///   -A_m + c_m B_m
/// vanish. Returns nullopt when either side carries no variance.
inline std::optional<SignSwitch> stage2_weights(const LogrankTerms& terms, std::size_t m) {
  double early = 0.0;
  double late = 0.0;
  for (std::size_t i = 0; i < terms.variance.size(); ++i) (i < m ? early : late) += terms.variance[i];
  if (!(early > 0.0) || !(late > 0.0)) return std::nullopt;
  return SignSwitch{m, early / late};
}

inline std::optional<SignSwitch> stage2_weights(const RiskTable& table, std::size_t m) {
  return stage2_weights(logrank_terms(table), m);
}

/// Admissible crossing indices {max(1, D_eps), ..., min(D - 1, D - D_eps)}
/// with D_eps = floor(D * eps).
struct CrossingRange {
  std::size_t first = 1;
  std::size_t last = 0;
  bool empty() const noexcept { return last < first; }
};

inline CrossingRange crossing_range(std::size_t event_times, double epsilon) {
  const auto trim = static_cast<std::size_t>(std::floor(static_cast<double>(event_times) * epsilon));
  CrossingRange r;
  r.first = std::max<std::size_t>(1, trim);
  r.last = event_times > trim ? std::min(event_times - 1, event_times - trim) : 0;
  if (event_times == 0) r.last = 0;
  return r;
}

struct Stage2Statistic {
  double value = 0.0;
  std::size_t m = 0;
  double c = 0.0;
};

/// V = sup over admissible m of |Z_n(w^(m))|. The absolute value makes the
/// second stage sensitive to crossings in either direction.
inline Stage2Statistic stage2_statistic(const LogrankTerms& terms, double epsilon) {
  const std::size_t d = terms.score.size();
  const CrossingRange range = crossing_range(d, epsilon);
  if (range.empty()) throw undefined_statistic_error("stage-2 undefined: too few event times");
  std::vector<double> cum_score(d + 1, 0.0), cum_var(d + 1, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    cum_score[i + 1] = cum_score[i] + terms.score[i];
    cum_var[i + 1] = cum_var[i] + terms.variance[i];
  }
  Stage2Statistic best;
  bool any = false;
  for (std::size_t m = range.first; m <= range.last; ++m) {
    const double early = cum_var[m];
    const double late = cum_var[d] - cum_var[m];
    if (!(early > 0.0) || !(late > 0.0)) continue;
    const double c = early / late;
    const double score = -cum_score[m] + c * (cum_score[d] - cum_score[m]);
    const double variance = early + c * c * late;
    const double z = std::abs(score) / std::sqrt(variance);
    if (!any || z > best.value) best = {z, m, c};
    any = true;
  }
  if (!any) throw undefined_statistic_error("stage-2 undefined: no admissible crossing index");
  return best;
}

inline Stage2Statistic stage2_statistic(const SurvivalDataset& data, const TwoStageConfig& cfg) {
  data.require_two_groups();
  return stage2_statistic(logrank_terms(build_risk_table(data)), cfg.epsilon);
}

/// Overall p-value: p1 when p1 <= alpha1, otherwise alpha1 + p2 (1 - alpha1).
inline double combine_stage_p_values(double p1, double p2, double alpha1) {
  return p1 <= alpha1 ? p1 : alpha1 + p2 * (1.0 - alpha1);
}

/// Two-stage test: log-rank first; if it does not reject at alpha1 the
/// crossing statistic V is calibrated by bootstrap. Bootstrap samples are
/// drawn with replacement from the pooled data into groups of the original
/// sizes, which realizes the null of equal survival. Replicates on which V
/// is undefined are dropped (reported as `invalid_resamples`).
inline TestOutcome two_stage_test(const SurvivalDataset& data, const TwoStageConfig& cfg = {}) {
  cfg.validate();
  data.require_two_groups();
  const RiskTable table = build_risk_table(data);
  const LogrankTerms terms = logrank_terms(table);
  const std::vector<double> ones(table.size(), 1.0);
  const WeightedLogrank stage1 = weighted_logrank(terms, ones);
  const double p1 = normal_two_sided_p(stage1.z);
  const double alpha1 = cfg.stage_alpha();

  TestOutcome out;
  out.method = "TS";
  out.detail["z_stage1"] = stage1.z;
  out.detail["p_stage1"] = p1;
  out.detail["alpha1"] = alpha1;
  if (p1 <= alpha1) {
    out.statistic = stage1.z;
    out.p_value = p1;
    out.detail["stage"] = 1;
    return out;
  }

  const Stage2Statistic v = stage2_statistic(terms, cfg.epsilon);
  const auto& records = data.records();
  const std::size_t n1 = data.n1();
  const std::size_t n = data.size();
  // 1 = replicate V* >= V, 0 = below, 2 = undefined.
  std::vector<unsigned char> outcome(cfg.n_boot, 2);
  parallel_for(cfg.n_boot, cfg.threads, [&](std::size_t b) {
    Rng rng(mix_seed(cfg.seed, b));
    std::vector<Record> boot(n);
    for (std::size_t k = 0; k < n; ++k) {
      boot[k] = records[rng.below(n)];
      boot[k].group = k < n1 ? 1 : 2;
    }
    try {
      const SurvivalDataset resampled(std::move(boot));
      const Stage2Statistic vb = stage2_statistic(logrank_terms(build_risk_table(resampled)), cfg.epsilon);
      outcome[b] = vb.value >= v.value ? 1 : 0;
    } catch (const computation_error&) {
      outcome[b] = 2;
    }
  });
  std::size_t valid = 0, exceed = 0;
  for (unsigned char o : outcome) {
    if (o != 2) ++valid;
    if (o == 1) ++exceed;
  }
  const double p2 = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(valid) + 1.0);
  out.statistic = v.value;
  out.p_value = combine_stage_p_values(p1, p2, alpha1);
  out.detail["stage"] = 2;
  out.detail["p_stage2"] = p2;
  out.detail["crossing_index"] = static_cast<double>(v.m);
  out.detail["c_m"] = v.c;
  out.detail["resamples"] = static_cast<double>(cfg.n_boot);
  out.detail["invalid_resamples"] = static_cast<double>(cfg.n_boot - valid);
  return out;
}

}  // namespace survcomp
