#pragma once

// Sample-space partition test for two right-censored samples (chi-squared
// summary).
//
// For every ordered pair (i, j) of distinct observed events with
// T_i + |T_i - T_j| <= tau_max, let r = |T_i - T_j| and I = [T_i - r, T_i + r].
// The 2x2 table has, for each group k,
//   inside_k  = n_k * (S_k(T_i - r -) - S_k(T_i + r))
//   outside_k = n_k - inside_k
// where S_k is the group's Kaplan-Meier estimate. Without censoring inside_k
// is the number of group-k observations within distance r of T_i. Q is the
// average Pearson chi-squared statistic over all such tables; tables with a
// zero margin contribute 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/estimators.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/step_function.hpp"
#include "survcomp/core/test_outcome.hpp"

namespace survcomp {

struct KonpStatistic {
  double value = 0.0;
  std::size_t tables = 0;
};

/// Pearson chi-squared statistic of [[in1, in2], [out1, out2]] with column
/// totals n1, n2. Zero margins give 0.
inline double partition_chi_squared(double in1, double in2, double n1, double n2) {
  const double n = n1 + n2;
  const double row_in = in1 + in2;
  const double row_out = n - row_in;
  const double eps = 1e-12 * n;
  if (row_in <= eps || row_out <= eps || n1 <= 0.0 || n2 <= 0.0) return 0.0;
  const double out1 = n1 - in1;
  const double out2 = n2 - in2;
  const double cross = in1 * out2 - in2 * out1;
  return n * cross * cross / (row_in * row_out * n1 * n2);
}

/// KONP statistic. tau_max defaults to the smaller of the two group maxima.
inline KonpStatistic konp_statistic(const SurvivalDataset& data, std::optional<double> tau_max = std::nullopt) {
  data.require_two_groups();
  const double tmax = tau_max.value_or(std::min(data.max_time(1), data.max_time(2)));
  const std::array<StepFunction, 2> km{kaplan_meier(data, 1), kaplan_meier(data, 2)};
  const std::array<double, 2> sizes{static_cast<double>(data.n1()), static_cast<double>(data.n2())};

  std::vector<double> events;
  for (const Record& r : data.records()) {
    if (r.event && r.time <= tmax) events.push_back(r.time);
  }
  std::sort(events.begin(), events.end());
  const std::size_t m = events.size();

  // Survival of each group at and just before every event time.
  std::array<std::vector<double>, 2> at, before;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto knots = km[k].knots();
    const auto values = km[k].values();
    at[k].resize(m);
    before[k].resize(m);
    std::size_t lo = 0, hi = 0;
    for (std::size_t q = 0; q < m; ++q) {
      while (lo < knots.size() && knots[lo] < events[q]) ++lo;
      while (hi < knots.size() && knots[hi] <= events[q]) ++hi;
      before[k][q] = lo == 0 ? 1.0 : values[lo - 1];
      at[k][q] = hi == 0 ? 1.0 : values[hi - 1];
    }
  }

  double total = 0.0;
  std::size_t tables = 0;
  for (std::size_t p = 0; p < m; ++p) {
    const double anchor = events[p];
    // Partners later in time: upper end is the partner, lower end reflected.
    {
      std::array<std::size_t, 2> cursor{};
      for (std::size_t k = 0; k < 2; ++k) {
        const auto knots = km[k].knots();
        cursor[k] = static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), anchor) - knots.begin());
      }
      for (std::size_t q = p + 1; q < m; ++q) {
        const double lower = 2.0 * anchor - events[q];
        std::array<double, 2> inside{};
        for (std::size_t k = 0; k < 2; ++k) {
          const auto knots = km[k].knots();
          while (cursor[k] > 0 && knots[cursor[k] - 1] >= lower) --cursor[k];
          const double s_lower = cursor[k] == 0 ? 1.0 : km[k].values()[cursor[k] - 1];
          inside[k] = sizes[k] * (s_lower - at[k][q]);
        }
        total += partition_chi_squared(inside[0], inside[1], sizes[0], sizes[1]);
        ++tables;
      }
    }
    // Partners earlier in time: lower end is the partner, upper end reflected.
    {
      std::array<std::size_t, 2> cursor{};
      for (std::size_t k = 0; k < 2; ++k) {
        const auto knots = km[k].knots();
        cursor[k] = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), anchor) - knots.begin());
      }
      for (std::size_t q = p; q-- > 0;) {
        const double upper = 2.0 * anchor - events[q];
        if (upper > tmax) break;
        std::array<double, 2> inside{};
        for (std::size_t k = 0; k < 2; ++k) {
          const auto knots = km[k].knots();
          while (cursor[k] < knots.size() && knots[cursor[k]] <= upper) ++cursor[k];
          const double s_upper = cursor[k] == 0 ? 1.0 : km[k].values()[cursor[k] - 1];
          inside[k] = sizes[k] * (before[k][q] - s_upper);
        }
        total += partition_chi_squared(inside[0], inside[1], sizes[0], sizes[1]);
        ++tables;
      }
    }
  }
  if (tables == 0) throw undefined_statistic_error("konp: no admissible pair of observed events");
  return {total / static_cast<double>(tables), tables};
}

struct KonpOptions {
  std::size_t n_perm = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<double> tau_max;
};

namespace detail {

/// Pieces needed to re-draw a subject's observation under the null.
struct ImputationModel {
  StepFunction pooled_failure;                  // KM of all subjects
  std::array<StepFunction, 2> censoring;       // per-group censoring KM
  std::array<double, 2> max_time{};
};

// Observation of subject `r` after moving to group `group`. Failure times
// are exchangeable under the null, so the subject keeps its event time,
// or, if censored at c, gets one drawn from the pooled KM given T > c. The
// censoring time is drawn afresh from the new group's censoring KM. Mass
// beyond the last knot is at +inf; if both times are infinite the subject
// is censored at the new group's largest time.
inline Record impute(const ImputationModel& m, const Record& r, int group, Rng& rng) {
  const double inf = std::numeric_limits<double>::infinity();
  double t = r.time;
  if (!r.event) {
    const double s = m.pooled_failure(r.time);
    t = s > 0.0 ? m.pooled_failure.first_crossing_below(rng.uniform() * s) : inf;
  }
  const double c = m.censoring[group - 1].first_crossing_below(rng.uniform());
  if (std::isfinite(t) && t <= c) return {t, true, group};
  if (std::isfinite(c)) return {c, false, group};
  return {m.max_time[group - 1], false, group};
}

}  // namespace detail

/// Permutation p-value with imputation: labels are permuted, and every
/// subject moved to the other group gets a new observation (see
/// detail::impute). Permutations whose statistic is undefined are dropped.
inline TestOutcome konp_test(const SurvivalDataset& data, const KonpOptions& options = {}) {
  if (options.n_perm < 1) throw invalid_input_error("konp: n_perm must be at least 1");
  const KonpStatistic observed = konp_statistic(data, options.tau_max);
  const auto& records = data.records();
  detail::ImputationModel model{kaplan_meier(records), {}, {}};
  for (int g = 1; g <= 2; ++g) {
    const auto recs = data.group_records(g);
    model.censoring[g - 1] = censoring_kaplan_meier(recs);
    model.max_time[g - 1] = data.max_time(g);
  }
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const Record& r : records) labels.push_back(r.group);

  // 1 = Q* >= Q, 0 = below, 2 = undefined.
  std::vector<unsigned char> outcome(options.n_perm, 2);
  std::vector<std::size_t> imputed(options.n_perm, 0);
  const double threshold = observed.value - 1e-12 * observed.value;
  parallel_for(options.n_perm, options.threads, [&](std::size_t b) {
    Rng rng(mix_seed(options.seed, b));
    std::vector<int> permuted = labels;
    rng.shuffle(std::span<int>(permuted));
    std::vector<Record> next(records.size());
    for (std::size_t s = 0; s < records.size(); ++s) {
      if (permuted[s] == records[s].group) {
        next[s] = records[s];
      } else {
        next[s] = detail::impute(model, records[s], permuted[s], rng);
        ++imputed[b];
      }
    }
    try {
      const KonpStatistic q = konp_statistic(SurvivalDataset(std::move(next)), options.tau_max);
      outcome[b] = q.value >= threshold ? 1 : 0;
    } catch (const computation_error&) {
      outcome[b] = 2;
    }
  });
  std::size_t valid = 0, exceed = 0, total_imputed = 0;
  for (std::size_t b = 0; b < options.n_perm; ++b) {
    if (outcome[b] != 2) ++valid;
    if (outcome[b] == 1) ++exceed;
    total_imputed += imputed[b];
  }
  TestOutcome out;
  out.method = "KONP";
  out.statistic = observed.value;
  out.p_value = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(valid) + 1.0);
  out.detail["tables"] = static_cast<double>(observed.tables);
  out.detail["resamples"] = static_cast<double>(options.n_perm);
  out.detail["invalid_resamples"] = static_cast<double>(options.n_perm - valid);
  out.detail["mean_imputations"] = static_cast<double>(total_imputed) / static_cast<double>(options.n_perm);
  return out;
}

}  // namespace survcomp
