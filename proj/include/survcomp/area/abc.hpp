#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "survcomp/area/rmst.hpp"
#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/estimators.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/step_function.hpp"
#include "survcomp/core/test_outcome.hpp"

namespace survcomp {

/// T_n = sqrt(n) * integral over [0, tau] of |S_1 - S_2|.
inline double abc_statistic(const SurvivalDataset& data, double tau) {
  data.require_two_groups();
  const auto g1 = data.group_records(1);
  const auto g2 = data.group_records(2);
  check_tau(g1, tau);
  check_tau(g2, tau);
  return std::sqrt(static_cast<double>(data.size())) *
         integrated_abs_difference(kaplan_meier(g1), kaplan_meier(g2), tau);
}

struct AbcOptions {
  std::size_t n_boot = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

namespace detail {

// integral over [0, tau] of |(a1 - b1) - (a2 - b2)|, each term a step function.
inline double centered_abs_area(const StepFunction& a1, const StepFunction& b1, const StepFunction& a2,
                                const StepFunction& b2, double tau) {
  std::vector<double> cuts{0.0};
  for (const StepFunction* f : {&a1, &b1, &a2, &b2}) {
    for (double k : f->knots()) if (k > 0.0 && k < tau) cuts.push_back(k);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(tau);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t = cuts[k];
    total += std::abs((a1(t) - b1(t)) - (a2(t) - b2(t))) * (cuts[k + 1] - t);
  }
  return total;
}

}  // namespace detail

/// Area-between-curves test. Each group is resampled with replacement from
/// its own records, keeping its censoring pattern, and the bootstrap
/// statistic is centered at the observed curves:
///   T* = sqrt(n) * int_0^tau |(S1* - S1) - (S2* - S2)|.
/// p = (1 + #{T* >= T}) / (n_boot + 1).
inline TestOutcome abc_test(const SurvivalDataset& data, std::optional<double> tau = std::nullopt,
                            const AbcOptions& options = {}) {
  if (options.n_boot < 1) throw invalid_input_error("abc: n_boot must be at least 1");
  data.require_two_groups();
  const double t = tau.value_or(default_tau(data));
  const auto g1 = data.group_records(1);
  const auto g2 = data.group_records(2);
  const double observed = abc_statistic(data, t);
  const StepFunction s1 = kaplan_meier(g1);
  const StepFunction s2 = kaplan_meier(g2);
  const double root_n = std::sqrt(static_cast<double>(data.size()));

  std::vector<unsigned char> exceed(options.n_boot, 0);
  const double threshold = observed - 1e-12 * observed;
  parallel_for(options.n_boot, options.threads, [&](std::size_t b) {
    Rng rng(mix_seed(options.seed, b));
    auto resample = [&rng](const std::vector<Record>& group) {
      std::vector<Record> out(group.size());
      for (auto& r : out) r = group[rng.below(group.size())];
      return kaplan_meier(out);
    };
    const StepFunction b1 = resample(g1);
    const StepFunction b2 = resample(g2);
    const double tb = root_n * detail::centered_abs_area(b1, s1, b2, s2, t);
    exceed[b] = tb >= threshold ? 1 : 0;
  });
  std::size_t count = 0;
  for (unsigned char e : exceed) count += e;
  TestOutcome out;
  out.method = "ABC";
  out.statistic = observed;
  out.p_value = (1.0 + static_cast<double>(count)) / (static_cast<double>(options.n_boot) + 1.0);
  out.detail["tau"] = t;
  out.detail["resamples"] = static_cast<double>(options.n_boot);
  return out;
}

}  // namespace survcomp
