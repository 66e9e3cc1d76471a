#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/estimators.hpp"
#include "survcomp/konp/konp.hpp"

using namespace survcomp;
using Catch::Matchers::WithinAbs;

namespace {

void compare_with_enumeration(const std::vector<Record>& recs, std::size_t& compared, std::size_t& undefined) {
  const SurvivalDataset d(recs);
  const double ref = oracle::konp_uncensored(recs);
  if (std::isnan(ref)) {
    CHECK_THROWS_AS(konp_statistic(d), undefined_statistic_error);
    ++undefined;
    return;
  }
  CHECK_THAT(konp_statistic(d).value, WithinAbs(ref, 1e-10 * std::max(1.0, ref)));
  ++compared;
}

}  // namespace

TEST_CASE("KONP statistic matches exhaustive enumeration on uncensored data") {
  Rng rng(77);
  std::size_t compared = 0, undefined = 0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      // Continuous times, integer times with ties, and a fixed grid.
      for (int variant = 0; variant < 3; ++variant) {
        std::vector<Record> recs;
        for (std::size_t i = 0; i < n; ++i) {
          double t = 0;
          if (variant == 0) t = 10.0 * rng.uniform();
          if (variant == 1) t = static_cast<double>(1 + rng.below(4));
          if (variant == 2) t = static_cast<double>(i + 1);
          recs.push_back({t, true, (mask >> i) & 1u ? 1 : 2});
        }
        compare_with_enumeration(recs, compared, undefined);
      }
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("KONP is zero on mirrored groups and non-negative") {
  const std::vector<double> times{0.5, 1.2, 2.0, 2.0, 3.3, 4.1};
  std::vector<Record> recs;
  for (double t : times) {
    recs.push_back({t, t != 2.0, 1});
    recs.push_back({t, t != 2.0, 2});
  }
  CHECK_THAT(konp_statistic(SurvivalDataset(recs)).value, WithinAbs(0.0, 1e-12));

  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const SurvivalDataset d = oracle::random_small(rng, 30, rep % 2 == 0);
    try {
      const double q = konp_statistic(d).value;
      CHECK(q >= 0.0);
      CHECK_THAT(konp_statistic(d.with_swapped_groups()).value, WithinAbs(q, 1e-10 * std::max(1.0, q)));
    } catch (const undefined_statistic_error&) {
    }
  }
}

TEST_CASE("partition chi-squared: hand values and zero margins") {
  // [[3, 1], [2, 4]]: chi^2 = 10 (12 - 2)^2 / (4 * 6 * 5 * 5) = 1.6667
  CHECK_THAT(partition_chi_squared(3, 1, 5, 5), WithinAbs(10.0 * 100.0 / 600.0, 1e-14));
  CHECK_THAT(partition_chi_squared(3, 1, 5, 5), WithinAbs(oracle::pearson_2x2(3, 1, 2, 4), 1e-14));
  CHECK(partition_chi_squared(0, 0, 5, 5) == 0.0);
  CHECK(partition_chi_squared(5, 5, 5, 5) == 0.0);
}

TEST_CASE("KONP with censoring uses KM-weighted cells") {
  // Group 1: 1, 2+, 3; group 2: 1.5, 2.5, 3.5+. tau_max = 3.
  // KM1: 2/3 at 1, 0 at 3. KM2: 2/3 at 1.5, 1/3 at 2.5.
  const SurvivalDataset d({{1, true, 1}, {2, false, 1}, {3, true, 1}, {1.5, true, 2}, {2.5, true, 2}, {3.5, false, 2}});
  // Admissible (anchor, partner) pairs need anchor + |anchor - partner| <= 3:
  // anchor 1 with 1.5, 2.5, 3; anchor 1.5 with 1, 2.5, 3; anchor 2.5 with 3.
  auto inside = [](double s_lo, double s_hi, double n) { return n * (s_lo - s_hi); };
  auto s1 = [](double t, bool left) {
    if (left ? t <= 1 : t < 1) return 1.0;
    if (left ? t <= 3 : t < 3) return 2.0 / 3.0;
    return 0.0;
  };
  auto s2 = [](double t, bool left) {
    if (left ? t <= 1.5 : t < 1.5) return 1.0;
    if (left ? t <= 2.5 : t < 2.5) return 2.0 / 3.0;
    return 1.0 / 3.0;
  };
  const std::vector<std::pair<double, double>> intervals{{0.5, 1.5}, {-0.5, 2.5}, {-1, 3}, {1, 2}, {0.5, 2.5}, {0, 3}, {2, 3}};
  double total = 0;
  for (auto [a, b] : intervals) {
    total += partition_chi_squared(inside(s1(a, true), s1(b, false), 3), inside(s2(a, true), s2(b, false), 3), 3, 3);
  }
  const KonpStatistic q = konp_statistic(d);
  CHECK(q.tables == intervals.size());
  CHECK_THAT(q.value, WithinAbs(total / static_cast<double>(intervals.size()), 1e-12));
}

TEST_CASE("imputation keeps observed event times and redraws censoring") {
  const std::vector<Record> recs{{1, true, 1}, {2, false, 1}, {3, true, 1}, {1.5, true, 2}, {4, false, 2}, {5, true, 2}};
  const std::vector<Record> g1(recs.begin(), recs.begin() + 3), g2(recs.begin() + 3, recs.end());
  detail::ImputationModel m{kaplan_meier(recs), {censoring_kaplan_meier(g1), censoring_kaplan_meier(g2)}, {3, 5}};
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const Record e = detail::impute(m, recs[0], 2, rng);
    CHECK(e.group == 2);
    if (e.event) CHECK(e.time == 1.0);
    if (!e.event) CHECK(e.time < 1.0);
    const Record c = detail::impute(m, recs[1], 2, rng);
    // The completed failure time exceeds the original censoring time 2.
    if (c.event) CHECK(c.time > 2.0);
  }
}

TEST_CASE("KONP permutation p-value is seeded and thread independent") {
  Rng rng(5);
  std::vector<Record> recs;
  for (int i = 0; i < 50; ++i) {
    const double t = -std::log(rng.uniform()) / (i < 25 ? 0.3 : 0.6);
    const double c = 6 * rng.uniform();
    recs.push_back({std::min(t, c), t <= c, i < 25 ? 1 : 2});
  }
  const SurvivalDataset d(recs);
  const TestOutcome a = konp_test(d, {200, 9, 1, std::nullopt});
  const TestOutcome b = konp_test(d, {200, 9, 3, std::nullopt});
  CHECK(a.p_value == b.p_value);
  CHECK(a.p_value > 0.0);
  CHECK(a.p_value <= 1.0);
  CHECK(konp_test(d, {100, 9, 1, std::nullopt}).p_value == konp_test(d, {100, 9, 2, std::nullopt}).p_value);
  CHECK(a.detail.at("mean_imputations") > 0.0);
  CHECK_THROWS_AS(konp_test(d, {0, 9, 1, std::nullopt}), invalid_input_error);
}
