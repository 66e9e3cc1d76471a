#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/risk_table.hpp"
#include "survcomp/wlrt/logrank.hpp"
#include "survcomp/wlrt/weights.hpp"

using namespace survcomp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Case {
  WeightFunction weight;
  oracle::WeightRule rule;
};

std::vector<Case> cases() {
  return {
      {Constant{}, [](std::size_t, double, double) { return 1.0; }},
      {PetoPeto{}, [](std::size_t, double, double at) { return at; }},
      {FlemingHarrington{0, 1}, [](std::size_t, double b, double) { return 1 - b; }},
      {FlemingHarrington{1, 1}, [](std::size_t, double b, double) { return b * (1 - b); }},
      {FlemingHarrington{2, 0.5}, [](std::size_t, double b, double) { return b * b * std::sqrt(1 - b); }},
      {Crossing{}, [](std::size_t, double b, double) { return 1 - 2 * b; }},
      {SignSwitch{2, 0.7}, [](std::size_t i, double, double) { return i < 2 ? -1.0 : 0.7; }},
  };
}

}  // namespace

TEST_CASE("weighted log-rank Z agrees with the brute-force definition") {
  Rng rng(2024);
  std::size_t compared = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const SurvivalDataset d = oracle::random_small(rng, 12, rep % 3 == 0);
    const RiskTable table = build_risk_table(d);
    for (const auto& c : cases()) {
      const double ref = oracle::logrank_z(d.records(), c.rule);
      if (!std::isfinite(ref)) {
        CHECK_THROWS_AS(weighted_logrank_z(table, c.weight), degenerate_variance_error);
        continue;
      }
      CHECK_THAT(weighted_logrank_z(table, c.weight), WithinAbs(ref, 1e-10));
      ++compared;
    }
  }
  CHECK(compared > 1500);
}

TEST_CASE("log-rank on a hand-worked example") {
  // Times 1..4 with one event each, alternating groups and no censoring:
  // O1 - E1 = (1 - 1/2) + (0 - 1/3) + (1 - 1/2) + 0 = 2/3
  // V = 1/4 + 2/9 + 1/4 + 0 = 13/18
  const SurvivalDataset d({{1, true, 1}, {2, true, 2}, {3, true, 1}, {4, true, 2}});
  const auto r = weighted_logrank(build_risk_table(d), std::vector<double>(4, 1.0));
  CHECK_THAT(r.score, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(r.variance, WithinAbs(13.0 / 18.0, 1e-15));
  const TestOutcome t = logrank_test(d);
  CHECK(t.method == "LR");
  CHECK_THAT(t.statistic, WithinRel((2.0 / 3.0) / std::sqrt(13.0 / 18.0), 1e-14));
  CHECK_THAT(t.p_value, WithinAbs(std::erfc(std::abs(t.statistic) / std::sqrt(2.0)), 1e-15));
}

TEST_CASE("weight conventions: PP at the point, FH and crossing at the left limit") {
  const SurvivalDataset d({{1, true, 1}, {2, true, 2}, {3, false, 1}, {4, true, 2}});
  const RiskTable t = build_risk_table(d);
  const auto pp = evaluate_weights(PetoPeto{}, t);
  const auto fh = evaluate_weights(FlemingHarrington{1, 0}, t);
  const auto cr = evaluate_weights(Crossing{}, t);
  // pooled KM: S(1) = 3/4, S(2) = 3/4 * 2/3 = 1/2, S(4) = 0
  CHECK_THAT(pp[0], WithinAbs(0.75, 1e-15));
  CHECK_THAT(pp[1], WithinAbs(0.5, 1e-15));
  CHECK_THAT(pp[2], WithinAbs(0.0, 1e-15));
  CHECK(fh[0] == 1.0);
  CHECK_THAT(fh[1], WithinAbs(0.75, 1e-15));
  CHECK_THAT(fh[2], WithinAbs(0.5, 1e-15));
  CHECK(cr[0] == -1.0);
  CHECK_THAT(cr[2], WithinAbs(0.0, 1e-15));
  // FH(0, gamma) at S(t-) = 1 gives 0^gamma; 0^0 is taken as 1.
  CHECK(evaluate_weights(FlemingHarrington{0, 0}, t)[0] == 1.0);
  CHECK(evaluate_weights(FlemingHarrington{0, 1}, t)[0] == 0.0);
}

TEST_CASE("properties of weighted log-rank statistics") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const SurvivalDataset d = oracle::random_small(rng, 30, rep % 2 == 0);
    const RiskTable t = build_risk_table(d);
    const RiskTable s = build_risk_table(d.with_swapped_groups());
    for (const auto& c : cases()) {
      double z = 0;
      try {
        z = weighted_logrank_z(t, c.weight);
      } catch (const degenerate_variance_error&) {
        continue;
      }
      // Label swap flips the sign.
      CHECK_THAT(weighted_logrank_z(s, c.weight), WithinAbs(-z, 1e-10));
      // Positive rescaling of the weights leaves Z unchanged.
      auto w = evaluate_weights(c.weight, t);
      for (double& x : w) x *= 3.5;
      CHECK_THAT(weighted_logrank(t, w).z, WithinAbs(z, 1e-10));
      // Variance terms are non-negative.
      for (double v : logrank_terms(t).variance) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("identical groups give Z = 0 and p = 1") {
  const SurvivalDataset d({{1, true, 1}, {1, true, 2}, {2, false, 1}, {2, false, 2}, {3, true, 1}, {3, true, 2}});
  const TestOutcome lr = logrank_test(d);
  CHECK_THAT(lr.statistic, WithinAbs(0.0, 1e-15));
  CHECK_THAT(lr.p_value, WithinAbs(1.0, 1e-15));
  const TestOutcome pp = peto_peto_test(d);
  CHECK(pp.method == "PP");
  CHECK_THAT(pp.p_value, WithinAbs(1.0, 1e-15));
}

TEST_CASE("degenerate inputs raise typed errors") {
  // Single event with one subject at risk: variance zero.
  const SurvivalDataset d({{1, false, 1}, {2, true, 2}});
  CHECK_THROWS_AS(logrank_test(d), degenerate_variance_error);
  CHECK_THROWS_AS(logrank_test(SurvivalDataset({{1, false, 1}, {2, false, 2}})), no_events_error);
  CHECK_THROWS_AS(logrank_test(SurvivalDataset({{1, true, 1}, {2, true, 1}})), invalid_input_error);
}
