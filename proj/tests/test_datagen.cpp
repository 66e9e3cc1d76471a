#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/datagen/censoring.hpp"
#include "survcomp/datagen/distributions.hpp"
#include "survcomp/datagen/scenarios.hpp"

using namespace survcomp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::pair<std::string, EventDistribution>> all_samplers() {
  std::vector<std::pair<std::string, EventDistribution>> out;
  for (const auto* list : {&scenario_catalog(), &scenario_variants()}) {
    for (const auto& s : *list) {
      out.emplace_back(s.id + "/1", s.group1);
      out.emplace_back(s.id + "/2", s.group2);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("scenario catalog lists the twenty study scenarios") {
  std::vector<std::string> ids;
  for (const auto& s : scenario_catalog()) ids.push_back(s.id);
  const std::vector<std::string> expected{"Null1", "Null2", "Null3", "Null4", "PH1", "PH2", "PH3",
                                          "PH4",   "NPH1",  "NPH2",  "NPH3",  "NPH4a", "C1", "C2",
                                          "C3",    "C4",    "C5",    "C6",    "C7",   "C8"};
  CHECK(ids == expected);
  CHECK(find_scenario("NPH4").id == "NPH4a");
  CHECK(find_scenario("NPH4b").id == "NPH4b");
  CHECK(std::get<LogNormal>(find_scenario("NPH4a").group2).sdlog == 1.3);
  CHECK(std::get<LogNormal>(find_scenario("NPH4b").group2).sdlog == 1.6);
  CHECK_THROWS_AS(find_scenario("PH9"), invalid_input_error);
  for (const auto& s : scenario_catalog()) {
    CHECK_NOTHROW(validate(s.group1));
    CHECK_NOTHROW(validate(s.group2));
    if (s.kind == ScenarioKind::null) CHECK(describe(s.group1) == describe(s.group2));
  }
}

TEST_CASE("setting grid has twenty combinations per family") {
  const auto u = study_settings(CensoringFamily::uniform);
  REQUIRE(u.size() == 20);
  std::set<std::string> ids;
  for (const auto& s : study_settings()) ids.insert(s.id());
  CHECK(ids.size() == 40);
  CHECK(u.front().id() == "n100-100_c0-0_uniform");
  CHECK(SettingSpec{30, 70, 0.2, 0.6, CensoringFamily::exponential}.id() == "n30-70_c0.2-0.6_exponential");
}

TEST_CASE("library survival functions match the closed forms") {
  for (const auto& [name, dist] : all_samplers()) {
    for (double t : {0.01, 0.3, 1.0, 2.9, 3.0, 3.1, 10.0, 32.9, 33.0, 33.1, 60.0}) {
      INFO(name << " t=" << t);
      CHECK_THAT(survival(dist, t), WithinAbs(oracle::reference_survival(dist, t), 1e-12));
    }
  }
}

TEST_CASE("quantile inverts survival") {
  for (const auto& [name, dist] : all_samplers()) {
    for (double u : {0.999, 0.9, 0.5, 0.1, 0.01}) {
      INFO(name << " u=" << u);
      CHECK_THAT(survival(dist, survival_quantile(dist, u)), WithinAbs(u, 1e-10));
    }
  }
}

TEST_CASE("every scenario sampler passes Kolmogorov-Smirnov against its CDF") {
  std::uint64_t stream = 0;
  for (const auto& [name, dist] : all_samplers()) {
    Rng rng(mix_seed(2718, ++stream));
    const auto x = sample_event_times(dist, 100000, rng);
    const auto ks = oracle::ks_test(x, [&](double t) { return 1.0 - oracle::reference_survival(dist, t); });
    INFO(name << " D=" << ks.d << " p=" << ks.p);
    CHECK(ks.p > 1e-4);
  }
}

TEST_CASE("composite crossing law is continuous at the splice points") {
  const auto& d = std::get<WeibullUniformWeibull>(find_scenario("C1").group2);
  for (double t : {d.start, d.resume}) {
    CHECK_THAT(survival(find_scenario("C1").group2, t - 1e-9), WithinAbs(survival(find_scenario("C1").group2, t + 1e-9), 1e-8));
  }
}

TEST_CASE("competing exponentials calibrate to the analytic rate") {
  for (double lambda : {0.1, 1.0 / 28.0, 0.5, 2.0}) {
    for (double target : {0.1, 0.2, 0.4, 0.6}) {
      const CensoringModel m = calibrate_censoring(Exponential{lambda}, CensoringFamily::exponential, target);
      CHECK_FALSE(m.none);
      const double analytic = target * lambda / (1 - target);
      CHECK_THAT(m.parameter, WithinRel(analytic, 1e-6));
      CHECK_THAT(m.parameter / (m.parameter + lambda), WithinAbs(target, 1e-6));
    }
  }
  // Uniform censoring of an exponential: P(C < T) = (1 - exp(-lambda b)) / (lambda b).
  const CensoringModel u = calibrate_censoring(Exponential{0.1}, CensoringFamily::uniform, 0.3);
  const double lb = 0.1 * u.parameter;
  CHECK_THAT((1 - std::exp(-lb)) / lb, WithinAbs(0.3, 1e-6));
}

TEST_CASE("calibration meets its target analytically and empirically") {
  std::uint64_t stream = 0;
  for (const auto& s : scenario_catalog()) {
    for (CensoringFamily f : {CensoringFamily::uniform, CensoringFamily::exponential}) {
      for (double target : {0.2, 0.4, 0.6}) {
        const CensoringModel m = calibrate_censoring(s.group2, f, target);
        INFO(s.id << ' ' << to_string(f) << ' ' << target);
        CHECK_THAT(censoring_probability(s.group2, m), WithinAbs(target, 1e-4));
        Rng rng(mix_seed(99, ++stream));
        int censored = 0;
        for (int i = 0; i < 10000; ++i) {
          const double t = sample(s.group2, rng);
          if (m.sample(rng) < t) ++censored;
        }
        CHECK_THAT(censored / 10000.0, WithinAbs(target, 0.02));
      }
    }
  }
  const CensoringModel none = calibrate_censoring(Exponential{1}, CensoringFamily::uniform, 0.0);
  CHECK(none.none);
  Rng rng(1);
  CHECK(std::isinf(none.sample(rng)));
  CHECK_THROWS_AS(calibrate_censoring(Exponential{1}, CensoringFamily::uniform, 1.0), invalid_input_error);
  CHECK_THROWS_AS(calibrate_censoring(Exponential{-1}, CensoringFamily::uniform, 0.2), invalid_input_error);
}

TEST_CASE("dataset generation is deterministic and sized by the setting") {
  const CellGenerator gen(find_scenario("C3"), {30, 70, 0.2, 0.4, CensoringFamily::uniform});
  Rng a(5), b(5), c(6);
  const SurvivalDataset x = gen(a);
  CHECK(x.records() == gen(b).records());
  CHECK(x.records() != gen(c).records());
  CHECK(x.n1() == 30);
  CHECK(x.n2() == 70);
  const CellGenerator uncensored(find_scenario("PH3"), {50, 50, 0.0, 0.0, CensoringFamily::uniform});
  Rng r(1);
  CHECK(uncensored(r).n_events() == 100);
  CHECK_THROWS_AS(CellGenerator(find_scenario("PH3"), {0, 50, 0.0, 0.0, CensoringFamily::uniform}), invalid_input_error);
}

TEST_CASE("scenario manifest is versioned and complete") {
  const auto j = scenario_manifest();
  CHECK(j.at("format") == "survcomp-scenarios/1");
  CHECK(j.at("scenarios").size() == 20);
  CHECK(j.at("variants").size() == 1);
  CHECK(j.at("settings").size() == 40);
  CHECK(j.at("scenarios")[6].at("group2").at("rate").get<double>() == Catch::Approx(1.0 / 28.0));
}
