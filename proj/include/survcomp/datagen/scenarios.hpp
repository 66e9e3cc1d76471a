#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/datagen/censoring.hpp"
#include "survcomp/datagen/distributions.hpp"

namespace survcomp {

enum class ScenarioKind { null, proportional, non_proportional, crossing };

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::null: return "null";
    case ScenarioKind::proportional: return "proportional";
    case ScenarioKind::non_proportional: return "non_proportional";
    case ScenarioKind::crossing: return "crossing";
  }
  return "unknown";
}

struct ScenarioSpec {
  std::string id;
  ScenarioKind kind = ScenarioKind::null;
  EventDistribution group1;
  EventDistribution group2;
  std::string note;
};

/// The twenty study scenarios: Null1-4, PH1-4, NPH1-4 and C1-8. NPH4 is
/// listed as NPH4a (LogN(2.4, 1.3) in group 2); NPH4b is available from
/// scenario_variants().
inline const std::vector<ScenarioSpec>& scenario_catalog() {
  static const std::vector<ScenarioSpec> catalog = [] {
    using PE = PiecewiseExponential;
    std::vector<ScenarioSpec> s;
    const auto null = ScenarioKind::null;
    const auto ph = ScenarioKind::proportional;
    const auto nph = ScenarioKind::non_proportional;
    const auto cr = ScenarioKind::crossing;
    s.push_back({"Null1", null, Weibull{1.5, 30}, Weibull{1.5, 30}, ""});
    s.push_back({"Null2", null, Exponential{0.1}, Exponential{0.1}, ""});
    s.push_back({"Null3", null, Gompertz{0.2, 0.4}, Gompertz{0.2, 0.4}, ""});
    s.push_back({"Null4", null, LogNormal{1.2, 1.7}, LogNormal{1.2, 1.7}, ""});
    s.push_back({"PH1", ph, Weibull{0.6, 8}, Weibull{0.6, 4}, ""});
    s.push_back({"PH2", ph, Weibull{1.3, 8}, Weibull{1.3, 4}, ""});
    s.push_back({"PH3", ph, Exponential{0.1}, Exponential{1.0 / 28.0}, ""});
    s.push_back({"PH4", ph, Exponential{0.5}, Exponential{0.2}, ""});
    s.push_back({"NPH1", nph, Weibull{2.5, 30}, Weibull{3, 25}, ""});
    s.push_back({"NPH2", nph, Exponential{1}, PE{{0.3}, {1.0, 2.0}}, ""});
    s.push_back({"NPH3", nph, Exponential{1.0 / 28.0}, PE{{12.0}, {1.0 / 15.0, 1.0 / 28.0}}, ""});
    s.push_back({"NPH4a", nph, LogNormal{1.2, 1.7}, LogNormal{2.4, 1.3},
                 "group-2 sdlog 1.3; NPH4b uses 1.6"});
    s.push_back({"C1", cr, Weibull{0.849, 10}, WeibullUniformWeibull{{0.849, 10}, 3.0, 50.625, 33.0},
                 "hazard-spliced composite, continuous survival at t = 3 and t = 33"});
    s.push_back({"C2", cr, Weibull{2.5, 30}, PE{{1.0}, {0.125, 0.01}}, ""});
    s.push_back({"C3", cr, Exponential{1.0 / 12.0}, PE{{2.0}, {0.25, 1.0 / 35.0}}, ""});
    s.push_back({"C4", cr, Weibull{1.5, 5}, PE{{1.5}, {0.5, 0.1}}, ""});
    s.push_back({"C5", cr, Gompertz{0.2, 0.04}, Gompertz{0.07, 0.06}, ""});
    s.push_back({"C6", cr, Exponential{1}, PE{{0.25}, {2.0, 0.6}}, ""});
    s.push_back({"C7", cr, Exponential{0.1}, Weibull{3, 10}, ""});
    s.push_back({"C8", cr, Weibull{1.5, 30}, Weibull{3, 25}, ""});
    return s;
  }();
  return catalog;
}

inline const std::vector<ScenarioSpec>& scenario_variants() {
  static const std::vector<ScenarioSpec> variants{
      {"NPH4b", ScenarioKind::non_proportional, LogNormal{1.2, 1.7}, LogNormal{2.4, 1.6},
       "group-2 sdlog 1.6; NPH4a uses 1.3"}};
  return variants;
}

/// Looks up a scenario or variant by id; "NPH4" resolves to NPH4a.
inline const ScenarioSpec& find_scenario(const std::string& id) {
  const std::string key = id == "NPH4" ? "NPH4a" : id;
  for (const auto* list : {&scenario_catalog(), &scenario_variants()}) {
    for (const auto& s : *list) {
      if (s.id == key) return s;
    }
  }
  throw invalid_input_error("unknown scenario '" + id + "'");
}

/// Group sizes, per-group censoring rates and censoring family of one cell.
struct SettingSpec {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double rate1 = 0.0;
  double rate2 = 0.0;
  CensoringFamily family = CensoringFamily::uniform;

  std::string id() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "n%zu-%zu_c%g-%g_%s", n1, n2, rate1, rate2, to_string(family).c_str());
    return buf;
  }

  friend bool operator==(const SettingSpec&, const SettingSpec&) = default;
};

/// The twenty (n1, n2, rate1, rate2) combinations for one censoring family.
inline std::vector<SettingSpec> study_settings(CensoringFamily family) {
  static constexpr std::size_t sizes[5][2] = {{100, 100}, {50, 50}, {30, 70}, {25, 25}, {20, 30}};
  static constexpr double rates[4][2] = {{0.0, 0.0}, {0.2, 0.2}, {0.2, 0.4}, {0.2, 0.6}};
  std::vector<SettingSpec> out;
  for (const auto& r : rates) {
    for (const auto& n : sizes) out.push_back({n[0], n[1], r[0], r[1], family});
  }
  return out;
}

inline std::vector<SettingSpec> study_settings() {
  auto out = study_settings(CensoringFamily::uniform);
  const auto expo = study_settings(CensoringFamily::exponential);
  out.insert(out.end(), expo.begin(), expo.end());
  return out;
}

/// A scenario/setting pair with censoring already calibrated per group.
class CellGenerator {
 public:
  CellGenerator(ScenarioSpec scenario, SettingSpec setting)
      : scenario_(std::move(scenario)),
        setting_(setting),
        censor1_(calibrate_censoring(scenario_.group1, setting.family, setting.rate1)),
        censor2_(calibrate_censoring(scenario_.group2, setting.family, setting.rate2)) {
    if (setting.n1 == 0 || setting.n2 == 0) throw invalid_input_error("group sizes must be positive");
  }

  const ScenarioSpec& scenario() const noexcept { return scenario_; }
  const SettingSpec& setting() const noexcept { return setting_; }
  const CensoringModel& censoring(int group) const { return group == 1 ? censor1_ : censor2_; }

  SurvivalDataset operator()(Rng& rng) const {
    std::vector<Record> records;
    records.reserve(setting_.n1 + setting_.n2);
    draw(records, scenario_.group1, censor1_, setting_.n1, 1, rng);
    draw(records, scenario_.group2, censor2_, setting_.n2, 2, rng);
    return SurvivalDataset(std::move(records));
  }

 private:
  static void draw(std::vector<Record>& out, const EventDistribution& dist, const CensoringModel& cens,
                   std::size_t n, int group, Rng& rng) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = sample(dist, rng);
      const double c = cens.sample(rng);
      out.push_back({std::min(t, c), t <= c, group});
    }
  }

  ScenarioSpec scenario_;
  SettingSpec setting_;
  CensoringModel censor1_;
  CensoringModel censor2_;
};

inline SurvivalDataset generate_dataset(const ScenarioSpec& scenario, const SettingSpec& setting, Rng& rng) {
  return CellGenerator(scenario, setting)(rng);
}

inline nlohmann::json distribution_json(const EventDistribution& dist) {
  using nlohmann::json;
  return std::visit(
      [](const auto& d) -> json {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Exponential>) {
          return {{"family", "exponential"}, {"rate", d.rate}};
        } else if constexpr (std::is_same_v<D, Weibull>) {
          return {{"family", "weibull"}, {"shape", d.shape}, {"scale", d.scale}};
        } else if constexpr (std::is_same_v<D, Gompertz>) {
          return {{"family", "gompertz"}, {"shape", d.shape}, {"rate", d.rate}};
        } else if constexpr (std::is_same_v<D, LogNormal>) {
          return {{"family", "lognormal"}, {"meanlog", d.meanlog}, {"sdlog", d.sdlog}};
        } else if constexpr (std::is_same_v<D, PiecewiseExponential>) {
          return {{"family", "piecewise_exponential"}, {"breaks", d.breaks}, {"rates", d.rates}};
        } else {
          return {{"family", "weibull_uniform_weibull"},
                  {"weibull_shape", d.base.shape},
                  {"weibull_scale", d.base.scale},
                  {"uniform_start", d.start},
                  {"uniform_end", d.uniform_end},
                  {"weibull_resume", d.resume}};
        }
      },
      dist);
}

inline nlohmann::json scenario_json(const ScenarioSpec& s) {
  nlohmann::json j{{"id", s.id},
                   {"kind", to_string(s.kind)},
                   {"group1", distribution_json(s.group1)},
                   {"group2", distribution_json(s.group2)},
                   {"group1_label", describe(s.group1)},
                   {"group2_label", describe(s.group2)}};
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

/// Machine-readable catalog of all scenarios and the setting grid.
inline nlohmann::json scenario_manifest() {
  nlohmann::json j;
  j["format"] = "survcomp-scenarios/1";
  j["parameterization"] = {
      {"exponential", "S(t) = exp(-rate t)"},
      {"weibull", "S(t) = exp(-(t/scale)^shape)"},
      {"gompertz", "hazard rate*exp(shape t)"},
      {"lognormal", "log T ~ N(meanlog, sdlog^2)"},
      {"piecewise_exponential", "hazard rates[k] on [breaks[k-1], breaks[k])"},
      {"weibull_uniform_weibull", "Weibull hazard, then uniform residual hazard 1/(uniform_end - t), then Weibull"}};
  j["scenarios"] = nlohmann::json::array();
  for (const auto& s : scenario_catalog()) j["scenarios"].push_back(scenario_json(s));
  j["variants"] = nlohmann::json::array();
  for (const auto& s : scenario_variants()) j["variants"].push_back(scenario_json(s));
  j["notes"] = {"NPH4 comes in two parameterizations: NPH4a is in the catalog and NPH4b is a variant."};
  j["settings"] = nlohmann::json::array();
  for (const auto& st : study_settings()) {
    j["settings"].push_back({{"id", st.id()},
                             {"n1", st.n1},
                             {"n2", st.n2},
                             {"rate1", st.rate1},
                             {"rate2", st.rate2},
                             {"family", to_string(st.family)}});
  }
  return j;
}

}  // namespace survcomp
