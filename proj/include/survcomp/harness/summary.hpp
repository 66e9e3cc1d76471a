#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "survcomp/datagen/scenarios.hpp"
#include "survcomp/harness/simulation.hpp"

namespace survcomp {

/// Tests of one cell ordered by rejection rate, highest first. Ties keep
/// the battery order. Rank is 1-based; tied rates share the smaller rank.
struct CellRanking {
  std::string scenario;
  SettingSpec setting;
  std::vector<std::pair<std::string, double>> ranked;
  std::vector<std::size_t> ranks;
};

namespace detail {

inline auto cell_key(const SimulationResult& r) {
  return std::make_tuple(r.scenario, r.setting.id());
}

/// Groups results by cell, preserving first-appearance order.
inline std::vector<std::vector<const SimulationResult*>> group_cells(const std::vector<SimulationResult>& results) {
  std::vector<std::vector<const SimulationResult*>> out;
  std::map<std::tuple<std::string, std::string>, std::size_t> index;
  for (const auto& r : results) {
    const auto [it, inserted] = index.emplace(cell_key(r), out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(&r);
  }
  return out;
}

}  // namespace detail

inline std::vector<CellRanking> rank_cells(const std::vector<SimulationResult>& results) {
  std::vector<CellRanking> out;
  for (const auto& cell : detail::group_cells(results)) {
    CellRanking c{cell.front()->scenario, cell.front()->setting, {}, {}};
    for (const auto* r : cell) {
      if (r->completed > 0) c.ranked.emplace_back(r->test, r->rate());
    }
    std::stable_sort(c.ranked.begin(), c.ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < c.ranked.size(); ++i) {
      c.ranks.push_back(i > 0 && c.ranked[i].second == c.ranked[i - 1].second ? c.ranks.back() : i + 1);
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Acceptance band for an empirical size: alpha +- z sqrt(alpha (1 - alpha) / n).
inline std::pair<double, double> null_band(double alpha, std::size_t n_rep, double z = 1.96) {
  const double h = z * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_rep));
  return {alpha - h, alpha + h};
}

struct BandViolation {
  const SimulationResult* result;
  double lower;
  double upper;
};

/// Null-scenario results whose rejection rate falls outside the band.
inline std::vector<BandViolation> null_band_violations(const std::vector<SimulationResult>& results, double alpha) {
  std::vector<BandViolation> out;
  for (const auto& r : results) {
    if (r.completed == 0 || find_scenario(r.scenario).kind != ScenarioKind::null) continue;
    const auto [lo, hi] = null_band(alpha, r.completed);
    if (r.rate() < lo || r.rate() > hi) out.push_back({&r, lo, hi});
  }
  return out;
}

/// Mean rank of each test over all cells, in battery order of appearance.
inline std::vector<std::pair<std::string, double>> mean_ranks(const std::vector<CellRanking>& cells) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < c.ranked.size(); ++i) {
      const auto& name = c.ranked[i].first;
      if (!acc.count(name)) order.push_back(name);
      acc[name].first += static_cast<double>(c.ranks[i]);
      acc[name].second += 1;
    }
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& name : order) out.emplace_back(name, acc[name].first / static_cast<double>(acc[name].second));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

/// Plain-text summary: one power table per scenario (settings as rows,
/// tests as columns), then null-band violations and mean ranks.
inline std::string summary_text(const std::vector<SimulationResult>& results, double alpha) {
  std::string out;
  char buf[128];
  std::vector<std::string> scenarios, tests;
  for (const auto& r : results) {
    if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end()) scenarios.push_back(r.scenario);
    if (std::find(tests.begin(), tests.end(), r.test) == tests.end()) tests.push_back(r.test);
  }
  for (const auto& s : scenarios) {
    out += s + "\n";
    std::snprintf(buf, sizeof buf, "  %-32s", "setting");
    out += buf;
    for (const auto& t : tests) {
      std::snprintf(buf, sizeof buf, " %7s", t.c_str());
      out += buf;
    }
    out += "\n";
    for (const auto& cell : detail::group_cells(results)) {
      if (cell.front()->scenario != s) continue;
      std::snprintf(buf, sizeof buf, "  %-32s", cell.front()->setting.id().c_str());
      out += buf;
      for (const auto& t : tests) {
        const auto it = std::find_if(cell.begin(), cell.end(), [&](const auto* r) { return r->test == t; });
        if (it == cell.end() || (*it)->completed == 0) {
          std::snprintf(buf, sizeof buf, " %7s", "NA");
        } else {
          std::snprintf(buf, sizeof buf, " %7.3f", (*it)->rate());
        }
        out += buf;
      }
      out += "\n";
    }
  }
  const auto violations = null_band_violations(results, alpha);
  std::snprintf(buf, sizeof buf, "null band violations: %zu\n", violations.size());
  out += buf;
  for (const auto& v : violations) {
    std::snprintf(buf, sizeof buf, "  %s %s %s: %.4f outside [%.4f, %.4f]\n", v.result->scenario.c_str(),
                  v.result->setting.id().c_str(), v.result->test.c_str(), v.result->rate(), v.lower, v.upper);
    out += buf;
  }
  std::vector<SimulationResult> power;
  for (const auto& r : results) {
    if (find_scenario(r.scenario).kind != ScenarioKind::null) power.push_back(r);
  }
  if (!power.empty()) {
    out += "mean rank over non-null cells:\n";
    for (const auto& [name, rank] : mean_ranks(rank_cells(power))) {
      std::snprintf(buf, sizeof buf, "  %-6s %.2f\n", name.c_str(), rank);
      out += buf;
    }
  }
  return out;
}

}  // namespace survcomp
