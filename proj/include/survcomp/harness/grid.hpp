#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survcomp/core/errors.hpp"
#include "survcomp/datagen/scenarios.hpp"
#include "survcomp/harness/results_io.hpp"
#include "survcomp/harness/simulation.hpp"

namespace survcomp {

inline constexpr const char* grid_format = "survcomp-grid/1";
inline constexpr const char* checkpoint_format = "survcomp-checkpoint/1";

/// Declarative description of a simulation grid.
struct GridConfig {
  std::vector<std::string> scenarios;  // ids; empty means none
  std::vector<CensoringFamily> families{CensoringFamily::uniform, CensoringFamily::exponential};
  std::vector<SettingSpec> settings;   // family field ignored; empty means the study settings
  CellOptions cell;

  std::vector<std::pair<const ScenarioSpec*, SettingSpec>> cells() const {
    std::vector<SettingSpec> base = settings.empty() ? study_settings(CensoringFamily::uniform) : settings;
    std::vector<std::pair<const ScenarioSpec*, SettingSpec>> out;
    for (const auto& id : scenarios) {
      const ScenarioSpec& s = find_scenario(id);
      for (CensoringFamily f : families) {
        for (SettingSpec st : base) {
          st.family = f;
          out.emplace_back(&s, st);
        }
      }
    }
    return out;
  }
};

inline nlohmann::json battery_json(const BatteryOptions& b) {
  return {{"mdir_mode", b.mdir_mode == MdirMode::permutation ? "permutation" : "asymptotic"},
          {"mdir_perm", b.mdir_perm},
          {"konp_perm", b.konp_perm},
          {"ts_boot", b.ts_boot},
          {"ts_epsilon", b.ts_epsilon},
          {"abc_boot", b.abc_boot},
          {"mc_draws", b.mc_draws}};
}

/// Grid manifest without execution-only fields (threads, checkpointing).
inline nlohmann::json grid_json(const GridConfig& g) {
  nlohmann::json j;
  j["format"] = grid_format;
  j["scenarios"] = g.scenarios;
  j["families"] = nlohmann::json::array();
  for (auto f : g.families) j["families"].push_back(to_string(f));
  j["settings"] = nlohmann::json::array();
  for (const auto& s : g.settings) {
    j["settings"].push_back({{"n1", s.n1}, {"n2", s.n2}, {"rate1", s.rate1}, {"rate2", s.rate2}});
  }
  j["tests"] = g.cell.tests;
  j["n_rep"] = g.cell.n_rep;
  j["alpha"] = g.cell.alpha;
  j["seed"] = g.cell.seed;
  j["battery"] = battery_json(g.cell.battery);
  j["test_time_budget"] = g.cell.test_time_budget;
  return j;
}

/// Parses a grid manifest. Missing keys keep their defaults; "scenarios"
/// and "tests" accept the string "all".
inline GridConfig grid_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("format") && j.at("format") != grid_format) {
      throw invalid_input_error("unsupported grid format " + j.at("format").dump());
    }
    GridConfig g;
    const auto& sc = j.value("scenarios", nlohmann::json("all"));
    if (sc.is_string() && sc.get<std::string>() == "all") {
      for (const auto& s : scenario_catalog()) g.scenarios.push_back(s.id);
    } else {
      for (const auto& s : sc) {
        g.scenarios.push_back(find_scenario(s.get<std::string>()).id);
      }
    }
    if (j.contains("families")) {
      g.families.clear();
      for (const auto& f : j.at("families")) g.families.push_back(parse_censoring_family(f.get<std::string>()));
    }
    if (j.contains("settings")) {
      for (const auto& s : j.at("settings")) {
        g.settings.push_back({s.at("n1").get<std::size_t>(), s.at("n2").get<std::size_t>(), s.at("rate1").get<double>(),
                              s.at("rate2").get<double>(), CensoringFamily::uniform});
      }
    }
    if (j.contains("tests")) {
      const auto& t = j.at("tests");
      if (t.is_string()) {
        g.cell.tests = parse_test_list(t.get<std::string>());
      } else {
        g.cell.tests.clear();
        for (const auto& name : t) {
          const auto parsed = parse_test_list(name.get<std::string>());
          g.cell.tests.insert(g.cell.tests.end(), parsed.begin(), parsed.end());
        }
      }
    }
    g.cell.n_rep = j.value("n_rep", g.cell.n_rep);
    g.cell.alpha = j.value("alpha", g.cell.alpha);
    g.cell.seed = j.value("seed", g.cell.seed);
    g.cell.test_time_budget = j.value("test_time_budget", 0.0);
    if (j.contains("battery")) {
      const auto& b = j.at("battery");
      auto& o = g.cell.battery;
      if (b.contains("mdir_mode")) {
        const auto mode = b.at("mdir_mode").get<std::string>();
        if (mode != "permutation" && mode != "asymptotic") throw invalid_input_error("bad mdir_mode '" + mode + "'");
        o.mdir_mode = mode == "permutation" ? MdirMode::permutation : MdirMode::asymptotic;
      }
      o.mdir_perm = b.value("mdir_perm", o.mdir_perm);
      o.konp_perm = b.value("konp_perm", o.konp_perm);
      o.ts_boot = b.value("ts_boot", o.ts_boot);
      o.ts_epsilon = b.value("ts_epsilon", o.ts_epsilon);
      o.abc_boot = b.value("abc_boot", o.abc_boot);
      o.mc_draws = b.value("mc_draws", o.mc_draws);
    }
    if (g.cell.n_rep < 1) throw invalid_input_error("n_rep must be at least 1");
    if (!(g.cell.alpha > 0.0 && g.cell.alpha < 1.0)) throw invalid_input_error("alpha must lie in (0, 1)");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error(std::string("invalid grid manifest: ") + e.what());
  }
}

inline GridConfig read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error("cannot open '" + path + "'");
  try {
    return grid_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_input_error("invalid grid manifest '" + path + "': " + e.what());
  }
}

/// Keeps only the listed scenario ids (in grid order).
inline GridConfig filter_scenarios(GridConfig g, const std::vector<std::string>& keep) {
  std::vector<std::string> out;
  for (const auto& id : g.scenarios) {
    for (const auto& k : keep) {
      if (find_scenario(k).id == id) {
        out.push_back(id);
        break;
      }
    }
  }
  g.scenarios = std::move(out);
  return g;
}

struct GridRunOptions {
  unsigned threads = 1;
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(std::size_t done, std::size_t total, const std::string& cell)> progress;
};

namespace detail {

inline std::string checkpoint_key(const GridConfig& g) {
  return std::to_string(hash_string(grid_json(g).dump()));
}

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const std::string& scenario,
                                             const SettingSpec& setting) {
  return dir / (scenario + "__" + setting.id() + ".json");
}

inline std::optional<std::vector<SimulationResult>> load_checkpoint(const std::filesystem::path& file,
                                                                     const std::string& key) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format") != checkpoint_format || j.at("config") != key) return std::nullopt;
    std::vector<SimulationResult> out;
    for (const auto& r : j.at("results")) out.push_back(result_from_json(r));
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline void save_checkpoint(const std::filesystem::path& file, const std::string& key,
                            const std::vector<SimulationResult>& results) {
  nlohmann::json j{{"format", checkpoint_format}, {"config", key}, {"results", nlohmann::json::array()}};
  for (const auto& r : results) j["results"].push_back(result_json(r));
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace detail

/// Runs every cell of the grid in order. With a checkpoint directory each
/// finished cell is stored as one JSON file; cells whose file exists (and
/// was written for the same manifest) are loaded instead of recomputed.
inline std::vector<SimulationResult> run_grid(const GridConfig& grid, const GridRunOptions& run = {}) {
  const auto cells = grid.cells();
  const std::string key = detail::checkpoint_key(grid);
  if (run.checkpoint_dir) std::filesystem::create_directories(*run.checkpoint_dir);
  CellOptions opt = grid.cell;
  opt.threads = run.threads;
  std::vector<SimulationResult> all;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& [scenario, setting] = cells[c];
    std::optional<std::vector<SimulationResult>> results;
    std::filesystem::path file;
    if (run.checkpoint_dir) {
      file = detail::checkpoint_path(*run.checkpoint_dir, scenario->id, setting);
      results = detail::load_checkpoint(file, key);
    }
    if (!results) {
      results = run_cell(*scenario, setting, opt);
      if (run.checkpoint_dir) detail::save_checkpoint(file, key, *results);
    }
    all.insert(all.end(), results->begin(), results->end());
    if (run.progress) run.progress(c + 1, cells.size(), scenario->id + " " + setting.id());
  }
  return all;
}

}  // namespace survcomp
