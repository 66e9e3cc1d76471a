#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/datagen/scenarios.hpp"
#include "survcomp/harness/battery.hpp"

namespace survcomp {

/// Aggregated outcome of one test on one scenario/setting cell.
/// rate = rejections / completed; failures are replications where the
/// test raised an error; skipped ones were dropped by the time budget.
struct SimulationResult {
  std::string scenario;
  SettingSpec setting;
  std::string test;
  std::size_t n_rep = 0;
  std::size_t attempted = 0;
  std::size_t completed = 0;
  std::size_t rejections = 0;
  std::size_t failures = 0;
  double wall_seconds = 0.0;

  std::size_t skipped() const noexcept { return n_rep - attempted; }
  double rate() const noexcept {
    return completed == 0 ? std::nan("") : static_cast<double>(rejections) / static_cast<double>(completed);
  }
  /// Monte-Carlo standard error of the rejection rate.
  double se() const noexcept {
    const double p = rate();
    return completed == 0 ? std::nan("") : std::sqrt(p * (1.0 - p) / static_cast<double>(completed));
  }
};

struct CellOptions {
  std::vector<std::string> tests = test_names();
  std::size_t n_rep = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  BatteryOptions battery;
  /// Per-test CPU budget per cell in seconds; 0 disables it. Once a test
  /// exceeds it, its remaining replications are skipped. Enabling this
  /// makes results depend on timing.
  double test_time_budget = 0.0;
};

inline std::uint64_t cell_seed(std::uint64_t master, const std::string& scenario, const SettingSpec& setting) {
  return mix_seed(mix_seed(master, hash_string(scenario)), hash_string(setting.id()));
}

inline std::uint64_t replication_seed(std::uint64_t cell, std::size_t rep) { return mix_seed(cell, rep); }

/// Content hash of a dataset (bitwise on times).
inline std::uint64_t dataset_hash(const SurvivalDataset& data) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (const Record& r : data.records()) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &r.time, sizeof bits);
    h = mix_seed(h, bits ^ (static_cast<std::uint64_t>(r.event) << 1) ^ static_cast<std::uint64_t>(r.group));
  }
  return h;
}

/// Re-creates the dataset of one replication of a cell.
inline SurvivalDataset replication_dataset(const CellGenerator& gen, std::uint64_t master, std::size_t rep) {
  Rng rng(replication_seed(cell_seed(master, gen.scenario().id, gen.setting()), rep));
  return gen(rng);
}

/// Runs every requested test on n_rep datasets of one cell. All tests of a
/// replication see the same dataset. Replications run in parallel and are
/// reduced in index order, so results do not depend on the thread count.
inline std::vector<SimulationResult> run_cell(const CellGenerator& gen, const CellOptions& opt) {
  if (opt.n_rep < 1) throw invalid_input_error("n_rep must be at least 1");
  for (const auto& t : opt.tests) {
    if (!is_test_name(t)) throw invalid_input_error("unknown method '" + t + "'; valid methods: " + valid_test_list());
  }
  const std::size_t n_tests = opt.tests.size();
  const std::uint64_t cseed = cell_seed(opt.seed, gen.scenario().id, gen.setting());
  BatteryOptions battery = opt.battery;
  battery.alpha = opt.alpha;
  battery.threads = 1;

  enum : unsigned char { accept = 0, reject = 1, failed = 2, skipped = 3 };
  std::vector<unsigned char> outcome(opt.n_rep * n_tests, skipped);
  std::vector<double> seconds(opt.n_rep * n_tests, 0.0);
  std::vector<std::atomic<double>> spent(n_tests);
  for (auto& s : spent) s.store(0.0);

  parallel_for(opt.n_rep, opt.threads, [&](std::size_t rep) {
    const std::uint64_t rseed = replication_seed(cseed, rep);
    Rng rng(rseed);
    const SurvivalDataset data = gen(rng);
    for (std::size_t t = 0; t < n_tests; ++t) {
      const std::size_t slot = rep * n_tests + t;
      if (opt.test_time_budget > 0.0 && spent[t].load() > opt.test_time_budget) continue;
      const auto start = std::chrono::steady_clock::now();
      try {
        const TestOutcome r = run_test(opt.tests[t], data, battery, rseed);
        outcome[slot] = r.p_value <= opt.alpha ? reject : accept;
      } catch (const error&) {
        outcome[slot] = failed;
      }
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      seconds[slot] = dt;
      double cur = spent[t].load();
      while (!spent[t].compare_exchange_weak(cur, cur + dt)) {
      }
    }
  });

  std::vector<SimulationResult> results;
  for (std::size_t t = 0; t < n_tests; ++t) {
    SimulationResult r;
    r.scenario = gen.scenario().id;
    r.setting = gen.setting();
    r.test = opt.tests[t];
    r.n_rep = opt.n_rep;
    for (std::size_t rep = 0; rep < opt.n_rep; ++rep) {
      const unsigned char o = outcome[rep * n_tests + t];
      r.wall_seconds += seconds[rep * n_tests + t];
      if (o == skipped) continue;
      ++r.attempted;
      if (o == failed) {
        ++r.failures;
        continue;
      }
      ++r.completed;
      if (o == reject) ++r.rejections;
    }
    results.push_back(r);
  }
  return results;
}

inline std::vector<SimulationResult> run_cell(const ScenarioSpec& scenario, const SettingSpec& setting,
                                              const CellOptions& opt) {
  return run_cell(CellGenerator(scenario, setting), opt);
}

}  // namespace survcomp
