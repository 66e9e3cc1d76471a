#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "survcomp/area/abc.hpp"
#include "survcomp/area/rmst.hpp"
#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/test_outcome.hpp"
#include "survcomp/konp/konp.hpp"
#include "survcomp/omnibus/maxcombo.hpp"
#include "survcomp/omnibus/mdir.hpp"
#include "survcomp/twostage/two_stage.hpp"
#include "survcomp/wlrt/logrank.hpp"

namespace survcomp {

/// Resampling sizes and tuning shared by the named tests.
struct BatteryOptions {
  double alpha = 0.05;
  std::optional<double> tau;
  MdirMode mdir_mode = MdirMode::permutation;
  std::size_t mdir_perm = 2000;
  std::size_t konp_perm = 2000;
  std::size_t ts_boot = 500;
  double ts_epsilon = 0.1;
  std::size_t abc_boot = 1000;
  std::size_t mc_draws = 100000;
  unsigned threads = 1;
};

/// Tests in reporting order.
inline const std::vector<std::string>& test_names() {
  static const std::vector<std::string> names{"LR", "PP", "RMST", "KONP", "mdir2", "mdir3", "mdir4", "MC", "TS", "ABC"};
  return names;
}

inline bool is_test_name(const std::string& name) {
  const auto& names = test_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

inline std::string valid_test_list() {
  std::string out;
  for (const auto& n : test_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

/// Expands "all" and comma-separated lists; rejects unknown names.
inline std::vector<std::string> parse_test_list(const std::string& spec) {
  if (spec == "all") return test_names();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto pos = spec.find(',', start);
    const std::string name = spec.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!is_test_name(name)) {
      throw invalid_input_error("unknown method '" + name + "'; valid methods: " + valid_test_list() + ", all");
    }
    out.push_back(name);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Runs one named test. Resampling streams derive from (seed, name).
inline TestOutcome run_test(const std::string& name, const SurvivalDataset& data, const BatteryOptions& opt,
                            std::uint64_t seed) {
  const std::uint64_t s = mix_seed(seed, hash_string(name));
  if (name == "LR") return logrank_test(data);
  if (name == "PP") return peto_peto_test(data);
  if (name == "RMST") return rmst_diff_test(data, opt.tau);
  if (name == "KONP") return konp_test(data, {opt.konp_perm, s, opt.threads, std::nullopt});
  if (name == "mdir2" || name == "mdir3" || name == "mdir4") {
    const WeightSet w = name == "mdir2" ? weight_sets::mdir2() : name == "mdir3" ? weight_sets::mdir3() : weight_sets::mdir4();
    return mdir_test(data, w, {opt.mdir_mode, opt.mdir_perm, s, opt.threads}, name);
  }
  if (name == "MC") {
    const auto pairs = weight_sets::maxcombo();
    return maxcombo_test(data, pairs, {opt.mc_draws, s, opt.threads});
  }
  if (name == "TS") return two_stage_test(data, {opt.alpha, opt.ts_epsilon, opt.ts_boot, s, opt.threads});
  if (name == "ABC") return abc_test(data, opt.tau, {opt.abc_boot, s, opt.threads});
  throw invalid_input_error("unknown method '" + name + "'; valid methods: " + valid_test_list());
}

}  // namespace survcomp
