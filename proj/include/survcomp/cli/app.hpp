#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/datagen/censoring.hpp"
#include "survcomp/datagen/distributions.hpp"
#include "survcomp/datagen/scenarios.hpp"
#include "survcomp/harness/battery.hpp"
#include "survcomp/harness/grid.hpp"
#include "survcomp/harness/results_io.hpp"
#include "survcomp/harness/summary.hpp"

namespace survcomp::cli {

enum exit_code : int { exit_ok = 0, exit_usage = 2, exit_data = 3, exit_computation = 4 };

inline constexpr const char* tests_format = "survcomp-tests/1";
inline constexpr const char* calibration_format = "survcomp-calibration/1";
inline constexpr const char* summary_format = "survcomp-summary/1";

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string num(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// "exponential:rate", "weibull:shape,scale", "gompertz:shape,rate",
/// "lognormal:meanlog,sdlog".
inline EventDistribution parse_distribution(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw usage_error("distribution must look like family:p1[,p2], got '" + spec + "'");
  const std::string family = spec.substr(0, colon);
  std::vector<double> p;
  for (const auto& item : split_list(spec.substr(colon + 1))) {
    try {
      std::size_t used = 0;
      p.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw usage_error("bad distribution parameter '" + item + "'");
    }
  }
  auto need = [&](std::size_t k) {
    if (p.size() != k) throw usage_error(family + " takes " + std::to_string(k) + " parameter(s)");
  };
  EventDistribution d;
  if (family == "exponential") {
    need(1);
    d = Exponential{p[0]};
  } else if (family == "weibull") {
    need(2);
    d = Weibull{p[0], p[1]};
  } else if (family == "gompertz") {
    need(2);
    d = Gompertz{p[0], p[1]};
  } else if (family == "lognormal") {
    need(2);
    d = LogNormal{p[0], p[1]};
  } else {
    throw usage_error("unknown distribution family '" + family + "' (exponential, weibull, gompertz, lognormal)");
  }
  try {
    validate(d);
  } catch (const invalid_input_error& e) {
    throw usage_error(e.what());
  }
  return d;
}

/// Destination selected by --out: a file, or the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw invalid_input_error("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Common {
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::string out;
  std::string format;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
};

inline void add_common(CLI::App* cmd, Common& c, const std::vector<std::string>& formats) {
  c.seed_opt = cmd->add_option("--seed", c.seed, "master random seed")->capture_default_str();
  c.alpha_opt = cmd->add_option("--alpha", c.alpha, "significance level")->capture_default_str();
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember(formats));
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw usage_error("--alpha must lie in (0, 1)");
}

struct Resampling {
  std::optional<std::size_t> n_perm, n_boot, n_mc;
  std::optional<double> epsilon;
  std::string mdir_mode;
  unsigned threads = 1;
};

inline void add_resampling(CLI::App* cmd, Resampling& r) {
  cmd->add_option("--n-perm", r.n_perm, "permutations for KONP and mdir");
  cmd->add_option("--n-boot", r.n_boot, "bootstrap resamples for TS and ABC");
  cmd->add_option("--n-mc", r.n_mc, "Monte-Carlo draws for MC");
  cmd->add_option("--epsilon", r.epsilon, "TS crossing-range trim");
  cmd->add_option("--mdir-mode", r.mdir_mode, "mdir null distribution")
      ->check(CLI::IsMember({"permutation", "asymptotic"}));
  cmd->add_option("--threads", r.threads, "worker threads (0 = all cores)")->capture_default_str();
}

inline void apply_resampling(const Resampling& r, BatteryOptions& b) {
  auto positive = [](const std::optional<std::size_t>& v, const char* flag) {
    if (v && *v < 1) throw usage_error(std::string(flag) + " must be at least 1");
  };
  positive(r.n_perm, "--n-perm");
  positive(r.n_boot, "--n-boot");
  positive(r.n_mc, "--n-mc");
  if (r.n_perm) b.mdir_perm = b.konp_perm = *r.n_perm;
  if (r.n_boot) b.ts_boot = b.abc_boot = *r.n_boot;
  if (r.n_mc) b.mc_draws = *r.n_mc;
  if (r.epsilon) {
    if (!(*r.epsilon > 0.0 && *r.epsilon < 0.5)) throw usage_error("--epsilon must lie in (0, 0.5)");
    b.ts_epsilon = *r.epsilon;
  }
  if (!r.mdir_mode.empty()) b.mdir_mode = r.mdir_mode == "asymptotic" ? MdirMode::asymptotic : MdirMode::permutation;
}

inline std::vector<std::string> checked_methods(const std::string& spec) {
  try {
    return parse_test_list(spec);
  } catch (const invalid_input_error& e) {
    throw usage_error(e.what());
  }
}

// ---- test -------------------------------------------------------------------

struct TestArgs {
  Common common;
  Resampling resampling;
  std::string data;
  std::string method = "all";
  std::optional<double> tau;
};

inline int cmd_test(TestArgs& a, std::ostream& out, std::ostream& err) {
  check_alpha(a.common.alpha);
  const auto methods = checked_methods(a.method);
  BatteryOptions battery;
  battery.alpha = a.common.alpha;
  battery.tau = a.tau;
  battery.threads = a.resampling.threads;
  apply_resampling(a.resampling, battery);
  if (a.tau && !(*a.tau > 0.0)) throw usage_error("--tau must be positive");

  const SurvivalDataset data = a.data == "-" ? read_csv(std::cin) : read_csv_file(a.data);

  struct Row {
    std::string method;
    std::optional<TestOutcome> outcome;
    std::string error;
    bool input_error = false;
  };
  std::vector<Row> rows;
  std::size_t succeeded = 0, input_errors = 0;
  for (const auto& m : methods) {
    Row row{m, std::nullopt, "", false};
    try {
      row.outcome = run_test(m, data, battery, a.common.seed);
      ++succeeded;
    } catch (const invalid_input_error& e) {
      row.error = e.what();
      row.input_error = true;
      ++input_errors;
    } catch (const error& e) {
      row.error = e.what();
    }
    if (!row.error.empty()) err << m << ": " << row.error << '\n';
    rows.push_back(std::move(row));
  }

  Sink sink(a.common.out, out);
  if (a.common.format == "json") {
    nlohmann::json j{{"format", tests_format},
                     {"alpha", a.common.alpha},
                     {"seed", a.common.seed},
                     {"n1", data.n1()},
                     {"n2", data.n2()},
                     {"tests", nlohmann::json::array()}};
    for (const auto& r : rows) {
      nlohmann::json t{{"method", r.method}};
      if (r.outcome) {
        t["statistic"] = r.outcome->statistic;
        t["p_value"] = r.outcome->p_value;
        t["reject"] = r.outcome->p_value <= a.common.alpha;
        t["detail"] = r.outcome->detail;
        t["flags"] = r.outcome->flags;
        t["status"] = "ok";
      } else {
        t["status"] = "error";
        t["message"] = r.error;
      }
      j["tests"].push_back(t);
    }
    *sink << j.dump(2) << '\n';
  } else {
    *sink << "# format=" << tests_format << '\n' << "method,statistic,p_value,reject,status,message\n";
    for (const auto& r : rows) {
      if (r.outcome) {
        *sink << r.method << ',' << num(r.outcome->statistic) << ',' << num(r.outcome->p_value) << ','
              << (r.outcome->p_value <= a.common.alpha ? 1 : 0) << ",ok,";
        for (std::size_t k = 0; k < r.outcome->flags.size(); ++k) {
          *sink << (k ? "; " : "") << quote(r.outcome->flags[k]);
        }
        *sink << '\n';
      } else {
        *sink << r.method << ",NA,NA,NA,error," << quote(r.error) << '\n';
      }
    }
  }
  if (succeeded > 0) return exit_ok;
  return input_errors == rows.size() ? exit_data : exit_computation;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  Common common;
  Resampling resampling;
  std::string grid;
  std::optional<std::size_t> n_rep;
  std::string filter;
  CLI::Option* filter_opt = nullptr;
  std::string family;
  std::string method;
  std::string resume;
  double time_budget = 0.0;
  bool quiet = false;
};

inline int cmd_simulate(SimulateArgs& a, std::ostream& out, std::ostream& err) {
  GridConfig grid;
  if (!a.grid.empty()) {
    grid = read_grid_file(a.grid);
  } else {
    for (const auto& s : scenario_catalog()) grid.scenarios.push_back(s.id);
    grid.cell.n_rep = 200;
  }
  if (a.common.alpha_opt->count() > 0) {
    check_alpha(a.common.alpha);
    grid.cell.alpha = a.common.alpha;
  }
  if (a.common.seed_opt->count() > 0) grid.cell.seed = a.common.seed;
  if (a.n_rep) {
    if (*a.n_rep < 1) throw usage_error("--n-rep must be at least 1");
    grid.cell.n_rep = *a.n_rep;
  }
  if (!a.method.empty()) grid.cell.tests = checked_methods(a.method);
  if (!a.family.empty()) {
    grid.families = a.family == "both" ? std::vector<CensoringFamily>{CensoringFamily::uniform, CensoringFamily::exponential}
                                       : std::vector<CensoringFamily>{parse_censoring_family(a.family)};
  }
  if (a.filter_opt->count() > 0) {
    const auto keep = split_list(a.filter);
    for (const auto& id : keep) {
      try {
        find_scenario(id);
      } catch (const invalid_input_error& e) {
        throw usage_error(e.what());
      }
    }
    grid = filter_scenarios(grid, keep);
  }
  if (a.time_budget < 0.0) throw usage_error("--time-budget must be non-negative");
  if (a.time_budget > 0.0) grid.cell.test_time_budget = a.time_budget;
  apply_resampling(a.resampling, grid.cell.battery);

  GridRunOptions run;
  run.threads = a.resampling.threads;
  if (!a.resume.empty()) run.checkpoint_dir = a.resume;
  if (!a.quiet) {
    run.progress = [&err](std::size_t done, std::size_t total, const std::string& cell) {
      err << '[' << done << '/' << total << "] " << cell << '\n';
    };
  }
  const auto results = run_grid(grid, run);

  Sink sink(a.common.out, out);
  if (a.common.format == "json") {
    auto j = results_json(results);
    j["grid"] = grid_json(grid);
    *sink << j.dump(2) << '\n';
  } else {
    write_results_csv(*sink, results);
  }
  const auto violations = null_band_violations(results, grid.cell.alpha);
  std::size_t failures = 0;
  for (const auto& r : results) failures += r.failures;
  err << "cells: " << grid.cells().size() << ", rows: " << results.size() << ", test failures: " << failures
      << ", null band violations: " << violations.size() << '\n';
  for (const auto& v : violations) {
    err << "  " << v.result->scenario << ' ' << v.result->setting.id() << ' ' << v.result->test << ": "
        << num(v.result->rate()) << " outside [" << num(v.lower) << ", " << num(v.upper) << "]\n";
  }
  return exit_ok;
}

// ---- calibrate --------------------------------------------------------------

struct CalibrateArgs {
  Common common;
  std::string scenario;
  int group = 1;
  std::string distribution;
  std::string family;
  double rate = 0.0;
  std::size_t n_check = 0;
};

inline int cmd_calibrate(CalibrateArgs& a, std::ostream& out, std::ostream&) {
  if (a.scenario.empty() == a.distribution.empty()) throw usage_error("give exactly one of --scenario or --distribution");
  if (a.group != 1 && a.group != 2) throw usage_error("--group must be 1 or 2");
  if (!(a.rate >= 0.0 && a.rate < 1.0)) throw usage_error("--rate must lie in [0, 1)");
  const CensoringFamily family = parse_censoring_family(a.family);
  EventDistribution dist;
  if (!a.distribution.empty()) {
    dist = parse_distribution(a.distribution);
  } else {
    try {
      const auto& s = find_scenario(a.scenario);
      dist = a.group == 1 ? s.group1 : s.group2;
    } catch (const invalid_input_error& e) {
      throw usage_error(e.what());
    }
  }

  const CensoringModel model = calibrate_censoring(dist, family, a.rate);
  const double achieved = censoring_probability(dist, model);
  std::optional<double> empirical;
  if (a.n_check > 0) {
    Rng rng(a.common.seed);
    std::size_t censored = 0;
    for (std::size_t i = 0; i < a.n_check; ++i) {
      const double t = sample(dist, rng);
      if (model.sample(rng) < t) ++censored;
    }
    empirical = static_cast<double>(censored) / static_cast<double>(a.n_check);
  }

  Sink sink(a.common.out, out);
  const double parameter = model.none ? std::nan("") : model.parameter;
  const char* parameter_name = family == CensoringFamily::uniform ? "upper" : "rate";
  if (a.common.format == "json") {
    nlohmann::json j{{"format", calibration_format}, {"distribution", describe(dist)},
                     {"family", to_string(family)},   {"target", a.rate},
                     {"parameter_name", parameter_name}, {"achieved", achieved}};
    j["parameter"] = model.none ? nlohmann::json(nullptr) : nlohmann::json(parameter);
    j["no_censoring"] = model.none;
    if (empirical) {
      j["n_check"] = a.n_check;
      j["empirical"] = *empirical;
    }
    *sink << j.dump(2) << '\n';
  } else {
    *sink << "# format=" << calibration_format << '\n'
          << "distribution,family,target,parameter_name,parameter,achieved,n_check,empirical\n"
          << quote(describe(dist)) << ',' << to_string(family) << ',' << num(a.rate) << ',' << parameter_name << ','
          << num(parameter) << ',' << num(achieved) << ',' << a.n_check << ','
          << (empirical ? num(*empirical) : std::string("NA")) << '\n';
  }
  return exit_ok;
}

// ---- scenarios --------------------------------------------------------------

inline int cmd_scenarios(Common& c, std::ostream& out) {
  Sink sink(c.out, out);
  if (c.format == "csv") {
    *sink << "# format=survcomp-scenarios/1\n"
          << "# NPH4 comes in two parameterizations: NPH4a is in the catalog, NPH4b is a variant\n"
          << "id,kind,group1,group2,note\n";
    for (const auto* list : {&scenario_catalog(), &scenario_variants()}) {
      for (const auto& s : *list) {
        *sink << s.id << ',' << to_string(s.kind) << ',' << quote(describe(s.group1)) << ','
              << quote(describe(s.group2)) << ',' << quote(s.note) << '\n';
      }
    }
  } else {
    *sink << scenario_manifest().dump(2) << '\n';
  }
  return exit_ok;
}

// ---- summarize --------------------------------------------------------------

struct SummarizeArgs {
  Common common;
  std::string results;
};

inline std::vector<SimulationResult> read_any_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error("cannot open '" + path + "'");
  char first = 0;
  in >> std::ws;
  first = static_cast<char>(in.peek());
  if (first != '{') return read_results_csv(in);
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format") != results_format) throw invalid_input_error("unsupported results format " + j.at("format").dump());
    std::vector<SimulationResult> out;
    for (const auto& r : j.at("results")) out.push_back(result_from_json(r));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error("invalid results file '" + path + "': " + e.what());
  }
}

inline int cmd_summarize(SummarizeArgs& a, std::ostream& out) {
  check_alpha(a.common.alpha);
  const auto results = read_any_results(a.results);
  Sink sink(a.common.out, out);
  if (a.common.format.empty() || a.common.format == "text") {
    *sink << summary_text(results, a.common.alpha);
    return exit_ok;
  }
  // Long format: one row per (cell, test) with its rank inside the cell.
  struct Row {
    const SimulationResult* r;
    std::size_t rank;
    double lo, hi;
    bool null;
  };
  std::vector<Row> rows;
  const auto rankings = rank_cells(results);
  for (const auto& r : results) {
    std::size_t rank = 0;
    for (const auto& c : rankings) {
      if (c.scenario != r.scenario || !(c.setting == r.setting)) continue;
      for (std::size_t i = 0; i < c.ranked.size(); ++i) {
        if (c.ranked[i].first == r.test) rank = c.ranks[i];
      }
    }
    const auto band = r.completed > 0 ? null_band(a.common.alpha, r.completed) : std::pair{std::nan(""), std::nan("")};
    rows.push_back({&r, rank, band.first, band.second, find_scenario(r.scenario).kind == ScenarioKind::null});
  }
  if (a.common.format == "json") {
    nlohmann::json j{{"format", summary_format}, {"alpha", a.common.alpha}, {"rows", nlohmann::json::array()}};
    for (const auto& row : rows) {
      auto e = result_json(*row.r, false);
      e["rank"] = row.rank;
      e["null_scenario"] = row.null;
      if (row.null && row.r->completed > 0) {
        e["band_low"] = row.lo;
        e["band_high"] = row.hi;
        e["in_band"] = row.r->rate() >= row.lo && row.r->rate() <= row.hi;
      }
      j["rows"].push_back(e);
    }
    *sink << j.dump(2) << '\n';
  } else {
    *sink << "# format=" << summary_format << '\n'
          << "scenario,n1,n2,rate1,rate2,family,test,completed,rate,se,rank,null_scenario,band_low,band_high,in_band\n";
    for (const auto& row : rows) {
      const auto& r = *row.r;
      const bool band = row.null && r.completed > 0;
      *sink << r.scenario << ',' << r.setting.n1 << ',' << r.setting.n2 << ',' << num(r.setting.rate1) << ','
            << num(r.setting.rate2) << ',' << to_string(r.setting.family) << ',' << r.test << ',' << r.completed << ','
            << survcomp::detail::fixed(r.rate()) << ',' << survcomp::detail::fixed(r.se()) << ',' << row.rank << ','
            << (row.null ? 1 : 0) << ',' << (band ? survcomp::detail::fixed(row.lo) : "NA") << ','
            << (band ? survcomp::detail::fixed(row.hi) : "NA") << ','
            << (band ? (r.rate() >= row.lo && r.rate() <= row.hi ? "1" : "0") : "NA") << '\n';
    }
  }
  return exit_ok;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Two-sample survival tests and simulation harness", "survcomp"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "run tests on a CSV dataset (columns time,event,group)");
  add_common(test, test_args.common, {"csv", "json"});
  add_resampling(test, test_args.resampling);
  test->add_option("data", test_args.data, "dataset CSV ('-' for stdin)")->required();
  test->add_option("--method", test_args.method, "comma-separated tests or 'all' (" + valid_test_list() + ")")
      ->capture_default_str();
  test->add_option("--tau", test_args.tau, "truncation time for RMST and ABC");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "run a simulation grid");
  add_common(sim, sim_args.common, {"csv", "json"});
  add_resampling(sim, sim_args.resampling);
  sim->add_option("--grid", sim_args.grid, "grid manifest (JSON)");
  sim->add_option("--n-rep", sim_args.n_rep, "replications per cell");
  sim_args.filter_opt = sim->add_option("--filter", sim_args.filter, "comma-separated scenario ids to keep");
  sim->add_option("--family", sim_args.family, "censoring family")
      ->check(CLI::IsMember({"uniform", "exponential", "both"}));
  sim->add_option("--method", sim_args.method, "comma-separated tests or 'all'");
  sim->add_option("--resume", sim_args.resume, "checkpoint directory; finished cells found there are reused");
  sim->add_option("--time-budget", sim_args.time_budget, "per-test CPU seconds per cell (0 = unlimited)");
  sim->add_flag("--quiet", sim_args.quiet, "no progress lines");

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "solve for the censoring parameter giving a target censoring rate");
  add_common(cal, cal_args.common, {"csv", "json"});
  cal->add_option("--scenario", cal_args.scenario, "scenario id");
  cal->add_option("--group", cal_args.group, "scenario group (1 or 2)")->capture_default_str();
  cal->add_option("--distribution", cal_args.distribution,
                  "event law, e.g. exponential:0.1, weibull:1.5,30, gompertz:0.2,0.4, lognormal:1.2,1.7");
  cal->add_option("--family", cal_args.family, "censoring family")
      ->required()
      ->check(CLI::IsMember({"uniform", "exponential"}));
  cal->add_option("--rate", cal_args.rate, "target censoring probability")->required();
  cal->add_option("--n-check", cal_args.n_check, "draws for an empirical check (0 = none)");

  Common scen_args;
  auto* scen = app.add_subcommand("scenarios", "export the scenario catalog");
  add_common(scen, scen_args, {"csv", "json"});

  SummarizeArgs sum_args;
  auto* sum = app.add_subcommand("summarize", "rank tests per cell and report null-band violations");
  add_common(sum, sum_args.common, {"text", "csv", "json"});
  sum->add_option("results", sum_args.results, "results file (CSV or JSON)")->required();

  std::vector<const char*> argv{"survcomp"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*test) return cmd_test(test_args, out, err);
    if (*sim) return cmd_simulate(sim_args, out, err);
    if (*cal) return cmd_calibrate(cal_args, out, err);
    if (*scen) return cmd_scenarios(scen_args, out);
    if (*sum) return cmd_summarize(sum_args, out);
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const invalid_input_error& e) {
    err << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const computation_error& e) {
    err << "computation error: " << e.what() << '\n';
    return exit_computation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_data;
  }
  return exit_usage;
}

}  // namespace survcomp::cli
