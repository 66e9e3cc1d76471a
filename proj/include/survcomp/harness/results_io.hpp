#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/harness/simulation.hpp"

namespace survcomp {

inline constexpr const char* results_format = "survcomp-results/1";

namespace detail {

inline std::string fixed(double x, int digits = 6) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string shortest(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace detail

inline const char* results_csv_header() {
  return "scenario,n1,n2,rate1,rate2,family,test,n_rep,attempted,completed,rejections,failures,rate,se";
}

/// Long-format results table, one row per (cell, test). The first line is a
/// `#` comment carrying the format version. Wall time is deliberately left
/// out so that identical runs give identical files.
inline void write_results_csv(std::ostream& out, const std::vector<SimulationResult>& results) {
  out << "# format=" << results_format << '\n' << results_csv_header() << '\n';
  for (const auto& r : results) {
    out << r.scenario << ',' << r.setting.n1 << ',' << r.setting.n2 << ',' << detail::shortest(r.setting.rate1) << ','
        << detail::shortest(r.setting.rate2) << ',' << to_string(r.setting.family) << ',' << r.test << ',' << r.n_rep
        << ',' << r.attempted << ',' << r.completed << ',' << r.rejections << ',' << r.failures << ','
        << detail::fixed(r.rate()) << ',' << detail::fixed(r.se()) << '\n';
  }
}

inline std::vector<SimulationResult> read_results_csv(std::istream& in) {
  std::vector<SimulationResult> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!header) {
      if (view != results_csv_header()) {
        throw invalid_input_error("line " + std::to_string(line_no) + ": unexpected results header");
      }
      header = true;
      continue;
    }
    const auto f = detail::split_commas(view);
    if (f.size() != 14) throw invalid_input_error("line " + std::to_string(line_no) + ": expected 14 fields");
    auto count = [&](std::size_t k) {
      return static_cast<std::size_t>(detail::parse_double(f[k], line_no, "count"));
    };
    SimulationResult r;
    r.scenario = std::string(f[0]);
    r.setting.n1 = count(1);
    r.setting.n2 = count(2);
    r.setting.rate1 = detail::parse_double(f[3], line_no, "rate1");
    r.setting.rate2 = detail::parse_double(f[4], line_no, "rate2");
    r.setting.family = parse_censoring_family(std::string(f[5]));
    r.test = std::string(f[6]);
    r.n_rep = count(7);
    r.attempted = count(8);
    r.completed = count(9);
    r.rejections = count(10);
    r.failures = count(11);
    out.push_back(std::move(r));
  }
  if (!header) throw invalid_input_error("results file has no header");
  return out;
}

inline std::vector<SimulationResult> read_results_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error("cannot open '" + path + "'");
  return read_results_csv(in);
}

inline nlohmann::json result_json(const SimulationResult& r, bool with_timing = true) {
  nlohmann::json j{{"scenario", r.scenario},
                   {"n1", r.setting.n1},
                   {"n2", r.setting.n2},
                   {"rate1", r.setting.rate1},
                   {"rate2", r.setting.rate2},
                   {"family", to_string(r.setting.family)},
                   {"test", r.test},
                   {"n_rep", r.n_rep},
                   {"attempted", r.attempted},
                   {"completed", r.completed},
                   {"rejections", r.rejections},
                   {"failures", r.failures}};
  if (r.completed > 0) {
    j["rate"] = r.rate();
    j["se"] = r.se();
  } else {
    j["rate"] = nullptr;
    j["se"] = nullptr;
  }
  if (with_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

inline SimulationResult result_from_json(const nlohmann::json& j) {
  SimulationResult r;
  r.scenario = j.at("scenario").get<std::string>();
  r.setting.n1 = j.at("n1").get<std::size_t>();
  r.setting.n2 = j.at("n2").get<std::size_t>();
  r.setting.rate1 = j.at("rate1").get<double>();
  r.setting.rate2 = j.at("rate2").get<double>();
  r.setting.family = parse_censoring_family(j.at("family").get<std::string>());
  r.test = j.at("test").get<std::string>();
  r.n_rep = j.at("n_rep").get<std::size_t>();
  r.attempted = j.at("attempted").get<std::size_t>();
  r.completed = j.at("completed").get<std::size_t>();
  r.rejections = j.at("rejections").get<std::size_t>();
  r.failures = j.at("failures").get<std::size_t>();
  r.wall_seconds = j.value("wall_seconds", 0.0);
  return r;
}

inline nlohmann::json results_json(const std::vector<SimulationResult>& results) {
  nlohmann::json j;
  j["format"] = results_format;
  j["results"] = nlohmann::json::array();
  for (const auto& r : results) j["results"].push_back(result_json(r));
  return j;
}

}  // namespace survcomp
