#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "survcomp/core/errors.hpp"
#include "survcomp/harness/grid.hpp"
#include "survcomp/harness/results_io.hpp"
#include "survcomp/harness/simulation.hpp"
#include "survcomp/harness/summary.hpp"
#include "survcomp/wlrt/logrank.hpp"

using namespace survcomp;

namespace {

CellOptions quick_options(std::vector<std::string> tests = {"LR", "PP", "RMST", "mdir2"}) {
  CellOptions o;
  o.tests = std::move(tests);
  o.n_rep = 40;
  o.seed = 11;
  o.battery.mdir_mode = MdirMode::asymptotic;
  o.battery.konp_perm = 50;
  o.battery.mdir_perm = 50;
  o.battery.ts_boot = 30;
  o.battery.abc_boot = 30;
  o.battery.mc_draws = 2000;
  return o;
}

SimulationResult make_result(std::string scenario, std::string test, std::size_t rejections, std::size_t completed) {
  SimulationResult r;
  r.scenario = std::move(scenario);
  r.setting = {50, 50, 0.2, 0.2, CensoringFamily::uniform};
  r.test = std::move(test);
  r.n_rep = completed;
  r.attempted = completed;
  r.completed = completed;
  r.rejections = rejections;
  return r;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("cell results do not depend on the thread count") {
  const CellGenerator gen(find_scenario("C3"), {30, 70, 0.2, 0.4, CensoringFamily::exponential});
  CellOptions one = quick_options();
  CellOptions four = one;
  four.threads = 4;
  const auto a = run_cell(gen, one);
  const auto b = run_cell(gen, four);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].test == one.tests[i]);
    CHECK(a[i].rejections == b[i].rejections);
    CHECK(a[i].completed == b[i].completed);
    CHECK(a[i].attempted == a[i].n_rep);
  }
}

TEST_CASE("every test of a replication sees the regenerated dataset") {
  const CellGenerator gen(find_scenario("PH3"), {25, 25, 0.2, 0.2, CensoringFamily::uniform});
  CellOptions opt = quick_options({"LR"});
  opt.n_rep = 60;
  const auto res = run_cell(gen, opt);
  std::size_t manual = 0;
  std::vector<std::uint64_t> hashes;
  for (std::size_t rep = 0; rep < opt.n_rep; ++rep) {
    const SurvivalDataset d = replication_dataset(gen, opt.seed, rep);
    hashes.push_back(dataset_hash(d));
    if (logrank_test(d).p_value <= opt.alpha) ++manual;
  }
  CHECK(res[0].rejections == manual);
  CHECK(dataset_hash(replication_dataset(gen, opt.seed, 7)) == hashes[7]);
  std::sort(hashes.begin(), hashes.end());
  CHECK(std::adjacent_find(hashes.begin(), hashes.end()) == hashes.end());
}

TEST_CASE("a single replication gives a rate of zero or one") {
  CellOptions opt = quick_options(test_names());
  opt.n_rep = 1;
  const auto res = run_cell(find_scenario("C6"), {50, 50, 0.0, 0.0, CensoringFamily::uniform}, opt);
  REQUIRE(res.size() == 10);
  for (const auto& r : res) {
    INFO(r.test);
    CHECK(r.attempted == 1);
    if (r.completed == 1) CHECK((r.rate() == 0.0 || r.rate() == 1.0));
  }
}

TEST_CASE("cell options are validated") {
  CellOptions opt = quick_options({"LR", "bogus"});
  CHECK_THROWS_AS(run_cell(find_scenario("PH1"), {20, 30, 0, 0, CensoringFamily::uniform}, opt), invalid_input_error);
  opt = quick_options();
  opt.n_rep = 0;
  CHECK_THROWS_AS(run_cell(find_scenario("PH1"), {20, 30, 0, 0, CensoringFamily::uniform}, opt), invalid_input_error);
  CHECK(parse_test_list("all") == test_names());
  CHECK(parse_test_list("TS,LR") == std::vector<std::string>{"TS", "LR"});
  CHECK_THROWS_AS(parse_test_list("LR,,PP"), invalid_input_error);
}

TEST_CASE("results tables round trip through CSV and JSON") {
  GridConfig g;
  g.scenarios = {"Null2", "PH4"};
  g.families = {CensoringFamily::exponential};
  g.settings = {{20, 30, 0.2, 0.4, CensoringFamily::uniform}};
  g.cell = quick_options();
  g.cell.n_rep = 15;
  const auto res = run_grid(g);
  REQUIRE(res.size() == 8);
  CHECK(res[4].scenario == "PH4");
  CHECK(res[0].setting.family == CensoringFamily::exponential);

  std::ostringstream csv;
  write_results_csv(csv, res);
  std::istringstream in(csv.str());
  const auto back = read_results_csv(in);
  REQUIRE(back.size() == res.size());
  std::ostringstream again;
  write_results_csv(again, back);
  CHECK(again.str() == csv.str());

  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto j = result_from_json(result_json(res[i]));
    CHECK(j.setting == res[i].setting);
    CHECK(j.rejections == res[i].rejections);
    CHECK(j.test == res[i].test);
  }
  std::istringstream bad("# format=survcomp-results/1\nscenario,n1\n");
  CHECK_THROWS_AS(read_results_csv(bad), invalid_input_error);
}

TEST_CASE("checkpointed grids resume to identical output") {
  GridConfig g;
  g.scenarios = {"Null1", "C4"};
  g.families = {CensoringFamily::uniform};
  g.settings = {{25, 25, 0.2, 0.2, CensoringFamily::uniform}, {20, 30, 0.0, 0.0, CensoringFamily::uniform}};
  g.cell = quick_options({"LR", "RMST"});
  g.cell.n_rep = 10;
  const auto dir = fresh_dir("survcomp_ckpt_test");
  GridRunOptions run;
  run.checkpoint_dir = dir;
  const auto first = run_grid(g, run);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".json";
  CHECK(files == 4);

  // Drop one cell and corrupt another; both are recomputed.
  const auto cell = detail::checkpoint_path(dir, "C4", g.cells()[3].second);
  REQUIRE(std::filesystem::exists(cell));
  std::filesystem::remove(cell);
  std::ofstream(detail::checkpoint_path(dir, "Null1", g.cells()[0].second)) << "{ not json";
  std::size_t calls = 0;
  run.progress = [&](std::size_t, std::size_t total, const std::string&) {
    ++calls;
    CHECK(total == 4);
  };
  const auto second = run_grid(g, run);
  CHECK(calls == 4);
  std::ostringstream a, b;
  write_results_csv(a, first);
  write_results_csv(b, second);
  CHECK(a.str() == b.str());
  CHECK(a.str() == [&] {
    std::ostringstream c;
    write_results_csv(c, run_grid(g));
    return c.str();
  }());

  // A different manifest ignores stale checkpoints.
  GridConfig h = g;
  h.cell.seed = 12;
  std::ostringstream c;
  write_results_csv(c, run_grid(h, run));
  std::ostringstream d;
  write_results_csv(d, run_grid(h));
  CHECK(c.str() == d.str());
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario filters can empty the grid") {
  GridConfig g = grid_from_json(nlohmann::json::object());
  CHECK(g.scenarios.size() == 20);
  CHECK(g.cells().size() == 800);
  CHECK(filter_scenarios(g, {"NPH4", "Null1"}).scenarios == std::vector<std::string>{"Null1", "NPH4a"});
  const GridConfig empty = filter_scenarios(g, {});
  CHECK(empty.cells().empty());
  CHECK(run_grid(empty).empty());
  std::ostringstream out;
  write_results_csv(out, {});
  CHECK(out.str() == std::string("# format=survcomp-results/1\n") + results_csv_header() + "\n");
}

TEST_CASE("grid manifests parse and reject bad input") {
  const auto j = nlohmann::json::parse(R"({
    "format": "survcomp-grid/1", "scenarios": ["PH1", "C2"], "families": ["exponential"],
    "settings": [{"n1": 10, "n2": 12, "rate1": 0.2, "rate2": 0.4}], "tests": ["LR", "KONP"],
    "n_rep": 7, "alpha": 0.1, "seed": 3, "battery": {"konp_perm": 99, "mdir_mode": "asymptotic"}})");
  const GridConfig g = grid_from_json(j);
  CHECK(g.cells().size() == 2);
  CHECK(g.cells()[1].second.id() == "n10-12_c0.2-0.4_exponential");
  CHECK(g.cell.tests == std::vector<std::string>{"LR", "KONP"});
  CHECK(g.cell.battery.konp_perm == 99);
  CHECK(g.cell.battery.mdir_mode == MdirMode::asymptotic);
  CHECK(grid_json(grid_from_json(grid_json(g))) == grid_json(g));

  for (const char* bad : {R"({"format": "other/2"})", R"({"scenarios": ["PH9"]})", R"({"tests": "LR,XX"})",
                          R"({"n_rep": 0})", R"({"alpha": 1.5})", R"({"families": ["weekly"]})",
                          R"({"settings": [{"n1": 10}]})", R"({"battery": {"mdir_mode": "fast"}})",
                          R"({"n_rep": "many"})"}) {
    INFO(bad);
    CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(bad)), invalid_input_error);
  }
  CHECK_THROWS_AS(read_grid_file("/nonexistent/grid.json"), invalid_input_error);
}

TEST_CASE("rankings share ranks on ties and order by rate") {
  std::vector<SimulationResult> res{make_result("PH1", "LR", 80, 100), make_result("PH1", "PP", 90, 100),
                                    make_result("PH1", "TS", 80, 100), make_result("PH1", "MC", 10, 100),
                                    make_result("C2", "LR", 10, 100), make_result("C2", "PP", 20, 100)};
  res.push_back(make_result("C2", "TS", 0, 0));
  const auto cells = rank_cells(res);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].ranked[0].first == "PP");
  CHECK(cells[0].ranks == std::vector<std::size_t>{1, 2, 2, 4});
  CHECK(cells[0].ranked[1].first == "LR");
  CHECK(cells[1].ranked.size() == 2);
  const auto mr = mean_ranks(cells);
  CHECK(mr.front().first == "PP");
  CHECK(mr.front().second == 1.0);
}

TEST_CASE("null band flags only null scenarios outside the interval") {
  const auto [lo, hi] = null_band(0.05, 1000);
  CHECK_THAT(hi - 0.05, Catch::Matchers::WithinAbs(1.96 * std::sqrt(0.05 * 0.95 / 1000), 1e-15));
  CHECK_THAT(lo + hi, Catch::Matchers::WithinAbs(0.1, 1e-15));
  const std::vector<SimulationResult> res{make_result("Null1", "LR", 50, 1000), make_result("Null1", "PP", 80, 1000),
                                          make_result("Null2", "TS", 30, 1000), make_result("PH1", "LR", 900, 1000)};
  const auto v = null_band_violations(res, 0.05);
  REQUIRE(v.size() == 2);
  CHECK(v[0].result->test == "PP");
  CHECK(v[1].result->test == "TS");
  const std::string text = summary_text(res, 0.05);
  CHECK(text.find("Null1") != std::string::npos);
  CHECK(text.find("PH1") != std::string::npos);
}
