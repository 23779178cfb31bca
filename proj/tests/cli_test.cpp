#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "codnopt/metrics.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CODNOPT_CLI_PATH;
const std::string kScenarioDir = CODNOPT_SCENARIO_DIR;
const std::string kTiny = kScenarioDir + "/tiny2.json";

// Scratch tree for everything this file writes; wiped once at first use.
const fs::path& scratch() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "codnopt_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

nlohmann::json read_json(const fs::path& path) {
  return nlohmann::json::parse(slurp(path));
}

std::string quick_run(const std::string& name, const std::string& extra) {
  const fs::path out = scratch() / name;
  const int code = run_cli("run --scenario " + kTiny + " --pop 8 --gens 4 " +
                           extra + " --out " + out.string());
  REQUIRE(code == 0);
  return out.string();
}

}  // namespace

TEST_CASE("run writes the full artifact set") {
  const fs::path out = scratch() / "happy";
  CHECK(run_cli("run --scenario " + kTiny + " --pop 8 --gens 4 --seed 1 --out " +
                out.string()) == 0);
  for (const char* name :
       {"front.csv", "history.csv", "soc.csv", "stats.json", "manifest.json"}) {
    CAPTURE(name);
    CHECK(fs::exists(out / name));
  }

  const auto front = codnopt::read_front_csv(out / "front.csv");
  REQUIRE(!front.empty());
  for (const auto& p : front) CHECK(p.cv == 0.0);
  for (std::size_t i = 1; i < front.size(); ++i) {
    CHECK(front[i].f1 > front[i - 1].f1);
  }

  const auto history = codnopt::read_csv(out / "history.csv");
  REQUIRE(history.size() == 1 + 4 + 1);  // header + initial + one per generation
  CHECK(history[0] == std::vector<std::string>{"gen", "hv", "front_size"});
  CHECK(history[1][0] == "0");
  CHECK(history.back()[0] == "4");

  const auto soc = codnopt::read_csv(out / "soc.csv");
  CHECK(soc[0] == std::vector<std::string>{"extreme", "battery", "bus", "t",
                                           "energy_kwh", "soc", "p_chg_kw",
                                           "p_dis_kw"});
  // One battery, three states, two labelled extremes.
  CHECK(soc.size() == 1 + 2 * 3);

  const auto stats = read_json(out / "stats.json");
  CHECK(stats.at("mean").get<double>() > 0.9);
  CHECK(stats.at("mean").get<double>() < 1.1);
  CHECK(stats.contains("std"));
  CHECK(stats.contains("median"));

  const auto manifest = read_json(out / "manifest.json");
  CHECK(manifest.at("config").at("algorithm") == "nsga2");
  CHECK(manifest.at("config").at("pop_size") == 8);
  CHECK(manifest.at("config").at("generations") == 4);
  CHECK(manifest.at("config").at("seed") == 1);
  CHECK(manifest.at("battery_count") == 1);
  CHECK(manifest.at("wall_time_s").get<double>() > 0.0);
}

TEST_CASE("run rejects bad invocations with exit code 1") {
  const std::string out = (scratch() / "reject").string();
  CHECK(run_cli("run --scenario " + kTiny + " --algo mopso --out " + out) == 1);
  CHECK(run_cli("run --scenario " + kTiny + " --pop 7 --out " + out) == 1);
  CHECK(run_cli("run --scenario " + kTiny + " --gens 0 --out " + out) == 1);
  CHECK(run_cli("run --out " + out) == 1);                  // missing --scenario
  CHECK(run_cli("run --scenario " + kTiny) == 1);           // missing --out
  CHECK(run_cli("run --scenario " + kTiny + " --out " + out + " --bogus") == 1);
  CHECK(run_cli("") == 1);                                  // no subcommand
}

TEST_CASE("run reports unusable scenarios with exit code 2") {
  const std::string out = (scratch() / "noscenario").string();
  CHECK(run_cli("run --scenario /no/such/file.json --out " + out) == 2);

  const fs::path broken = scratch() / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run_cli("run --scenario " + broken.string() + " --out " + out) == 2);
}

TEST_CASE("stripping batteries empties the storage outputs") {
  const fs::path out = fs::path(quick_run("nobess", "--seed 1 --no-bess"));
  const auto manifest = read_json(out / "manifest.json");
  CHECK(manifest.at("battery_count") == 0);
  CHECK(manifest.at("config").at("no_bess") == true);
  const auto soc = codnopt::read_csv(out / "soc.csv");
  CHECK(soc.size() == 1);  // header only
}

TEST_CASE("identical seeds give byte-identical artifacts") {
  const fs::path a = fs::path(quick_run("det_a", "--seed 7"));
  const fs::path b = fs::path(quick_run("det_b", "--seed 7"));
  const fs::path c = fs::path(quick_run("det_c", "--seed 8"));
  for (const char* name : {"front.csv", "history.csv", "soc.csv", "stats.json"}) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(slurp(a / "front.csv") != slurp(c / "front.csv"));
}

TEST_CASE("the spea2 algorithm is selectable and recorded") {
  const fs::path out = fs::path(quick_run("spea", "--seed 1 --algo spea2"));
  const auto manifest = read_json(out / "manifest.json");
  CHECK(manifest.at("config").at("algorithm") == "spea2");
}

TEST_CASE("compare summarizes groups and crowns a winner") {
  const fs::path group_a = scratch() / "cmp" / "alpha";
  const fs::path group_b = scratch() / "cmp" / "beta";
  for (int seed : {1, 2, 3}) {
    REQUIRE(run_cli("run --scenario " + kTiny + " --pop 8 --gens 4 --seed " +
                    std::to_string(seed) + " --out " +
                    (group_a / ("s" + std::to_string(seed))).string()) == 0);
    REQUIRE(run_cli("run --scenario " + kTiny +
                    " --pop 8 --gens 4 --algo spea2 --seed " +
                    std::to_string(seed) + " --out " +
                    (group_b / ("s" + std::to_string(seed))).string()) == 0);
  }

  const fs::path out = scratch() / "cmp" / "report";
  CHECK(run_cli("compare --runs " + group_a.string() + " " + group_b.string() +
                " --out " + out.string()) == 0);

  const auto hv = codnopt::read_csv(out / "hv.csv");
  CHECK(hv[0] == std::vector<std::string>{"group", "run", "hv"});
  CHECK(hv.size() == 1 + 6);  // three runs per group

  const auto comparison = read_json(out / "comparison.json");
  REQUIRE(comparison.at("groups").size() == 2);
  for (const auto& group : comparison.at("groups")) {
    CHECK(group.at("runs") == 3);
    CHECK(group.at("median_hv").get<double>() >= 0.0);
  }
  const std::string dominant = comparison.at("hv_dominant");
  CHECK((dominant == "alpha" || dominant == "beta"));

  for (const char* group : {"alpha", "beta"}) {
    const auto eaf = codnopt::read_eaf_csv(out / group / "eaf.csv");
    CHECK(!eaf.best.empty());
  }
}

TEST_CASE("compare accepts a single run directory as a group") {
  const fs::path run_dir = fs::path(quick_run("solo", "--seed 4"));
  const fs::path out = scratch() / "solo_report";
  CHECK(run_cli("compare --runs " + run_dir.string() + " --out " + out.string()) ==
        0);
  const auto hv = codnopt::read_csv(out / "hv.csv");
  CHECK(hv.size() == 2);
}

TEST_CASE("compare refuses groups that mix algorithms") {
  const fs::path mixed = scratch() / "mixed";
  REQUIRE(run_cli("run --scenario " + kTiny + " --pop 8 --gens 2 --out " +
                  (mixed / "one").string()) == 0);
  REQUIRE(run_cli("run --scenario " + kTiny +
                  " --pop 8 --gens 2 --algo spea2 --out " +
                  (mixed / "two").string()) == 0);
  CHECK(run_cli("compare --runs " + mixed.string() + " --out " +
                (scratch() / "mixed_report").string()) == 1);
}

TEST_CASE("compare fails fast on missing artifacts") {
  CHECK(run_cli("compare --runs /no/such/dir --out " +
                (scratch() / "missing_report").string()) == 2);

  // A manifest that points at a deleted front file.
  const fs::path crippled = fs::path(quick_run("crippled", "--seed 5"));
  fs::remove(crippled / "front.csv");
  CHECK(run_cli("compare --runs " + crippled.string() + " --out " +
                (scratch() / "crippled_report").string()) == 2);
}

TEST_CASE("a serious run passes the exhaustive grid check") {
  const fs::path out = scratch() / "oracle_run";
  REQUIRE(run_cli("run --scenario " + kTiny +
                  " --pop 20 --gens 50 --seed 1 --out " + out.string()) == 0);
  CHECK(run_cli("oracle --scenario " + kTiny + " --levels 5 --front " +
                (out / "front.csv").string()) == 0);
}

TEST_CASE("a token front fails the exhaustive grid check") {
  const fs::path front = scratch() / "weak_front.csv";
  std::ofstream(front) << "f1,f2_neg,cv\n10,0,0\n";
  CHECK(run_cli("oracle --scenario " + kTiny + " --levels 5 --front " +
                front.string()) == 1);
}

TEST_CASE("oracle grids beyond the budget exit with code 3") {
  const fs::path out = scratch() / "oracle_budget";
  REQUIRE(run_cli("run --scenario " + kTiny + " --pop 8 --gens 2 --out " +
                  out.string()) == 0);
  CHECK(run_cli("oracle --scenario " + kTiny + " --levels 100 --front " +
                (out / "front.csv").string()) == 3);
}

TEST_CASE("oracle propagates unreadable inputs as exit code 2") {
  CHECK(run_cli("oracle --scenario " + kTiny + " --front /no/such/front.csv") ==
        2);
}

TEST_CASE("gen produces a loadable deterministic scenario") {
  const fs::path a = scratch() / "gen_a.json";
  const fs::path b = scratch() / "gen_b.json";
  const std::string flags =
      "gen --buses 8 --prosumer-ratio 0.5 --peak-p 400 --peak-q 170 "
      "--batteries 2 --seed 11 --out ";
  CHECK(run_cli(flags + a.string()) == 0);
  CHECK(run_cli(flags + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));

  // The generated file feeds straight back into run.
  const fs::path out = scratch() / "gen_run";
  CHECK(run_cli("run --scenario " + a.string() + " --pop 8 --gens 2 --out " +
                out.string()) == 0);
}

TEST_CASE("gen rejects out-of-range parameters with exit code 1") {
  const std::string out = (scratch() / "gen_bad.json").string();
  CHECK(run_cli("gen --buses 1 --out " + out) == 1);
  CHECK(run_cli("gen --buses 8 --prosumer-ratio 1.5 --out " + out) == 1);
  CHECK(run_cli("gen --buses 8 --peak-p -5 --out " + out) == 1);
  CHECK(run_cli("gen --buses 8 --batteries 9 --out " + out) == 1);
}

TEST_CASE("gen reports unwritable destinations with exit code 2") {
  CHECK(run_cli("gen --buses 8 --out /no/such/dir/scenario.json") == 2);
}

TEST_CASE("version and help are available") {
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("run --help") == 0);
}
