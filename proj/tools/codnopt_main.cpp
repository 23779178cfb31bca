#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "codnopt/evaluate.hpp"
#include "codnopt/metrics.hpp"
#include "codnopt/moea.hpp"
#include "codnopt/scenario.hpp"
#include "codnopt/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid]
                                : 0.5 * (values[mid - 1] + values[mid]);
}

struct RunFlags {
  std::string scenario;
  std::string algo = "nsga2";
  int pop = 100;
  int gens = 1000;
  std::uint64_t seed = 1;
  std::string out;
  bool no_bess = false;
  int archive = 0;  // 0: follow population size
  double cx_prob = 0.9;
  double cx_eta = 15.0;
  double mut_prob = -1.0;  // negative: default 1/D
  double mut_eta = 20.0;
};

void write_soc_rows(const codnopt::Scenario& scenario, const char* extreme,
                    const codnopt::Evaluation& evaluation, std::ofstream& out) {
  for (std::size_t b = 0; b < scenario.batteries.size(); ++b) {
    const codnopt::BessTrajectory& traj = evaluation.trajectories[b];
    for (std::size_t t = 0; t < traj.energy_kwh.size(); ++t) {
      const bool has_step = t < traj.p_chg_kw.size();
      out << extreme << "," << b << "," << scenario.batteries[b].bus << "," << t
          << "," << fmt(traj.energy_kwh[t]) << "," << fmt(traj.soc[t]) << ","
          << fmt(has_step ? traj.p_chg_kw[t] : 0.0) << ","
          << fmt(has_step ? traj.p_dis_kw[t] : 0.0) << "\n";
    }
  }
}

int cmd_run(const RunFlags& flags) {
  const auto algorithm = codnopt::algorithm_from_name(flags.algo);
  if (!algorithm) {
    std::cerr << "unknown algorithm '" << flags.algo
              << "' (choose nsga2 or spea2)\n";
    return 1;
  }

  codnopt::RunConfig config;
  config.algorithm = *algorithm;
  config.pop_size = flags.pop;
  config.generations = flags.gens;
  config.archive_size = flags.archive > 0 ? flags.archive : flags.pop;
  config.crossover_prob = flags.cx_prob;
  config.crossover_eta = flags.cx_eta;
  if (flags.mut_prob >= 0.0) config.mutation_prob = flags.mut_prob;
  config.mutation_eta = flags.mut_eta;
  config.seed = flags.seed;
  try {
    codnopt::validate_config(config);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  codnopt::Scenario scenario;
  try {
    scenario = codnopt::load_scenario(flags.scenario);
  } catch (const codnopt::ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (flags.no_bess) scenario = scenario.without_batteries();

  const codnopt::RunResult result = codnopt::run(scenario, config);

  try {
    fs::create_directories(flags.out);
    const fs::path out_dir(flags.out);

    codnopt::write_front_csv(out_dir / "front.csv", result.final_front);

    {
      const std::vector<double> hv = codnopt::history_hypervolumes(result.history);
      std::ofstream out(out_dir / "history.csv");
      if (!out) throw std::runtime_error("cannot write history.csv");
      out << "gen,hv,front_size\n";
      for (std::size_t g = 0; g < result.history.size(); ++g) {
        out << g << "," << fmt(hv[g]) << "," << result.history[g].size() << "\n";
      }
    }

    // SOC trajectories at the two front extremes: the flattest-voltage
    // solution and the highest-DER solution (first and last of the f1-sorted
    // front), re-simulated from their genomes.
    const codnopt::Evaluator evaluator{scenario};
    const codnopt::FrontPoint& flat = result.final_front.front();
    const codnopt::FrontPoint& green = result.final_front.back();
    const codnopt::Evaluation flat_eval = evaluator.evaluate(flat.genome);
    const codnopt::Evaluation green_eval = evaluator.evaluate(green.genome);
    {
      std::ofstream out(out_dir / "soc.csv");
      if (!out) throw std::runtime_error("cannot write soc.csv");
      out << "extreme,battery,bus,t,energy_kwh,soc,p_chg_kw,p_dis_kw\n";
      write_soc_rows(scenario, "min_f1", flat_eval, out);
      write_soc_rows(scenario, "min_f2_neg", green_eval, out);
    }

    codnopt::write_stats_json(out_dir / "stats.json",
                              codnopt::voltage_stats(flat_eval));

    ordered_json manifest;
    manifest["scenario"] = flags.scenario;
    manifest["config"] = {
        {"algorithm", codnopt::algorithm_name(config.algorithm)},
        {"pop_size", config.pop_size},
        {"generations", config.generations},
        {"archive_size", config.archive_size},
        {"crossover_prob", config.crossover_prob},
        {"crossover_eta", config.crossover_eta},
        {"mutation_prob",
         config.mutation_prob
             ? *config.mutation_prob
             : (evaluator.genome_length() > 0
                    ? 1.0 / static_cast<double>(evaluator.genome_length())
                    : 0.0)},
        {"mutation_eta", config.mutation_eta},
        {"seed", config.seed},
        {"no_bess", flags.no_bess},
    };
    manifest["battery_count"] = scenario.batteries.size();
    manifest["artifacts"] = {{"front_csv", "front.csv"},
                             {"history_csv", "history.csv"},
                             {"soc_csv", "soc.csv"},
                             {"stats_json", "stats.json"}};
    manifest["wall_time_s"] = result.wall_time_s;
    manifest["version"] = codnopt::kVersion;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << manifest.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

struct GroupData {
  std::string name;
  std::string algorithm;
  std::vector<std::string> run_names;
  std::vector<std::vector<codnopt::FrontPoint>> fronts;  // feasible points
};

// A --runs argument is one group: either a single run directory (holding
// manifest.json) or a directory whose immediate subdirectories are runs.
std::optional<GroupData> collect_group(const fs::path& dir, std::string* error) {
  GroupData group;
  group.name = dir.filename().string();
  if (group.name.empty()) group.name = dir.parent_path().filename().string();

  std::vector<fs::path> run_dirs;
  if (fs::exists(dir / "manifest.json")) {
    run_dirs.push_back(dir);
  } else if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
        run_dirs.push_back(entry.path());
      }
    }
    std::sort(run_dirs.begin(), run_dirs.end());
  }
  if (run_dirs.empty()) {
    *error = "no run manifests under " + dir.string();
    return std::nullopt;
  }

  for (const fs::path& run_dir : run_dirs) {
    std::ifstream in(run_dir / "manifest.json");
    ordered_json manifest;
    try {
      in >> manifest;
    } catch (const std::exception&) {
      *error = "unreadable manifest in " + run_dir.string();
      return std::nullopt;
    }
    const std::string algo = manifest.at("config").at("algorithm").get<std::string>();
    if (group.algorithm.empty()) {
      group.algorithm = algo;
    } else if (group.algorithm != algo) {
      *error = "group " + group.name + " mixes algorithms " + group.algorithm +
               " and " + algo;
      group.algorithm = "mixed";
      return std::nullopt;
    }
    const fs::path front_path =
        run_dir / manifest.at("artifacts").at("front_csv").get<std::string>();
    if (!fs::exists(front_path)) {
      *error = "missing artifact " + front_path.string();
      return std::nullopt;
    }
    std::vector<codnopt::FrontPoint> front = codnopt::read_front_csv(front_path);
    std::erase_if(front, [](const codnopt::FrontPoint& p) { return p.cv != 0.0; });
    group.fronts.push_back(std::move(front));
    group.run_names.push_back(run_dir.filename().string());
  }
  return group;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out) {
  std::vector<GroupData> groups;
  for (const std::string& dir : run_dirs) {
    std::string error;
    auto group = collect_group(fs::path(dir), &error);
    if (!group) {
      std::cerr << error << "\n";
      // Mixed algorithms are a usage error; everything else is a missing
      // artifact.
      return error.find("mixes algorithms") != std::string::npos ? 1 : 2;
    }
    groups.push_back(std::move(*group));
  }

  std::vector<std::vector<codnopt::FrontPoint>> all_fronts;
  for (const GroupData& group : groups) {
    for (const auto& front : group.fronts) all_fronts.push_back(front);
  }
  const auto norm = codnopt::ObjectiveNormalization::over(all_fronts);

  try {
    fs::create_directories(out);
    const fs::path out_dir(out);

    std::ofstream hv_out(out_dir / "hv.csv");
    if (!hv_out) throw std::runtime_error("cannot write hv.csv");
    hv_out << "group,run,hv\n";

    ordered_json comparison;
    comparison["groups"] = ordered_json::array();
    std::string dominant;
    double dominant_hv = -std::numeric_limits<double>::infinity();
    for (const GroupData& group : groups) {
      std::vector<double> hvs;
      for (std::size_t r = 0; r < group.fronts.size(); ++r) {
        std::vector<std::pair<double, double>> scaled;
        for (const codnopt::FrontPoint& p : group.fronts[r]) {
          scaled.push_back(norm.apply(p.f1, p.f2_neg));
        }
        const double hv = codnopt::hypervolume_2d(
            scaled, codnopt::ObjectiveNormalization::kRef);
        hvs.push_back(hv);
        hv_out << group.name << "," << group.run_names[r] << "," << fmt(hv)
               << "\n";
      }

      fs::create_directories(out_dir / group.name);
      codnopt::write_eaf_csv(out_dir / group.name / "eaf.csv",
                             codnopt::attainment_surfaces(group.fronts));

      const double med = median_of(hvs);
      comparison["groups"].push_back({{"name", group.name},
                                      {"algorithm", group.algorithm},
                                      {"runs", group.fronts.size()},
                                      {"median_hv", med}});
      if (med > dominant_hv) {
        dominant_hv = med;
        dominant = group.name;
      }
    }
    comparison["hv_dominant"] = dominant;
    std::ofstream cmp_out(out_dir / "comparison.json");
    if (!cmp_out) throw std::runtime_error("cannot write comparison.json");
    cmp_out << comparison.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_oracle(const std::string& scenario_path, int levels,
               const std::string& front_path, double eps) {
  codnopt::Scenario scenario;
  std::vector<codnopt::FrontPoint> ea_front;
  try {
    scenario = codnopt::load_scenario(scenario_path);
    ea_front = codnopt::read_front_csv(front_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  std::erase_if(ea_front,
                [](const codnopt::FrontPoint& p) { return p.cv != 0.0; });

  std::vector<codnopt::FrontPoint> reference;
  try {
    reference = codnopt::oracle_front(scenario, levels);
  } catch (const codnopt::OracleTooLarge& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  if (reference.empty()) {
    std::cout << "oracle front is empty (no feasible grid point); nothing to cover\n";
    return 0;
  }

  const auto norm = codnopt::ObjectiveNormalization::over({reference, ea_front});
  double worst_gap = 0.0;
  std::size_t uncovered = 0;
  for (const codnopt::FrontPoint& p : reference) {
    const auto pn = norm.apply(p.f1, p.f2_neg);
    double gap = std::numeric_limits<double>::infinity();
    for (const codnopt::FrontPoint& q : ea_front) {
      const auto qn = norm.apply(q.f1, q.f2_neg);
      gap = std::min(gap, std::max({qn.first - pn.first, qn.second - pn.second, 0.0}));
    }
    if (gap > eps) {
      ++uncovered;
      std::cout << "uncovered oracle point f1=" << fmt(p.f1)
                << " f2_neg=" << fmt(p.f2_neg) << " gap=" << fmt(gap) << "\n";
    }
    worst_gap = std::max(worst_gap, gap);
  }
  std::cout << "oracle points: " << reference.size() << ", uncovered: " << uncovered
            << ", worst gap: " << fmt(worst_gap) << " (eps " << fmt(eps) << ")\n";
  return uncovered == 0 ? 0 : 1;
}

int cmd_gen(const codnopt::SynthParams& params, const std::string& out) {
  codnopt::Scenario scenario;
  try {
    scenario = codnopt::generate_synthetic(params);
  } catch (const codnopt::ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    codnopt::save_scenario(scenario, out);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community-battery scheduling on radial feeders: two-objective "
               "evolutionary runs, comparisons, and oracles"};
  app.set_version_flag("--version", codnopt::kVersion);
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Optimize one scenario");
  run_cmd->add_option("--scenario", run_flags.scenario, "Scenario JSON file")
      ->required();
  run_cmd->add_option("--algo", run_flags.algo, "nsga2 or spea2");
  run_cmd->add_option("--pop", run_flags.pop, "Population size");
  run_cmd->add_option("--gens", run_flags.gens, "Generations");
  run_cmd->add_option("--seed", run_flags.seed, "RNG seed");
  run_cmd->add_option("--out", run_flags.out, "Output directory")->required();
  run_cmd->add_flag("--no-bess", run_flags.no_bess,
                    "Strip all batteries from the scenario");
  run_cmd->add_option("--archive", run_flags.archive,
                      "SPEA-2 archive size (default: population size)");
  run_cmd->add_option("--cx-prob", run_flags.cx_prob, "Crossover probability");
  run_cmd->add_option("--cx-eta", run_flags.cx_eta, "Crossover distribution index");
  run_cmd->add_option("--mut-prob", run_flags.mut_prob,
                      "Per-gene mutation probability (default: 1/genes)");
  run_cmd->add_option("--mut-eta", run_flags.mut_eta, "Mutation distribution index");

  std::vector<std::string> compare_runs;
  std::string compare_out;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Summarize groups of finished runs");
  compare_cmd
      ->add_option("--runs", compare_runs,
                   "Group directories (a run, or a directory of runs)")
      ->required()
      ->expected(-1);
  compare_cmd->add_option("--out", compare_out, "Output directory")->required();

  std::string oracle_scenario;
  int oracle_levels = 5;
  std::string oracle_front_path;
  double oracle_eps = 0.02;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Check a front against exhaustive grid enumeration");
  oracle_cmd->add_option("--scenario", oracle_scenario, "Scenario JSON file")
      ->required();
  oracle_cmd->add_option("--levels", oracle_levels, "Grid levels per gene");
  oracle_cmd->add_option("--front", oracle_front_path, "Front CSV to check")
      ->required();
  oracle_cmd->add_option("--eps", oracle_eps,
                         "Normalized coverage tolerance (default 0.02)");

  codnopt::SynthParams gen_params;
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario");
  gen_cmd->add_option("--buses", gen_params.n_buses, "Bus count")->required();
  gen_cmd->add_option("--prosumer-ratio", gen_params.prosumer_ratio,
                      "Fraction of non-root buses with PV");
  gen_cmd->add_option("--peak-p", gen_params.peak_load_p_kw,
                      "Coincident peak active load, kW");
  gen_cmd->add_option("--peak-q", gen_params.peak_load_q_kvar,
                      "Coincident peak reactive load, kvar");
  gen_cmd->add_option("--batteries", gen_params.n_batteries, "Battery count");
  gen_cmd->add_option("--seed", gen_params.seed, "RNG seed");
  gen_cmd->add_option("--out", gen_out, "Output scenario path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  if (run_cmd->parsed()) return cmd_run(run_flags);
  if (compare_cmd->parsed()) return cmd_compare(compare_runs, compare_out);
  if (oracle_cmd->parsed()) {
    return cmd_oracle(oracle_scenario, oracle_levels, oracle_front_path,
                      oracle_eps);
  }
  if (gen_cmd->parsed()) return cmd_gen(gen_params, gen_out);
  return 1;
}
