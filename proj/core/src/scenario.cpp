#include "codnopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "codnopt/rng.hpp"
#include "json.hpp"

namespace codnopt {

namespace {

using nlohmann::ordered_json;

std::string asset_label(const char* kind, std::size_t index) {
  return std::string(kind) + " " + std::to_string(index);
}

// Largest one-hour total demand across the horizon, the reference for grid
// limit defaults and per-unit base choices.
double coincident_peak(const std::vector<std::vector<double>>& load,
                       int horizon) {
  double peak = 0.0;
  for (int t = 0; t < horizon; ++t) {
    double total = 0.0;
    for (const auto& series : load) total += series[static_cast<std::size_t>(t)];
    peak = std::max(peak, total);
  }
  return peak;
}

}  // namespace

Scenario Scenario::without_batteries() const {
  Scenario copy = *this;
  copy.batteries.clear();
  return copy;
}

void validate_scenario(const Scenario& s) {
  if (s.s_base_kva <= 0.0) throw ScenarioError("s_base_kva must be positive");
  if (s.network.v0 <= 0.0) throw ScenarioError("v0 must be positive");
  if (s.dt_hours <= 0.0) throw ScenarioError("dt_hours must be positive");
  if (s.horizon_t < 1) throw ScenarioError("horizon must span at least one period");

  const std::size_t n = s.network.buses.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Bus& b = s.network.buses[i];
    if (b.v_min <= 0.0 || b.v_min >= b.v_max) {
      throw ScenarioError("bus " + std::to_string(b.id) +
                          ": voltage bounds must satisfy 0 < v_min < v_max");
    }
  }
  for (const Branch& b : s.network.branches) {
    if (b.r < 0.0 || b.x < 0.0) {
      throw ScenarioError("branch " + std::to_string(b.from) + "->" +
                          std::to_string(b.to) + ": negative impedance");
    }
  }
  const TopologyCheck topo = validate_radial(s.network);
  if (!topo.ok()) throw ScenarioError("topology: " + topo.detail);

  const std::size_t horizon = static_cast<std::size_t>(s.horizon_t);
  for (const auto* load : {&s.load_p_kw, &s.load_q_kvar}) {
    const char* name = (load == &s.load_p_kw) ? "load_p_kw" : "load_q_kvar";
    if (load->size() != n) {
      throw ScenarioError(std::string(name) + " must have one series per bus");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if ((*load)[i].size() != horizon) {
        throw ScenarioError(std::string(name) + " for bus " + std::to_string(i) +
                            " must have " + std::to_string(horizon) + " entries");
      }
    }
  }

  for (std::size_t d = 0; d < s.ders.size(); ++d) {
    const DerSpec& der = s.ders[d];
    if (der.bus < 0 || der.bus >= static_cast<int>(n)) {
      throw ScenarioError(asset_label("der", d) + ": unknown bus " +
                          std::to_string(der.bus));
    }
    if (der.p_avail_kw.size() != horizon) {
      throw ScenarioError(asset_label("der", d) + ": p_avail_kw must have " +
                          std::to_string(horizon) + " entries");
    }
    if (der.p_min_kw < 0.0) {
      throw ScenarioError(asset_label("der", d) + ": p_min_kw must be >= 0");
    }
    for (double avail : der.p_avail_kw) {
      if (avail < der.p_min_kw) {
        throw ScenarioError(asset_label("der", d) +
                            ": p_avail_kw drops below p_min_kw");
      }
    }
  }

  std::vector<int> battery_buses;
  for (std::size_t k = 0; k < s.batteries.size(); ++k) {
    const BessSpec& bess = s.batteries[k];
    const std::string label = asset_label("battery", k);
    if (bess.bus < 0 || bess.bus >= static_cast<int>(n)) {
      throw ScenarioError(label + ": unknown bus " + std::to_string(bess.bus));
    }
    if (bess.capacity_kwh <= 0.0) throw ScenarioError(label + ": capacity_kwh must be positive");
    if (bess.p_max_kw <= 0.0) throw ScenarioError(label + ": p_max_kw must be positive");
    if (bess.eta <= 0.0 || bess.eta > 1.0) throw ScenarioError(label + ": eta must be in (0,1]");
    if (bess.leak_rate < 0.0) throw ScenarioError(label + ": leak_per_hour must be >= 0");
    if (bess.soc_min < 0.0 || bess.soc_min >= bess.soc_max || bess.soc_max > 1.0) {
      throw ScenarioError(label + ": need 0 <= soc_min < soc_max <= 1");
    }
    if (bess.e_init_kwh < bess.soc_min * bess.capacity_kwh - 1e-9 ||
        bess.e_init_kwh > bess.soc_max * bess.capacity_kwh + 1e-9) {
      throw ScenarioError(label + ": e_init_kwh outside the SOC band");
    }
    if (bess.e_end_min_kwh > bess.soc_max * bess.capacity_kwh + 1e-9) {
      throw ScenarioError(label + ": e_end_min_kwh exceeds the SOC ceiling");
    }
    battery_buses.push_back(bess.bus);
  }
  std::sort(battery_buses.begin(), battery_buses.end());
  if (std::adjacent_find(battery_buses.begin(), battery_buses.end()) !=
      battery_buses.end()) {
    throw ScenarioError("two batteries share one bus");
  }

  if (s.grid_p_min_kw > s.grid_p_max_kw) {
    throw ScenarioError("grid limits must satisfy p_min_kw <= p_max_kw");
  }
}

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw ScenarioError(origin + ": " + e.what());
  }

  Scenario s;
  try {
    s.network.v0 = j.at("v0").get<double>();
    s.s_base_kva = j.at("s_base_kva").get<double>();
    s.dt_hours = j.at("dt_hours").get<double>();
    for (const auto& jb : j.at("buses")) {
      Bus bus;
      bus.id = jb.at("id").get<int>();
      bus.v_min = jb.at("v_min").get<double>();
      bus.v_max = jb.at("v_max").get<double>();
      s.network.buses.push_back(bus);
    }
    for (const auto& jb : j.at("branches")) {
      Branch br;
      br.from = jb.at("from").get<int>();
      br.to = jb.at("to").get<int>();
      br.r = jb.at("r_pu").get<double>();
      br.x = jb.at("x_pu").get<double>();
      s.network.branches.push_back(br);
    }
    s.load_p_kw = j.at("load_p_kw").get<std::vector<std::vector<double>>>();
    s.load_q_kvar = j.at("load_q_kvar").get<std::vector<std::vector<double>>>();
    for (const auto& jd : j.at("ders")) {
      DerSpec der;
      der.bus = jd.at("bus").get<int>();
      der.p_avail_kw = jd.at("p_avail_kw").get<std::vector<double>>();
      der.p_min_kw = jd.at("p_min_kw").get<double>();
      s.ders.push_back(der);
    }
    for (const auto& jb : j.at("batteries")) {
      BessSpec bess;
      bess.bus = jb.at("bus").get<int>();
      bess.capacity_kwh = jb.at("capacity_kwh").get<double>();
      bess.p_max_kw = jb.at("p_max_kw").get<double>();
      bess.eta = jb.at("eta").get<double>();
      bess.leak_rate = jb.at("leak_per_hour").get<double>();
      bess.soc_min = jb.at("soc_min").get<double>();
      bess.soc_max = jb.at("soc_max").get<double>();
      bess.e_init_kwh = jb.value("e_init_kwh", 0.5 * bess.capacity_kwh);
      bess.e_end_min_kwh = jb.value("e_end_min_kwh", 0.5 * bess.capacity_kwh);
      s.batteries.push_back(bess);
    }

    s.horizon_t = s.load_p_kw.empty()
                      ? 0
                      : static_cast<int>(s.load_p_kw.front().size());

    // Grid limits default to double the coincident peak in either direction,
    // wide enough to stay non-binding unless the file tightens them.
    const double peak = coincident_peak(s.load_p_kw, s.horizon_t);
    const ordered_json grid = j.at("grid");
    s.grid_p_max_kw = grid.value("p_max_kw", 2.0 * peak);
    s.grid_p_min_kw = grid.value("p_min_kw", -2.0 * peak);
  } catch (const ordered_json::exception& e) {
    throw ScenarioError(origin + ": " + e.what());
  }

  try {
    validate_scenario(s);
  } catch (const ScenarioError& e) {
    throw ScenarioError(origin + ": " + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["v0"] = s.network.v0;
  j["s_base_kva"] = s.s_base_kva;
  j["dt_hours"] = s.dt_hours;
  j["buses"] = ordered_json::array();
  for (const Bus& b : s.network.buses) {
    j["buses"].push_back({{"id", b.id}, {"v_min", b.v_min}, {"v_max", b.v_max}});
  }
  j["branches"] = ordered_json::array();
  for (const Branch& b : s.network.branches) {
    j["branches"].push_back(
        {{"from", b.from}, {"to", b.to}, {"r_pu", b.r}, {"x_pu", b.x}});
  }
  j["load_p_kw"] = s.load_p_kw;
  j["load_q_kvar"] = s.load_q_kvar;
  j["ders"] = ordered_json::array();
  for (const DerSpec& d : s.ders) {
    j["ders"].push_back({{"bus", d.bus},
                         {"p_avail_kw", d.p_avail_kw},
                         {"p_min_kw", d.p_min_kw}});
  }
  j["batteries"] = ordered_json::array();
  for (const BessSpec& b : s.batteries) {
    j["batteries"].push_back({{"bus", b.bus},
                              {"capacity_kwh", b.capacity_kwh},
                              {"p_max_kw", b.p_max_kw},
                              {"eta", b.eta},
                              {"leak_per_hour", b.leak_rate},
                              {"soc_min", b.soc_min},
                              {"soc_max", b.soc_max},
                              {"e_init_kwh", b.e_init_kwh},
                              {"e_end_min_kwh", b.e_end_min_kwh}});
  }
  j["grid"] = {{"p_min_kw", s.grid_p_min_kw}, {"p_max_kw", s.grid_p_max_kw}};
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError(path.string() + ": cannot open file for writing");
  out << scenario_to_json(s);
}

Scenario generate_synthetic(const SynthParams& params) {
  if (params.n_buses < 2) throw ScenarioError("need at least 2 buses");
  if (params.prosumer_ratio < 0.0 || params.prosumer_ratio > 1.0) {
    throw ScenarioError("prosumer_ratio must be in [0,1]");
  }
  if (params.n_batteries < 0 || params.n_batteries > params.n_buses - 1) {
    throw ScenarioError("n_batteries must be in [0, n_buses - 1]");
  }
  if (params.peak_load_p_kw <= 0.0 || params.peak_load_q_kvar < 0.0) {
    throw ScenarioError("peak loads must be positive (reactive may be zero)");
  }

  constexpr int kHorizon = 24;
  const int n = params.n_buses;
  Rng rng(params.seed);

  Scenario s;
  s.horizon_t = kHorizon;
  s.dt_hours = 1.0;
  s.s_base_kva = params.peak_load_p_kw;
  s.network.v0 = 1.0;
  s.network.buses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s.network.buses.push_back({i, 0.95, 1.05});

  // Main feeder covers two thirds of the buses; the rest hang off it as
  // short lateral chains, echoing the usual trunk-and-lateral layout.
  const int main_len = std::max(1, (2 * (n - 1)) / 3);
  for (int i = 1; i <= main_len; ++i) {
    s.network.branches.push_back({i - 1, i, 0.0, 0.0});
  }
  int next_bus = main_len + 1;
  while (next_bus < n) {
    int attach = 1 + static_cast<int>(rng.uniform_index(
                         static_cast<std::size_t>(main_len)));
    const int chain = 1 + static_cast<int>(rng.uniform_index(4));
    for (int j = 0; j < chain && next_bus < n; ++j) {
      s.network.branches.push_back({attach, next_bus, 0.0, 0.0});
      attach = next_bus++;
    }
  }
  for (Branch& b : s.network.branches) {
    b.r = rng.uniform(0.7, 1.3);
    b.x = b.r * rng.uniform(0.9, 1.4);
  }

  // Double-peak demand shape (morning and evening), midday PV bell. Shapes
  // are evaluated at mid-period instants.
  std::vector<double> demand_shape(kHorizon);
  std::vector<double> pv_shape(kHorizon);
  for (int t = 0; t < kHorizon; ++t) {
    const double tc = t + 0.5;
    const double morning = (tc - 8.5) / 2.5;
    const double evening = (tc - 19.0) / 3.0;
    demand_shape[static_cast<std::size_t>(t)] =
        0.35 + 0.5 * std::exp(-morning * morning) +
        0.65 * std::exp(-evening * evening);
    const double midday = (tc - 12.5) / 2.8;
    const double bell = std::exp(-midday * midday);
    pv_shape[static_cast<std::size_t>(t)] = bell < 0.02 ? 0.0 : bell;
  }

  std::vector<double> weight_p(static_cast<std::size_t>(n), 0.0);
  std::vector<double> weight_q(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i < n; ++i) {
    weight_p[static_cast<std::size_t>(i)] = rng.uniform(0.6, 1.5);
    weight_q[static_cast<std::size_t>(i)] =
        weight_p[static_cast<std::size_t>(i)] * rng.uniform(0.85, 1.15);
  }

  s.load_p_kw.assign(static_cast<std::size_t>(n),
                     std::vector<double>(kHorizon, 0.0));
  s.load_q_kvar.assign(static_cast<std::size_t>(n),
                       std::vector<double>(kHorizon, 0.0));
  for (int i = 1; i < n; ++i) {
    for (int t = 0; t < kHorizon; ++t) {
      const double jitter_p = 1.0 + 0.05 * rng.uniform(-1.0, 1.0);
      const double jitter_q = 1.0 + 0.05 * rng.uniform(-1.0, 1.0);
      s.load_p_kw[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] =
          weight_p[static_cast<std::size_t>(i)] *
          demand_shape[static_cast<std::size_t>(t)] * jitter_p;
      s.load_q_kvar[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] =
          weight_q[static_cast<std::size_t>(i)] *
          demand_shape[static_cast<std::size_t>(t)] * jitter_q;
    }
  }
  const double raw_peak_p = coincident_peak(s.load_p_kw, kHorizon);
  const double raw_peak_q = coincident_peak(s.load_q_kvar, kHorizon);
  const double scale_p = params.peak_load_p_kw / raw_peak_p;
  const double scale_q =
      raw_peak_q > 0.0 ? params.peak_load_q_kvar / raw_peak_q : 0.0;
  for (int i = 1; i < n; ++i) {
    for (int t = 0; t < kHorizon; ++t) {
      s.load_p_kw[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *= scale_p;
      s.load_q_kvar[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *= scale_q;
    }
  }

  // Calibrate impedances so the worst load-only voltage drop is 0.04 p.u.:
  // the demand side always fits in the band, while heavy PV export can push
  // the upper bound and force curtailment or storage absorption.
  {
    RadialSolver solver(s.network);
    std::vector<double> inj_p(static_cast<std::size_t>(n));
    std::vector<double> inj_q(static_cast<std::size_t>(n));
    FlowSolution flow;
    double worst_drop = 0.0;
    for (int t = 0; t < kHorizon; ++t) {
      for (int i = 0; i < n; ++i) {
        inj_p[static_cast<std::size_t>(i)] =
            -s.load_p_kw[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] /
            s.s_base_kva;
        inj_q[static_cast<std::size_t>(i)] =
            -s.load_q_kvar[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] /
            s.s_base_kva;
      }
      solver.solve_into(inj_p, inj_q, flow);
      const double v_low =
          *std::min_element(flow.voltages.begin(), flow.voltages.end());
      worst_drop = std::max(worst_drop, s.network.v0 - v_low);
    }
    if (worst_drop > 0.0) {
      const double z_scale = 0.04 / worst_drop;
      for (Branch& b : s.network.branches) {
        b.r *= z_scale;
        b.x *= z_scale;
      }
    }
  }

  // Prosumer buses come from a seeded shuffle of the non-root buses; PV is
  // deliberately oversized relative to the local load so that full export
  // stresses the upper voltage bound.
  const int n_prosumers = static_cast<int>(
      std::ceil(params.prosumer_ratio * static_cast<double>(n - 1)));
  std::vector<int> candidates(static_cast<std::size_t>(n - 1));
  std::iota(candidates.begin(), candidates.end(), 1);
  rng.shuffle(candidates);
  std::vector<int> prosumers(candidates.begin(),
                             candidates.begin() + n_prosumers);
  std::sort(prosumers.begin(), prosumers.end());
  for (int bus : prosumers) {
    const auto& series = s.load_p_kw[static_cast<std::size_t>(bus)];
    const double local_peak = *std::max_element(series.begin(), series.end());
    const double size_kw = rng.uniform(6.0, 9.0) * local_peak;
    DerSpec der;
    der.bus = bus;
    der.p_min_kw = 0.0;
    der.p_avail_kw.resize(kHorizon);
    for (int t = 0; t < kHorizon; ++t) {
      der.p_avail_kw[static_cast<std::size_t>(t)] =
          size_kw * pv_shape[static_cast<std::size_t>(t)];
    }
    s.ders.push_back(der);
  }

  // Batteries sit on the main feeder at evenly spaced depths. Fleet capacity
  // is a tenth of the daily demand energy, split evenly.
  if (params.n_batteries > 0) {
    double daily_energy = 0.0;
    for (int i = 1; i < n; ++i) {
      for (int t = 0; t < kHorizon; ++t) {
        daily_energy +=
            s.load_p_kw[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *
            s.dt_hours;
      }
    }
    const double capacity =
        0.1 * daily_energy / static_cast<double>(params.n_batteries);
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    int overflow_bus = main_len + 1;  // spill onto laterals when the trunk fills
    for (int k = 0; k < params.n_batteries; ++k) {
      int depth = static_cast<int>(std::lround(
          static_cast<double>((k + 1) * main_len) /
          static_cast<double>(params.n_batteries + 1)));
      depth = std::clamp(depth, 1, main_len);
      int probes = 0;
      while (taken[static_cast<std::size_t>(depth)] && probes++ < main_len) {
        depth = depth % main_len + 1;
      }
      if (taken[static_cast<std::size_t>(depth)]) depth = overflow_bus++;
      taken[static_cast<std::size_t>(depth)] = 1;
      BessSpec bess;
      bess.bus = depth;
      bess.capacity_kwh = capacity;
      bess.p_max_kw = capacity / 4.0;
      bess.eta = 0.95;
      bess.leak_rate = 0.0;
      bess.soc_min = 0.1;
      bess.soc_max = 0.9;
      bess.e_init_kwh = 0.5 * capacity;
      bess.e_end_min_kwh = 0.5 * capacity;
      s.batteries.push_back(bess);
    }
    std::sort(s.batteries.begin(), s.batteries.end(),
              [](const BessSpec& a, const BessSpec& b) { return a.bus < b.bus; });
  }

  s.grid_p_max_kw = 2.0 * params.peak_load_p_kw;
  s.grid_p_min_kw = -2.0 * params.peak_load_p_kw;

  validate_scenario(s);
  return s;
}

}  // namespace codnopt
