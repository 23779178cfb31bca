#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "codnopt/assets.hpp"
#include "codnopt/feeder.hpp"

namespace codnopt {

// A complete problem instance: network, demand time series, DER availability,
// batteries, and grid-exchange limits. Loads and asset powers stay in physical
// kW/kvar; per-unit conversion (division by s_base) happens at evaluation.
struct Scenario {
  FeederNetwork network;
  int horizon_t = 0;     // number of periods
  double dt_hours = 1.0;
  std::vector<std::vector<double>> load_p_kw;    // [bus][t]
  std::vector<std::vector<double>> load_q_kvar;  // [bus][t]
  std::vector<DerSpec> ders;
  std::vector<BessSpec> batteries;
  double grid_p_min_kw = 0.0;
  double grid_p_max_kw = 0.0;
  double s_base_kva = 1.0;

  double kw_to_pu(double kw) const { return kw / s_base_kva; }
  double pu_to_kw(double pu) const { return pu * s_base_kva; }

  // Copy with every battery removed (the no-storage baseline case).
  Scenario without_batteries() const;
};

struct SynthParams {
  int n_buses = 12;
  double prosumer_ratio = 0.4;
  double peak_load_p_kw = 600.0;
  double peak_load_q_kvar = 260.0;
  int n_batteries = 2;
  std::uint64_t seed = 1;
};

// Scenario construction / validation failure, carrying file and field context
// when available.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Checks every structural invariant (radial topology, array shapes, asset
// cross-references, bounds ordering); throws ScenarioError on the first
// failure, naming the offending field.
void validate_scenario(const Scenario& scenario);

Scenario parse_scenario(const std::string& json_text, const std::string& origin);
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Deterministic synthetic instance: a main feeder with short laterals, a
// double-peak daily demand shape scaled to the requested coincident peak,
// midday PV availability on the prosumer buses, and batteries spread along
// the main feeder. 24 one-hour periods.
Scenario generate_synthetic(const SynthParams& params);

}  // namespace codnopt
