#include "codnopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "doctest.h"

using namespace codnopt;

namespace {

// Directory of committed scenario files, injected by the build.
const std::string kScenarioDir = CODNOPT_SCENARIO_DIR;

Scenario two_bus_scenario() {
  return load_scenario(kScenarioDir + "/tiny2.json");
}

}  // namespace

TEST_CASE("the two-bus fixture loads with the expected shape") {
  const Scenario s = two_bus_scenario();
  CHECK(s.network.bus_count() == 2);
  CHECK(s.network.branches.size() == 1);
  CHECK(s.horizon_t == 2);
  CHECK(s.dt_hours == 1.0);
  CHECK(s.s_base_kva == 100.0);
  CHECK(s.load_p_kw[1][1] == 40.0);
  CHECK(s.ders.size() == 1);
  CHECK(s.ders[0].p_avail_kw == std::vector<double>{120.0, 40.0});
  CHECK(s.batteries.size() == 1);
  CHECK(s.batteries[0].e_init_kwh == 25.0);
  // No explicit grid limits: defaults open up twice the coincident peak.
  const double peak = 40.0;
  CHECK(s.grid_p_max_kw == doctest::Approx(2.0 * peak));
  CHECK(s.grid_p_min_kw == doctest::Approx(-2.0 * peak));
}

TEST_CASE("parse errors carry the origin and the offending field") {
  const char* missing_buses = R"({
    "v0": 1.0, "s_base_kva": 100.0, "dt_hours": 1.0,
    "branches": [], "load_p_kw": [[0.0]], "load_q_kvar": [[0.0]],
    "ders": [], "batteries": [], "grid": {}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(missing_buses, "inline.json"),
                       doctest::Contains("inline.json"), ScenarioError);
  CHECK_THROWS_WITH_AS(parse_scenario(missing_buses, "inline.json"),
                       doctest::Contains("buses"), ScenarioError);

  CHECK_THROWS_WITH_AS(parse_scenario("{ not json", "broken.json"),
                       doctest::Contains("broken.json"), ScenarioError);
}

TEST_CASE("validation names the field that is wrong") {
  Scenario s = two_bus_scenario();

  SUBCASE("asset on a nonexistent bus") {
    s.ders[0].bus = 7;
    CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("unknown bus"),
                         ScenarioError);
  }
  SUBCASE("inverted voltage band") {
    s.network.buses[1].v_min = 1.06;
    CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("v_min"),
                         ScenarioError);
  }
  SUBCASE("load series with the wrong horizon") {
    s.load_p_kw[0].push_back(0.0);
    CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("load_p_kw"),
                         ScenarioError);
  }
  SUBCASE("negative battery capacity") {
    s.batteries[0].capacity_kwh = -1.0;
    CHECK_THROWS_WITH_AS(validate_scenario(s),
                         doctest::Contains("capacity_kwh"), ScenarioError);
  }
  SUBCASE("initial energy outside the state-of-charge band") {
    s.batteries[0].e_init_kwh = 49.0;  // above soc_max * capacity = 45
    CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("e_init"),
                         ScenarioError);
  }
  SUBCASE("two batteries on one bus") {
    s.batteries.push_back(s.batteries[0]);
    CHECK_THROWS_AS(validate_scenario(s), ScenarioError);
  }
  SUBCASE("grid limits inverted") {
    s.grid_p_min_kw = 10.0;
    s.grid_p_max_kw = -10.0;
    CHECK_THROWS_WITH_AS(validate_scenario(s), doctest::Contains("grid"),
                         ScenarioError);
  }
}

TEST_CASE("a scenario survives a JSON round trip") {
  const Scenario a = two_bus_scenario();
  const Scenario b = parse_scenario(scenario_to_json(a), "round-trip");
  CHECK(b.network.bus_count() == a.network.bus_count());
  CHECK(b.network.v0 == a.network.v0);
  CHECK(b.horizon_t == a.horizon_t);
  CHECK(b.load_p_kw == a.load_p_kw);
  CHECK(b.load_q_kvar == a.load_q_kvar);
  CHECK(b.ders[0].p_avail_kw == a.ders[0].p_avail_kw);
  CHECK(b.batteries[0].capacity_kwh == a.batteries[0].capacity_kwh);
  CHECK(b.batteries[0].e_end_min_kwh == a.batteries[0].e_end_min_kwh);
  CHECK(b.grid_p_min_kw == a.grid_p_min_kw);
  CHECK(b.grid_p_max_kw == a.grid_p_max_kw);
  // The serialized text itself is a fixed point once parsed back.
  CHECK(scenario_to_json(b) == scenario_to_json(a));
}

TEST_CASE("removing batteries leaves the rest untouched") {
  const Scenario a = two_bus_scenario();
  const Scenario b = a.without_batteries();
  CHECK(b.batteries.empty());
  CHECK(b.network.bus_count() == a.network.bus_count());
  CHECK(b.load_p_kw == a.load_p_kw);
  CHECK(b.ders.size() == a.ders.size());
  CHECK_NOTHROW(validate_scenario(b));
}

TEST_CASE("the generator is deterministic in its seed") {
  SynthParams params;
  params.seed = 42;
  const std::string once = scenario_to_json(generate_synthetic(params));
  const std::string twice = scenario_to_json(generate_synthetic(params));
  CHECK(once == twice);

  params.seed = 43;
  CHECK(scenario_to_json(generate_synthetic(params)) != once);
}

TEST_CASE("generated instances are well formed across sizes and seeds") {
  for (int n : {4, 7, 12, 33, 118}) {
    for (std::uint64_t seed : {1ull, 2ull, 9ull}) {
      SynthParams params;
      params.n_buses = n;
      params.seed = seed;
      const Scenario s = generate_synthetic(params);
      CAPTURE(n);
      CAPTURE(seed);
      CHECK_NOTHROW(validate_scenario(s));
      CHECK(s.network.bus_count() == n);
      CHECK(s.horizon_t == 24);
      CHECK(validate_radial(s.network).ok());

      // Coincident peaks hit the requested targets exactly.
      double peak_p = 0.0, peak_q = 0.0;
      for (int t = 0; t < s.horizon_t; ++t) {
        double p = 0.0, q = 0.0;
        for (int b = 0; b < n; ++b) {
          p += s.load_p_kw[b][t];
          q += s.load_q_kvar[b][t];
        }
        peak_p = std::max(peak_p, p);
        peak_q = std::max(peak_q, q);
      }
      CHECK(peak_p == doctest::Approx(params.peak_load_p_kw).epsilon(1e-9));
      CHECK(peak_q == doctest::Approx(params.peak_load_q_kvar).epsilon(1e-9));
    }
  }
}

TEST_CASE("prosumer and battery counts follow the requested mix") {
  SynthParams params;
  params.n_buses = 118;
  params.prosumer_ratio = 0.4;
  params.n_batteries = 5;
  const Scenario s = generate_synthetic(params);
  // ceil(0.4 * 117) = 47 prosumer buses, none of them the root.
  CHECK(s.ders.size() == 47);
  std::set<int> der_buses;
  for (const DerSpec& d : s.ders) {
    CHECK(d.bus != 0);
    der_buses.insert(d.bus);
    CHECK(d.p_avail_kw.size() == 24);
    const double energy =
        std::accumulate(d.p_avail_kw.begin(), d.p_avail_kw.end(), 0.0);
    CHECK(energy > 0.0);
  }
  CHECK(der_buses.size() == s.ders.size());

  CHECK(s.batteries.size() == 5);
  std::set<int> bess_buses;
  for (const BessSpec& b : s.batteries) {
    CHECK(b.bus != 0);
    bess_buses.insert(b.bus);
    CHECK(b.capacity_kwh > 0.0);
    CHECK(b.p_max_kw > 0.0);
    CHECK(b.e_init_kwh == b.e_end_min_kwh);
  }
  CHECK(bess_buses.size() == 5);
}

TEST_CASE("a storage-free instance is still valid") {
  SynthParams params;
  params.n_batteries = 0;
  const Scenario s = generate_synthetic(params);
  CHECK(s.batteries.empty());
  CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("more batteries than main-feeder slots spill onto laterals") {
  SynthParams params;
  params.n_buses = 5;
  params.n_batteries = 4;
  const Scenario s = generate_synthetic(params);
  CHECK(s.batteries.size() == 4);
  std::set<int> buses;
  for (const BessSpec& b : s.batteries) buses.insert(b.bus);
  CHECK(buses.size() == 4);
  CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("generator rejects out-of-range parameters") {
  SynthParams params;

  SUBCASE("too few buses") {
    params.n_buses = 1;
    CHECK_THROWS_AS(generate_synthetic(params), ScenarioError);
  }
  SUBCASE("negative prosumer ratio") {
    params.prosumer_ratio = -0.1;
    CHECK_THROWS_AS(generate_synthetic(params), ScenarioError);
  }
  SUBCASE("prosumer ratio above one") {
    params.prosumer_ratio = 1.5;
    CHECK_THROWS_AS(generate_synthetic(params), ScenarioError);
  }
  SUBCASE("nonpositive peak load") {
    params.peak_load_p_kw = 0.0;
    CHECK_THROWS_AS(generate_synthetic(params), ScenarioError);
  }
  SUBCASE("more batteries than non-root buses") {
    params.n_buses = 4;
    params.n_batteries = 4;
    CHECK_THROWS_AS(generate_synthetic(params), ScenarioError);
  }
}
