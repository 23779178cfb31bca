#include "codnopt/evaluate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "codnopt/rng.hpp"
#include "codnopt/scenario.hpp"
#include "doctest.h"

using namespace codnopt;

namespace {

const std::string kScenarioDir = CODNOPT_SCENARIO_DIR;

Scenario two_bus_scenario() {
  return load_scenario(kScenarioDir + "/tiny2.json");
}

Genome uniform_genome(const Scenario& s, double value) {
  return Genome(genome_length(s), value);
}

// Two buses, one period, one fully exportable generator, zero load. All the
// constants are powers of two so the expected objective lands exactly.
Scenario export_scenario() {
  Scenario s;
  s.network.v0 = 1.0;
  s.network.buses = {{0, 0.9375, 1.0625}, {1, 0.9375, 1.0625}};
  s.network.branches = {{0, 1, 0.0625, 0.0}};
  s.horizon_t = 1;
  s.dt_hours = 1.0;
  s.s_base_kva = 100.0;
  s.load_p_kw = {{0.0}, {0.0}};
  s.load_q_kvar = {{0.0}, {0.0}};
  DerSpec der;
  der.bus = 1;
  der.p_avail_kw = {100.0};
  der.p_min_kw = 0.0;
  s.ders.push_back(der);
  s.grid_p_min_kw = -200.0;
  s.grid_p_max_kw = 200.0;
  validate_scenario(s);
  return s;
}

}  // namespace

TEST_CASE("genome length counts one gene per asset per period") {
  const Scenario s = two_bus_scenario();
  CHECK(genome_length(s) == 4);  // 2 periods x (1 battery + 1 generator)
  CHECK(genome_length(s.without_batteries()) == 2);
}

TEST_CASE("decode maps genes to setpoints") {
  const Scenario s = two_bus_scenario();

  SUBCASE("midpoint genes idle the battery and half-load the generator") {
    const Dispatch d = decode(uniform_genome(s, 0.5), s);
    CHECK(d.bess_signed_power_kw[0][0] == 0.0);
    CHECK(d.bess_signed_power_kw[0][1] == 0.0);
    CHECK(d.der_power_kw[0][0] == 60.0);
    CHECK(d.der_power_kw[0][1] == 20.0);
  }
  SUBCASE("zero genes discharge flat out and shut the generator off") {
    const Dispatch d = decode(uniform_genome(s, 0.0), s);
    CHECK(d.bess_signed_power_kw[0][0] == -20.0);
    CHECK(d.der_power_kw[0][0] == 0.0);
  }
  SUBCASE("one genes charge flat out and export everything") {
    const Dispatch d = decode(uniform_genome(s, 1.0), s);
    CHECK(d.bess_signed_power_kw[0][1] == 20.0);
    CHECK(d.der_power_kw[0][1] == 40.0);
  }
  SUBCASE("battery genes come first, period-major") {
    Genome g(4, 0.5);
    g[1] = 1.0;  // battery, second period
    g[2] = 0.0;  // generator, first period
    const Dispatch d = decode(g, s);
    CHECK(d.bess_signed_power_kw[0][0] == 0.0);
    CHECK(d.bess_signed_power_kw[0][1] == 20.0);
    CHECK(d.der_power_kw[0][0] == 0.0);
    CHECK(d.der_power_kw[0][1] == 20.0);
  }
  SUBCASE("wrong genome length is rejected") {
    CHECK_THROWS_AS(decode(Genome(3, 0.5), s), std::invalid_argument);
  }
}

TEST_CASE("a full export hits the band edge with an exact objective") {
  const Scenario s = export_scenario();
  const Evaluation e = evaluate(Genome{1.0}, s);
  // Exporting 1 p.u. over r = 0.0625 lifts bus 1 to exactly 1.0625, the band
  // edge: deviation is half the 0.125-wide band, squared = 0.25.
  CHECK(e.voltages[0][1] == 1.0625);
  CHECK(e.voltages[0][0] == 1.0);
  CHECK(e.f1 == 0.25);
  CHECK(e.f2_neg == -100.0);
  CHECK(e.cv == 0.0);
  CHECK(e.grid_p_kw[0] == -100.0);
}

TEST_CASE("pushing past the band edge is flagged, not clipped") {
  Scenario s = export_scenario();
  s.ders[0].p_avail_kw = {200.0};  // twice the export that reaches the edge
  validate_scenario(s);
  const Evaluation e = evaluate(Genome{1.0}, s);
  CHECK(e.voltages[0][1] == doctest::Approx(1.125));
  CHECK(e.cv == doctest::Approx(0.0625 / 0.125));  // overshoot / band width
  CHECK(e.f2_neg == -200.0);
}

TEST_CASE("the two-bus fixture's full export is worth 160 kWh") {
  const Scenario s = two_bus_scenario();
  Genome g(4, 0.5);
  g[0] = 1.0;  // charge through the first period to absorb the surplus
  g[2] = 1.0;
  g[3] = 1.0;
  const Evaluation e = evaluate(g, s);
  CHECK(e.f2_neg == -160.0);
  CHECK(e.cv == 0.0);

  // Without the battery soaking up 20 kW, the export cap is breached.
  g[0] = 0.5;
  CHECK(evaluate(g, s).cv > 0.0);
}

TEST_CASE("idle dispatch on the two-bus fixture is feasible") {
  const Scenario s = two_bus_scenario();
  const Evaluation e = evaluate(uniform_genome(s, 0.5), s);
  CHECK(e.cv == 0.0);
  CHECK(e.f1 > 0.0);  // half-open generation already swings the feeder
  for (const auto& row : e.voltages) {
    for (double v : row) {
      CHECK(v > s.network.buses[1].v_min);
      CHECK(v < s.network.buses[1].v_max);
    }
  }
}

TEST_CASE("grid exchange equals load minus generation plus charging") {
  const Scenario s = two_bus_scenario();
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Genome g(genome_length(s));
    for (double& gene : g) gene = rng.uniform01();
    const Evaluation e = evaluate(g, s);
    const Dispatch d = decode(g, s);
    for (int t = 0; t < s.horizon_t; ++t) {
      double expected = 0.0;
      for (const auto& series : s.load_p_kw) expected += series[t];
      for (const auto& series : d.der_power_kw) expected -= series[t];
      for (const auto& series : d.bess_signed_power_kw) expected += series[t];
      CHECK(e.grid_p_kw[t] == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("raising a generator gene only increases delivered energy") {
  const Scenario s = two_bus_scenario();
  double previous = 0.0;
  for (double gene : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    Genome g(4, 0.5);
    g[2] = gene;
    const double f2_neg = evaluate(g, s).f2_neg;
    if (gene > 0.0) CHECK(f2_neg < previous);
    previous = f2_neg;
  }
}

TEST_CASE("violation is zero exactly when the reported state shows none") {
  const Scenario s = two_bus_scenario();
  Rng rng(7);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Genome g(genome_length(s));
    for (double& gene : g) gene = rng.uniform01();
    const Evaluation e = evaluate(g, s);

    bool clean = true;
    for (int t = 0; t < s.horizon_t; ++t) {
      for (std::size_t i = 0; i < s.network.bus_count(); ++i) {
        const Bus& bus = s.network.buses[i];
        if (e.voltages[t][i] > bus.v_max || e.voltages[t][i] < bus.v_min) {
          clean = false;
        }
      }
      if (e.grid_p_kw[t] > s.grid_p_max_kw || e.grid_p_kw[t] < s.grid_p_min_kw) {
        clean = false;
      }
    }
    for (std::size_t b = 0; b < s.batteries.size(); ++b) {
      const BessSpec& spec = s.batteries[b];
      for (double energy : e.trajectories[b].energy_kwh) {
        if (energy < spec.soc_min * spec.capacity_kwh ||
            energy > spec.soc_max * spec.capacity_kwh) {
          clean = false;
        }
      }
      if (e.trajectories[b].energy_kwh.back() < spec.e_end_min_kwh) {
        clean = false;
      }
    }
    CHECK((e.cv == 0.0) == clean);
    (clean ? feasible : infeasible) += 1;
  }
  // The sweep must exercise both outcomes to mean anything.
  CHECK(feasible > 0);
  CHECK(infeasible > 0);
}

TEST_CASE("changing the power base with matching impedances changes nothing") {
  Scenario a = two_bus_scenario();
  Scenario b = a;
  const double ratio = 10.0;
  b.s_base_kva *= ratio;
  for (Branch& br : b.network.branches) {
    br.r *= ratio;
    br.x *= ratio;
  }
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Genome g(genome_length(a));
    for (double& gene : g) gene = rng.uniform01();
    const Evaluation ea = evaluate(g, a);
    const Evaluation eb = evaluate(g, b);
    CHECK(ea.f1 == doctest::Approx(eb.f1).epsilon(1e-12));
    CHECK(ea.f2_neg == eb.f2_neg);
    CHECK(ea.cv == doctest::Approx(eb.cv).epsilon(1e-12));
    for (int t = 0; t < a.horizon_t; ++t) {
      CHECK(ea.grid_p_kw[t] == doctest::Approx(eb.grid_p_kw[t]).epsilon(1e-12));
      for (std::size_t i = 0; i < a.network.bus_count(); ++i) {
        CHECK(ea.voltages[t][i] ==
              doctest::Approx(eb.voltages[t][i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("a dead system evaluates to the origin") {
  Scenario s;
  s.network.v0 = 1.0;
  s.network.buses = {{0, 0.95, 1.05}, {1, 0.95, 1.05}};
  s.network.branches = {{0, 1, 0.02, 0.01}};
  s.horizon_t = 2;
  s.dt_hours = 1.0;
  s.s_base_kva = 100.0;
  s.load_p_kw = {{0.0, 0.0}, {0.0, 0.0}};
  s.load_q_kvar = {{0.0, 0.0}, {0.0, 0.0}};
  s.grid_p_min_kw = -10.0;
  s.grid_p_max_kw = 10.0;
  validate_scenario(s);

  const Evaluation e = evaluate(Genome{}, s);
  CHECK(e.f1 == 0.0);
  CHECK(e.f2_neg == 0.0);
  CHECK(e.cv == 0.0);
  for (const auto& row : e.voltages) {
    for (double v : row) CHECK(v == 1.0);
  }
  for (double p : e.grid_p_kw) CHECK(p == 0.0);
}

TEST_CASE("evaluation is idempotent and reusable") {
  const Scenario s = two_bus_scenario();
  const Evaluator evaluator(s);
  CHECK(evaluator.genome_length() == 4);
  Genome g{0.3, 0.7, 0.2, 0.9};
  const Evaluation first = evaluator.evaluate(g);
  const Evaluation second = evaluator.evaluate(g);
  CHECK(first.f1 == second.f1);
  CHECK(first.f2_neg == second.f2_neg);
  CHECK(first.cv == second.cv);
}
