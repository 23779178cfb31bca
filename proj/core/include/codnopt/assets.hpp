#pragma once

#include <span>
#include <vector>

namespace codnopt {

// Battery energy storage unit. Power in kW, energy in kWh, SOC in [0,1].
struct BessSpec {
  int bus = 0;
  double capacity_kwh = 0.0;
  double p_max_kw = 0.0;       // symmetric charge/discharge limit
  double eta = 1.0;            // one-way efficiency, applied on both directions
  double leak_rate = 0.0;      // self-discharge fraction per hour
  double soc_min = 0.0;
  double soc_max = 1.0;
  double e_init_kwh = 0.0;
  double e_end_min_kwh = 0.0;  // terminal energy floor
};

// Curtailable distributed generator (PV and similar). Available output varies
// per period; dispatch picks a setpoint in [p_min, p_avail(t)].
struct DerSpec {
  int bus = 0;
  std::vector<double> p_avail_kw;  // one entry per period
  double p_min_kw = 0.0;
};

struct BessStepResult {
  double energy_kwh = 0.0;
  double soc = 0.0;
};

// One explicit-Euler step of the storage balance: charging adds eta*p_chg*dt,
// discharging removes p_dis*dt/eta, and leakage bleeds energy*leak_rate*dt.
// Throws std::invalid_argument when p_chg and p_dis are both positive; the
// per-step encoding used by the optimizer makes that state unreachable.
BessStepResult step_soc(const BessSpec& spec, double energy_kwh, double p_chg_kw,
                        double p_dis_kw, double dt_hours);

struct BessTrajectory {
  std::vector<double> energy_kwh;  // length T+1, index 0 = initial state
  std::vector<double> soc;         // length T+1
  std::vector<double> p_chg_kw;    // length T
  std::vector<double> p_dis_kw;    // length T
};

struct ScheduleResult {
  BessTrajectory trajectory;
  // Sum of SOC-band overshoots over every state (including the initial one)
  // plus the terminal-energy shortfall, all in units of capacity. Zero means
  // the schedule keeps the battery inside its operating envelope.
  double violation = 0.0;
};

// Simulates a signed-power schedule (positive = charge, negative = discharge)
// and quantifies envelope violations instead of rejecting them, so infeasible
// schedules can still be ranked.
ScheduleResult simulate_schedule(const BessSpec& spec,
                                 std::span<const double> signed_power_kw,
                                 double dt_hours);

}  // namespace codnopt
