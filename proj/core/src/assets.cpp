#include "codnopt/assets.hpp"

#include <algorithm>
#include <stdexcept>

namespace codnopt {

BessStepResult step_soc(const BessSpec& spec, double energy_kwh, double p_chg_kw,
                        double p_dis_kw, double dt_hours) {
  if (p_chg_kw > 0.0 && p_dis_kw > 0.0) {
    throw std::invalid_argument(
        "battery cannot charge and discharge in the same period");
  }
  const double next = energy_kwh + p_chg_kw * spec.eta * dt_hours -
                      p_dis_kw * dt_hours / spec.eta -
                      energy_kwh * spec.leak_rate * dt_hours;
  return {next, next / spec.capacity_kwh};
}

ScheduleResult simulate_schedule(const BessSpec& spec,
                                 std::span<const double> signed_power_kw,
                                 double dt_hours) {
  const std::size_t periods = signed_power_kw.size();
  ScheduleResult result;
  BessTrajectory& traj = result.trajectory;
  traj.energy_kwh.reserve(periods + 1);
  traj.soc.reserve(periods + 1);
  traj.p_chg_kw.reserve(periods);
  traj.p_dis_kw.reserve(periods);

  const double e_lo = spec.soc_min * spec.capacity_kwh;
  const double e_hi = spec.soc_max * spec.capacity_kwh;
  double energy = spec.e_init_kwh;
  double overshoot = std::max(0.0, energy - e_hi) + std::max(0.0, e_lo - energy);
  traj.energy_kwh.push_back(energy);
  traj.soc.push_back(energy / spec.capacity_kwh);

  for (std::size_t t = 0; t < periods; ++t) {
    const double p = signed_power_kw[t];
    const double p_chg = std::max(0.0, p);
    const double p_dis = std::max(0.0, -p);
    traj.p_chg_kw.push_back(p_chg);
    traj.p_dis_kw.push_back(p_dis);
    energy = step_soc(spec, energy, p_chg, p_dis, dt_hours).energy_kwh;
    overshoot += std::max(0.0, energy - e_hi) + std::max(0.0, e_lo - energy);
    traj.energy_kwh.push_back(energy);
    traj.soc.push_back(energy / spec.capacity_kwh);
  }

  const double shortfall = std::max(0.0, spec.e_end_min_kwh - energy);
  result.violation = (overshoot + shortfall) / spec.capacity_kwh;
  return result;
}

}  // namespace codnopt
