#include "codnopt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codnopt {

std::size_t genome_length(const Scenario& scenario) {
  return static_cast<std::size_t>(scenario.horizon_t) *
         (scenario.batteries.size() + scenario.ders.size());
}

Dispatch decode(const Genome& genome, const Scenario& scenario) {
  if (genome.size() != genome_length(scenario)) {
    throw std::invalid_argument("genome length does not match the scenario");
  }
  const std::size_t horizon = static_cast<std::size_t>(scenario.horizon_t);
  const std::size_t nb = scenario.batteries.size();
  const std::size_t nd = scenario.ders.size();

  Dispatch dispatch;
  dispatch.bess_signed_power_kw.assign(nb, std::vector<double>(horizon, 0.0));
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t b = 0; b < nb; ++b) {
      const double g = genome[t * nb + b];
      dispatch.bess_signed_power_kw[b][t] =
          (2.0 * g - 1.0) * scenario.batteries[b].p_max_kw;
    }
  }
  const std::size_t der_offset = horizon * nb;
  dispatch.der_power_kw.assign(nd, std::vector<double>(horizon, 0.0));
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t d = 0; d < nd; ++d) {
      const double g = genome[der_offset + t * nd + d];
      const DerSpec& der = scenario.ders[d];
      dispatch.der_power_kw[d][t] =
          der.p_min_kw + g * (der.p_avail_kw[t] - der.p_min_kw);
    }
  }
  return dispatch;
}

std::pair<const char*, const char*> objective_names() {
  return {"voltage_variance", "neg_der_energy"};
}

Evaluator::Evaluator(Scenario scenario)
    : scenario_(std::move(scenario)),
      solver_(scenario_.network),
      genome_length_(codnopt::genome_length(scenario_)) {
  for (std::size_t e = 0; e < scenario_.network.branches.size(); ++e) {
    if (scenario_.network.branches[e].from == 0) root_branches_.push_back(e);
  }
}

Evaluation Evaluator::evaluate(const Genome& genome) const {
  const Scenario& s = scenario_;
  const std::size_t n = s.network.buses.size();
  const std::size_t horizon = static_cast<std::size_t>(s.horizon_t);
  const Dispatch dispatch = decode(genome, s);

  Evaluation result;
  result.voltages.assign(horizon, std::vector<double>(n, 0.0));
  result.grid_p_kw.assign(horizon, 0.0);

  // Battery envelope violations come straight from the trajectory simulation.
  result.trajectories.reserve(s.batteries.size());
  for (std::size_t b = 0; b < s.batteries.size(); ++b) {
    ScheduleResult sim = simulate_schedule(
        s.batteries[b], dispatch.bess_signed_power_kw[b], s.dt_hours);
    result.cv += sim.violation;
    result.trajectories.push_back(std::move(sim.trajectory));
  }

  const double grid_denom =
      std::max(std::abs(s.grid_p_max_kw), std::abs(s.grid_p_min_kw));
  std::vector<double> inj_p(n);
  std::vector<double> inj_q(n);
  FlowSolution flow;
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      inj_p[i] = -s.load_p_kw[i][t];
      inj_q[i] = -s.load_q_kvar[i][t];
    }
    for (std::size_t d = 0; d < s.ders.size(); ++d) {
      inj_p[static_cast<std::size_t>(s.ders[d].bus)] +=
          dispatch.der_power_kw[d][t];
    }
    for (std::size_t b = 0; b < s.batteries.size(); ++b) {
      inj_p[static_cast<std::size_t>(s.batteries[b].bus)] -=
          dispatch.bess_signed_power_kw[b][t];
    }
    for (std::size_t i = 0; i < n; ++i) {
      inj_p[i] /= s.s_base_kva;
      inj_q[i] /= s.s_base_kva;
    }

    solver_.solve_into(inj_p, inj_q, flow);
    result.voltages[t] = flow.voltages;

    for (std::size_t i = 0; i < n; ++i) {
      const Bus& bus = s.network.buses[i];
      const double band = bus.v_max - bus.v_min;
      const double dev = (flow.voltages[i] - s.network.v0) / band;
      result.f1 += dev * dev;
      const double breach = std::max(
          {0.0, flow.voltages[i] - bus.v_max, bus.v_min - flow.voltages[i]});
      result.cv += breach / band;
    }

    // The slack feeds whatever the buses do not balance locally: flows into
    // the root's subtrees minus the root's own net injection.
    double grid_pu = -inj_p[0];
    for (std::size_t e : root_branches_) grid_pu += flow.branch_p[e];
    const double grid_kw = grid_pu * s.s_base_kva;
    result.grid_p_kw[t] = grid_kw;
    const double breach = std::max(
        {0.0, grid_kw - s.grid_p_max_kw, s.grid_p_min_kw - grid_kw});
    result.cv += breach / (grid_denom > 0.0 ? grid_denom : 1.0);
  }

  for (std::size_t d = 0; d < s.ders.size(); ++d) {
    for (std::size_t t = 0; t < horizon; ++t) {
      result.f2_neg -= dispatch.der_power_kw[d][t] * s.dt_hours;
    }
  }
  return result;
}

Evaluation evaluate(const Genome& genome, const Scenario& scenario) {
  return Evaluator(scenario).evaluate(genome);
}

}  // namespace codnopt
