#pragma once

#include <utility>
#include <vector>

#include "codnopt/assets.hpp"
#include "codnopt/feeder.hpp"
#include "codnopt/scenario.hpp"

namespace codnopt {

// Normalized decision vector in [0,1]^D with D = T * (n_batteries + n_ders).
// Layout: battery genes first, period-major (index t*n_batteries + b), then
// DER genes, period-major (offset + t*n_ders + d).
using Genome = std::vector<double>;

struct Dispatch {
  std::vector<std::vector<double>> bess_signed_power_kw;  // [battery][t], +charge
  std::vector<std::vector<double>> der_power_kw;          // [der][t]
};

// Objective pair plus aggregate constraint violation for one genome, with the
// underlying physical state retained for reporting.
struct Evaluation {
  double f1 = 0.0;      // sum of squared band-normalized voltage deviations
  double f2_neg = 0.0;  // negative total DER energy (kWh), minimized
  double cv = 0.0;      // aggregate normalized constraint violation
  std::vector<std::vector<double>> voltages;  // [t][bus], p.u.
  std::vector<double> grid_p_kw;              // net import at the root, per period
  std::vector<BessTrajectory> trajectories;   // one per battery
};

std::size_t genome_length(const Scenario& scenario);

// Maps genes to physical setpoints: battery gene g -> (2g - 1) * p_max
// (signed power, positive = charging), DER gene g -> p_min + g * (p_avail - p_min).
Dispatch decode(const Genome& genome, const Scenario& scenario);

std::pair<const char*, const char*> objective_names();

// Reusable genome -> Evaluation pipeline for one scenario: decode, simulate
// every battery, run one power flow per period, accumulate objectives and
// violations. evaluate() is const and reentrant, so a population can be
// scored concurrently.
class Evaluator {
 public:
  explicit Evaluator(Scenario scenario);

  Evaluation evaluate(const Genome& genome) const;

  const Scenario& scenario() const { return scenario_; }
  std::size_t genome_length() const { return genome_length_; }

 private:
  Scenario scenario_;
  RadialSolver solver_;
  std::vector<std::size_t> root_branches_;  // branches leaving bus 0
  std::size_t genome_length_ = 0;
};

// One-shot convenience wrapper around Evaluator.
Evaluation evaluate(const Genome& genome, const Scenario& scenario);

}  // namespace codnopt
