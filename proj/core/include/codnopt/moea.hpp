#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "codnopt/evaluate.hpp"
#include "codnopt/metrics.hpp"
#include "codnopt/rng.hpp"
#include "codnopt/scenario.hpp"

namespace codnopt {

enum class Algorithm { nsga2, spea2 };

const char* algorithm_name(Algorithm algorithm);
std::optional<Algorithm> algorithm_from_name(const std::string& name);

struct Individual {
  Genome genome;
  Evaluation eval;
  int rank = 0;          // non-domination front index (0 = best)
  double crowding = 0.0;
  double fitness = 0.0;  // SPEA-2 combined fitness (lower is better)
};

struct RunConfig {
  Algorithm algorithm = Algorithm::nsga2;
  int pop_size = 100;
  int generations = 1000;
  int archive_size = 100;  // SPEA-2 environmental archive
  double crossover_prob = 0.9;
  double crossover_eta = 15.0;
  std::optional<double> mutation_prob;  // default: 1/genome-length
  double mutation_eta = 20.0;
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument when a field is out of range (pop_size must be
// even and >= 4, generations >= 1, probabilities in [0,1], etas > 0).
void validate_config(const RunConfig& config);

struct RunResult {
  // Feasible mutually non-dominated solutions accumulated over the whole run,
  // sorted by f1. Falls back to the least-violating non-dominated set of the
  // final population when no feasible point was ever seen.
  std::vector<FrontPoint> final_front;
  // Elite-front objective snapshot after initialization and after every
  // generation (length generations + 1).
  std::vector<std::vector<std::pair<double, double>>> history;
  double wall_time_s = 0.0;
};

// Deb's feasibility-first dominance: a feasible point beats any infeasible
// one; among infeasible, less violation wins; among feasible, plain Pareto
// dominance on (f1, f2_neg).
bool constrained_dominates(const Evaluation& a, const Evaluation& b);

// Fast non-dominated sort; front k holds indices non-dominated once fronts
// 0..k-1 are removed.
std::vector<std::vector<std::size_t>> non_dominated_sort(
    const std::vector<Individual>& population);

// Per-member crowding distance within one front (aligned with `front`);
// objective-boundary members get infinity.
std::vector<double> crowding_distance(const std::vector<Individual>& population,
                                      const std::vector<std::size_t>& front);

// Simulated binary crossover on [0,1] genes. With probability 1 - prob the
// children are plain copies of the parents.
void sbx_crossover(const Genome& parent1, const Genome& parent2, double eta_c,
                   double prob, Rng& rng, Genome& child1, Genome& child2);

// Bounded polynomial mutation; each gene mutates independently with
// probability p_m.
void polynomial_mutation(Genome& genome, double eta_m, double p_m, Rng& rng);

// SPEA-2 fitness pieces for a merged population+archive pool: strength (how
// many the individual dominates), raw fitness (sum of strengths of its
// dominators), k-nearest-neighbor density, and their sum.
struct Spea2Fitness {
  std::vector<int> strength;
  std::vector<double> raw;
  std::vector<double> density;
  std::vector<double> fitness;
};

Spea2Fitness spea2_fitness(const std::vector<Individual>& pool);

// SPEA-2 environmental selection: keeps the non-dominated members of the
// pool, padding with the best dominated ones when short of archive_size, or
// repeatedly dropping the member with the lexicographically smallest sorted
// neighbor-distance vector when over. Survivors carry their fitness.
std::vector<Individual> environmental_selection(std::vector<Individual> pool,
                                                int archive_size);

// Uniform random genomes, consuming pop_size * dim draws.
std::vector<Genome> initial_population(std::size_t dim, int pop_size, Rng& rng);

// One full variation step: pop_size children bred by binary tournament
// (rank/crowding for NSGA-II, fitness for SPEA-2; ties keep the first-drawn
// candidate), SBX, and polynomial mutation, in a fixed draw order.
std::vector<Genome> make_offspring(const std::vector<Individual>& parents,
                                   const RunConfig& config, double mutation_prob,
                                   Rng& rng);

RunResult nsga2_run(const Scenario& scenario, const RunConfig& config);
RunResult spea2_run(const Scenario& scenario, const RunConfig& config);

// Dispatches on config.algorithm.
RunResult run(const Scenario& scenario, const RunConfig& config);

}  // namespace codnopt
