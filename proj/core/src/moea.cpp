#include "codnopt/moea.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "codnopt/threading.hpp"

namespace codnopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSbxEps = 1e-14;

void evaluate_population(const Evaluator& evaluator,
                         std::vector<Individual>& population) {
  parallel_for(population.size(), [&](std::size_t i) {
    population[i].eval = evaluator.evaluate(population[i].genome);
  });
}

std::vector<Individual> to_individuals(std::vector<Genome> genomes) {
  std::vector<Individual> population(genomes.size());
  for (std::size_t i = 0; i < genomes.size(); ++i) {
    population[i].genome = std::move(genomes[i]);
  }
  return population;
}

void insert_feasible(ParetoArchive& elite, const std::vector<Individual>& batch) {
  for (const Individual& ind : batch) {
    if (ind.eval.cv == 0.0) {
      elite.insert({ind.eval.f1, ind.eval.f2_neg, 0.0, ind.genome});
    }
  }
}

// Ranks and crowding distances for a whole population, in place.
void assign_rank_and_crowding(std::vector<Individual>& population) {
  const auto fronts = non_dominated_sort(population);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    const auto dist = crowding_distance(population, fronts[f]);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      population[fronts[f][k]].rank = static_cast<int>(f);
      population[fronts[f][k]].crowding = dist[k];
    }
  }
}

// Least-violating non-dominated subset of an arbitrary population, used only
// when a run never saw a feasible point.
std::vector<FrontPoint> fallback_front(const std::vector<Individual>& population) {
  const auto fronts = non_dominated_sort(population);
  std::vector<FrontPoint> points;
  for (std::size_t idx : fronts.front()) {
    const Individual& ind = population[idx];
    points.push_back({ind.eval.f1, ind.eval.f2_neg, ind.eval.cv, ind.genome});
  }
  return pareto_filter(std::move(points));
}

std::vector<FrontPoint> harvest_front(const ParetoArchive& elite,
                                      const std::vector<Individual>& population) {
  if (!elite.empty()) return elite.points();
  return fallback_front(population);
}

double mutation_rate(const RunConfig& config, std::size_t dim) {
  if (config.mutation_prob) return *config.mutation_prob;
  return dim > 0 ? 1.0 / static_cast<double>(dim) : 0.0;
}

}  // namespace

std::vector<Individual> environmental_selection(std::vector<Individual> pool,
                                                int archive_size) {
  const Spea2Fitness fit = spea2_fitness(pool);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].fitness = fit.fitness[i];

  std::vector<std::size_t> nondominated;
  std::vector<std::size_t> dominated;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    (fit.raw[i] == 0.0 ? nondominated : dominated).push_back(i);
  }

  const std::size_t target = static_cast<std::size_t>(archive_size);
  std::vector<Individual> archive;
  if (nondominated.size() <= target) {
    for (std::size_t idx : nondominated) archive.push_back(std::move(pool[idx]));
    std::stable_sort(dominated.begin(), dominated.end(),
                     [&](std::size_t a, std::size_t b) {
                       return fit.fitness[a] < fit.fitness[b];
                     });
    for (std::size_t idx : dominated) {
      if (archive.size() >= target) break;
      archive.push_back(std::move(pool[idx]));
    }
    return archive;
  }

  // Truncation. Pairwise objective-space distances among the non-dominated
  // members, each with a sorted neighbor list; removals just mark the victim
  // dead and comparisons skip dead entries.
  const std::size_t m = nondominated.size();
  std::vector<std::vector<std::pair<double, std::size_t>>> neighbors(m);
  for (std::size_t a = 0; a < m; ++a) {
    neighbors[a].reserve(m - 1);
    const Evaluation& ea = pool[nondominated[a]].eval;
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      const Evaluation& eb = pool[nondominated[b]].eval;
      const double df1 = ea.f1 - eb.f1;
      const double df2 = ea.f2_neg - eb.f2_neg;
      neighbors[a].emplace_back(df1 * df1 + df2 * df2, b);
    }
    std::sort(neighbors[a].begin(), neighbors[a].end());
  }
  std::vector<char> alive(m, 1);
  std::size_t alive_count = m;

  // True when a's alive-distance vector is lexicographically smaller than b's.
  const auto denser = [&](std::size_t a, std::size_t b) {
    std::size_t ia = 0, ib = 0;
    while (true) {
      while (ia < neighbors[a].size() && !alive[neighbors[a][ia].second]) ++ia;
      while (ib < neighbors[b].size() && !alive[neighbors[b][ib].second]) ++ib;
      const bool has_a = ia < neighbors[a].size();
      const bool has_b = ib < neighbors[b].size();
      if (!has_a || !has_b) return false;  // exhausted: tie
      if (neighbors[a][ia].first != neighbors[b][ib].first) {
        return neighbors[a][ia].first < neighbors[b][ib].first;
      }
      ++ia;
      ++ib;
    }
  };

  while (alive_count > target) {
    std::size_t victim = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      if (victim == m || denser(i, victim)) victim = i;
    }
    alive[victim] = 0;
    --alive_count;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (alive[i]) archive.push_back(std::move(pool[nondominated[i]]));
  }
  return archive;
}

const char* algorithm_name(Algorithm algorithm) {
  return algorithm == Algorithm::nsga2 ? "nsga2" : "spea2";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  if (name == "nsga2") return Algorithm::nsga2;
  if (name == "spea2") return Algorithm::spea2;
  return std::nullopt;
}

void validate_config(const RunConfig& config) {
  if (config.pop_size < 4 || config.pop_size % 2 != 0) {
    throw std::invalid_argument("pop_size must be even and at least 4");
  }
  if (config.generations < 1) {
    throw std::invalid_argument("generations must be at least 1");
  }
  if (config.archive_size < 1) {
    throw std::invalid_argument("archive_size must be at least 1");
  }
  if (config.crossover_prob < 0.0 || config.crossover_prob > 1.0) {
    throw std::invalid_argument("crossover_prob must be in [0,1]");
  }
  if (config.mutation_prob &&
      (*config.mutation_prob < 0.0 || *config.mutation_prob > 1.0)) {
    throw std::invalid_argument("mutation_prob must be in [0,1]");
  }
  if (config.crossover_eta <= 0.0 || config.mutation_eta <= 0.0) {
    throw std::invalid_argument("distribution indices must be positive");
  }
}

bool constrained_dominates(const Evaluation& a, const Evaluation& b) {
  const bool a_feasible = a.cv == 0.0;
  const bool b_feasible = b.cv == 0.0;
  if (a_feasible != b_feasible) return a_feasible;
  if (!a_feasible) return a.cv < b.cv;
  const bool no_worse = a.f1 <= b.f1 && a.f2_neg <= b.f2_neg;
  const bool better = a.f1 < b.f1 || a.f2_neg < b.f2_neg;
  return no_worse && better;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(
    const std::vector<Individual>& population) {
  const std::size_t n = population.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<int> domination_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (constrained_dominates(population[i].eval, population[j].eval)) {
        dominated_by[i].push_back(j);
        ++domination_count[j];
      } else if (constrained_dominates(population[j].eval, population[i].eval)) {
        dominated_by[j].push_back(i);
        ++domination_count[i];
      }
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (domination_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated_by[i]) {
        if (--domination_count[j] == 0) next.push_back(j);
      }
    }
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Individual>& population,
                                      const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  std::vector<double> distance(m, 0.0);
  if (m <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  std::vector<std::size_t> order(m);
  for (const auto objective : {0, 1}) {
    const auto value = [&](std::size_t pos) {
      const Evaluation& e = population[front[pos]].eval;
      return objective == 0 ? e.f1 : e.f2_neg;
    };
    for (std::size_t k = 0; k < m; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return value(a) < value(b);
                     });
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    const double range = value(order.back()) - value(order.front());
    if (range <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < m; ++k) {
      if (distance[order[k]] == kInf) continue;
      distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
    }
  }
  return distance;
}

void sbx_crossover(const Genome& parent1, const Genome& parent2, double eta_c,
                   double prob, Rng& rng, Genome& child1, Genome& child2) {
  child1 = parent1;
  child2 = parent2;
  if (parent1.size() != parent2.size()) {
    throw std::invalid_argument("parents must have equal genome length");
  }
  if (parent1.empty() || rng.uniform01() > prob) return;
  for (std::size_t i = 0; i < parent1.size(); ++i) {
    if (rng.uniform01() > 0.5) continue;
    const double y1 = std::min(parent1[i], parent2[i]);
    const double y2 = std::max(parent1[i], parent2[i]);
    if (y2 - y1 < kSbxEps) continue;
    const double u = rng.uniform01();
    const double exponent = 1.0 / (eta_c + 1.0);

    // Boundary-aware spread factors for the [0,1] box.
    const auto spread = [&](double beta) {
      const double alpha = 2.0 - std::pow(beta, -(eta_c + 1.0));
      return (u <= 1.0 / alpha)
                 ? std::pow(u * alpha, exponent)
                 : std::pow(1.0 / (2.0 - u * alpha), exponent);
    };
    const double betaq_low = spread(1.0 + 2.0 * y1 / (y2 - y1));
    const double betaq_high = spread(1.0 + 2.0 * (1.0 - y2) / (y2 - y1));
    double low = 0.5 * ((y1 + y2) - betaq_low * (y2 - y1));
    double high = 0.5 * ((y1 + y2) + betaq_high * (y2 - y1));
    low = std::clamp(low, 0.0, 1.0);
    high = std::clamp(high, 0.0, 1.0);
    if (rng.uniform01() <= 0.5) {
      child1[i] = high;
      child2[i] = low;
    } else {
      child1[i] = low;
      child2[i] = high;
    }
  }
}

void polynomial_mutation(Genome& genome, double eta_m, double p_m, Rng& rng) {
  for (double& gene : genome) {
    if (rng.uniform01() > p_m) continue;
    const double y = gene;
    const double u = rng.uniform01();
    const double mut_pow = 1.0 / (eta_m + 1.0);
    double deltaq;
    if (u <= 0.5) {
      const double xy = 1.0 - y;
      const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta_m + 1.0);
      deltaq = std::pow(val, mut_pow) - 1.0;
    } else {
      const double xy = y;
      const double val =
          2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta_m + 1.0);
      deltaq = 1.0 - std::pow(val, mut_pow);
    }
    gene = std::clamp(y + deltaq, 0.0, 1.0);
  }
}

Spea2Fitness spea2_fitness(const std::vector<Individual>& pool) {
  const std::size_t n = pool.size();
  Spea2Fitness fit;
  fit.strength.assign(n, 0);
  fit.raw.assign(n, 0.0);
  fit.density.assign(n, 0.0);
  fit.fitness.assign(n, 0.0);

  std::vector<std::vector<std::size_t>> dominators(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (constrained_dominates(pool[i].eval, pool[j].eval)) {
        ++fit.strength[i];
        dominators[j].push_back(i);
      } else if (constrained_dominates(pool[j].eval, pool[i].eval)) {
        ++fit.strength[j];
        dominators[i].push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d : dominators[i]) {
      fit.raw[i] += static_cast<double>(fit.strength[d]);
    }
  }

  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  std::vector<double> dists;
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double df1 = pool[i].eval.f1 - pool[j].eval.f1;
      const double df2 = pool[i].eval.f2_neg - pool[j].eval.f2_neg;
      dists.push_back(std::sqrt(df1 * df1 + df2 * df2));
    }
    double sigma_k = 0.0;
    if (!dists.empty()) {
      const std::size_t kth = std::min(k, dists.size()) - 1;
      std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(kth),
                       dists.end());
      sigma_k = dists[kth];
    }
    fit.density[i] = 1.0 / (sigma_k + 2.0);
    fit.fitness[i] = fit.raw[i] + fit.density[i];
  }
  return fit;
}

std::vector<Genome> initial_population(std::size_t dim, int pop_size, Rng& rng) {
  std::vector<Genome> genomes(static_cast<std::size_t>(pop_size));
  for (Genome& genome : genomes) {
    genome.resize(dim);
    for (double& gene : genome) gene = rng.uniform01();
  }
  return genomes;
}

std::vector<Genome> make_offspring(const std::vector<Individual>& parents,
                                   const RunConfig& config, double mutation_prob,
                                   Rng& rng) {
  if (parents.empty()) throw std::invalid_argument("no parents to breed from");
  const auto better = [&](const Individual& a, const Individual& b) {
    if (config.algorithm == Algorithm::spea2) return a.fitness < b.fitness;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
  };
  const auto tournament = [&]() -> const Individual& {
    const Individual& first = parents[rng.uniform_index(parents.size())];
    const Individual& second = parents[rng.uniform_index(parents.size())];
    return better(second, first) ? second : first;
  };

  std::vector<Genome> children;
  children.reserve(static_cast<std::size_t>(config.pop_size));
  Genome child1, child2;
  for (int pair = 0; pair < config.pop_size / 2; ++pair) {
    const Individual& a = tournament();
    const Individual& b = tournament();
    sbx_crossover(a.genome, b.genome, config.crossover_eta,
                  config.crossover_prob, rng, child1, child2);
    polynomial_mutation(child1, config.mutation_eta, mutation_prob, rng);
    polynomial_mutation(child2, config.mutation_eta, mutation_prob, rng);
    children.push_back(child1);
    children.push_back(child2);
  }
  return children;
}

RunResult nsga2_run(const Scenario& scenario, const RunConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  const Evaluator evaluator{scenario};
  const double p_m = mutation_rate(config, evaluator.genome_length());
  Rng rng(config.seed);

  std::vector<Individual> population = to_individuals(
      initial_population(evaluator.genome_length(), config.pop_size, rng));
  evaluate_population(evaluator, population);
  ParetoArchive elite;
  insert_feasible(elite, population);
  assign_rank_and_crowding(population);

  RunResult result;
  result.history.push_back(elite.objectives());

  for (int gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> children =
        to_individuals(make_offspring(population, config, p_m, rng));
    evaluate_population(evaluator, children);
    insert_feasible(elite, children);

    std::vector<Individual> merged = std::move(population);
    merged.reserve(merged.size() + children.size());
    for (Individual& child : children) merged.push_back(std::move(child));

    const auto fronts = non_dominated_sort(merged);
    std::vector<Individual> next;
    next.reserve(static_cast<std::size_t>(config.pop_size));
    for (std::size_t f = 0; f < fronts.size() &&
                            next.size() < static_cast<std::size_t>(config.pop_size);
         ++f) {
      const auto& front = fronts[f];
      const auto dist = crowding_distance(merged, front);
      std::vector<std::size_t> positions(front.size());
      for (std::size_t k = 0; k < front.size(); ++k) positions[k] = k;
      if (next.size() + front.size() > static_cast<std::size_t>(config.pop_size)) {
        // Partial front: most-spread members first; ties keep merge order.
        std::stable_sort(positions.begin(), positions.end(),
                         [&](std::size_t a, std::size_t b) {
                           return dist[a] > dist[b];
                         });
      }
      for (std::size_t pos : positions) {
        if (next.size() >= static_cast<std::size_t>(config.pop_size)) break;
        Individual& ind = merged[front[pos]];
        ind.rank = static_cast<int>(f);
        ind.crowding = dist[pos];
        next.push_back(std::move(ind));
      }
    }
    population = std::move(next);
    result.history.push_back(elite.objectives());
  }

  result.final_front = harvest_front(elite, population);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

RunResult spea2_run(const Scenario& scenario, const RunConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  const Evaluator evaluator{scenario};
  const double p_m = mutation_rate(config, evaluator.genome_length());
  Rng rng(config.seed);

  std::vector<Individual> population = to_individuals(
      initial_population(evaluator.genome_length(), config.pop_size, rng));
  evaluate_population(evaluator, population);
  ParetoArchive elite;
  insert_feasible(elite, population);
  std::vector<Individual> archive =
      environmental_selection(std::move(population), config.archive_size);

  RunResult result;
  result.history.push_back(elite.objectives());

  for (int gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> children =
        to_individuals(make_offspring(archive, config, p_m, rng));
    evaluate_population(evaluator, children);
    insert_feasible(elite, children);

    std::vector<Individual> pool = std::move(archive);
    pool.reserve(pool.size() + children.size());
    for (Individual& child : children) pool.push_back(std::move(child));
    archive = environmental_selection(std::move(pool), config.archive_size);
    result.history.push_back(elite.objectives());
  }

  result.final_front = harvest_front(elite, archive);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

RunResult run(const Scenario& scenario, const RunConfig& config) {
  return config.algorithm == Algorithm::nsga2 ? nsga2_run(scenario, config)
                                              : spea2_run(scenario, config);
}

}  // namespace codnopt
