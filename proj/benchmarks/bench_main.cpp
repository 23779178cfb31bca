#include <benchmark/benchmark.h>

#include <cstddef>
#include <utility>
#include <vector>

#include "codnopt/evaluate.hpp"
#include "codnopt/feeder.hpp"
#include "codnopt/metrics.hpp"
#include "codnopt/moea.hpp"
#include "codnopt/rng.hpp"
#include "codnopt/scenario.hpp"

namespace {

codnopt::Scenario synthetic(int n_buses, int n_batteries, std::uint64_t seed) {
  codnopt::SynthParams params;
  params.n_buses = n_buses;
  params.prosumer_ratio = 0.4;
  params.peak_load_p_kw = 50.0 * n_buses;
  params.peak_load_q_kvar = 20.0 * n_buses;
  params.n_batteries = n_batteries;
  params.seed = seed;
  return codnopt::generate_synthetic(params);
}

codnopt::Genome random_genome(std::size_t dim, codnopt::Rng& rng) {
  codnopt::Genome genome(dim);
  for (double& gene : genome) gene = rng.uniform01();
  return genome;
}

// One linearized power-flow solve per period is the innermost hot loop.
void BM_distflow_solve(benchmark::State& state) {
  const auto scenario = synthetic(static_cast<int>(state.range(0)), 0, 7);
  const codnopt::RadialSolver solver(scenario.network);
  const std::size_t n = scenario.network.bus_count();

  codnopt::Rng rng(1);
  std::vector<double> inj_p(n, 0.0), inj_q(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    inj_p[i] = rng.uniform(-1.0, 1.0);
    inj_q[i] = rng.uniform(-0.5, 0.5);
  }

  codnopt::FlowSolution out;
  for (auto _ : state) {
    solver.solve_into(inj_p, inj_q, out);
    benchmark::DoNotOptimize(out.voltages.data());
  }
}
BENCHMARK(BM_distflow_solve)->Arg(12)->Arg(118);

// Full genome scoring: decode, battery simulation, T power flows, objectives.
void BM_evaluate(benchmark::State& state) {
  const auto scenario = synthetic(static_cast<int>(state.range(0)), 2, 7);
  const codnopt::Evaluator evaluator(scenario);

  codnopt::Rng rng(2);
  std::vector<codnopt::Genome> genomes;
  for (int i = 0; i < 16; ++i) {
    genomes.push_back(random_genome(evaluator.genome_length(), rng));
  }

  std::size_t next = 0;
  for (auto _ : state) {
    const auto eval = evaluator.evaluate(genomes[next]);
    benchmark::DoNotOptimize(eval.f1);
    next = (next + 1) % genomes.size();
  }
}
BENCHMARK(BM_evaluate)->Arg(12)->Arg(118);

// Ranking cost per generation on a merged parent+offspring pool.
void BM_non_dominated_sort(benchmark::State& state) {
  codnopt::Rng rng(3);
  std::vector<codnopt::Individual> population(
      static_cast<std::size_t>(state.range(0)));
  for (auto& member : population) {
    member.eval.f1 = rng.uniform01();
    member.eval.f2_neg = rng.uniform01();
    member.eval.cv = rng.uniform01() < 0.5 ? 0.0 : rng.uniform01();
  }

  for (auto _ : state) {
    const auto fronts = codnopt::non_dominated_sort(population);
    benchmark::DoNotOptimize(fronts.size());
  }
}
BENCHMARK(BM_non_dominated_sort)->Arg(100)->Arg(200);

void BM_hypervolume(benchmark::State& state) {
  codnopt::Rng rng(4);
  std::vector<std::pair<double, double>> points(
      static_cast<std::size_t>(state.range(0)));
  for (auto& point : points) {
    point = {rng.uniform01(), rng.uniform01()};
  }

  for (auto _ : state) {
    const double hv = codnopt::hypervolume_2d(points, {1.1, 1.1});
    benchmark::DoNotOptimize(hv);
  }
}
BENCHMARK(BM_hypervolume)->Arg(100)->Arg(1000);

// Variation cost per child pair at 118-bus genome length.
void BM_sbx_and_mutation(benchmark::State& state) {
  const auto scenario = synthetic(118, 5, 7);
  const std::size_t dim = codnopt::genome_length(scenario);

  codnopt::Rng rng(5);
  const codnopt::Genome parent1 = random_genome(dim, rng);
  const codnopt::Genome parent2 = random_genome(dim, rng);
  codnopt::Genome child1, child2;
  const double p_m = 1.0 / static_cast<double>(dim);

  for (auto _ : state) {
    codnopt::sbx_crossover(parent1, parent2, 15.0, 0.9, rng, child1, child2);
    codnopt::polynomial_mutation(child1, 20.0, p_m, rng);
    codnopt::polynomial_mutation(child2, 20.0, p_m, rng);
    benchmark::DoNotOptimize(child1.data());
    benchmark::DoNotOptimize(child2.data());
  }
}
BENCHMARK(BM_sbx_and_mutation);

}  // namespace

BENCHMARK_MAIN();
