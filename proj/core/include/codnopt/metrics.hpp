#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "codnopt/evaluate.hpp"
#include "codnopt/scenario.hpp"

namespace codnopt {

// One front member: objective pair, violation, and the genome that produced
// it (kept so extreme solutions can be re-simulated for reporting).
struct FrontPoint {
  double f1 = 0.0;
  double f2_neg = 0.0;
  double cv = 0.0;
  Genome genome;
};

// Non-dominated subset under minimization of (f1, f2_neg); duplicates and
// weakly dominated points are dropped. Result is sorted by f1 ascending.
std::vector<FrontPoint> pareto_filter(std::vector<FrontPoint> points);

// Exact dominated area between a front and a reference point (minimization).
// Dominated input points contribute nothing; every point must strictly
// dominate the reference or std::invalid_argument is thrown. Empty front -> 0.
double hypervolume_2d(const std::vector<std::pair<double, double>>& points,
                      std::pair<double, double> ref);
double hypervolume_2d(const std::vector<FrontPoint>& front,
                      std::pair<double, double> ref);

// Staircase boundaries of the objective region attained by at least 1 run
// (best), by at least half the runs (median), and by all runs (worst).
struct AttainmentSurfaces {
  std::vector<std::pair<double, double>> best;
  std::vector<std::pair<double, double>> median;
  std::vector<std::pair<double, double>> worst;
  int k = 0;  // number of runs
};

AttainmentSurfaces attainment_surfaces(
    const std::vector<std::vector<FrontPoint>>& fronts);

struct VoltageStats {
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation
  double median = 0.0;
};

// Statistics over every bus-period voltage sample of one evaluation.
VoltageStats voltage_stats(const Evaluation& evaluation);

// Cumulative non-dominated store for feasible evaluations, kept sorted by f1
// ascending (f2_neg strictly descending). Insertion rejects weakly dominated
// or duplicate points and evicts points the newcomer dominates.
class ParetoArchive {
 public:
  // Returns true when the point entered the archive.
  bool insert(FrontPoint point);

  const std::vector<FrontPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  std::vector<std::pair<double, double>> objectives() const;

 private:
  std::vector<FrontPoint> points_;
};

// Min-max rescaling of the objective pair onto [0,1]^2, fitted over the union
// of compared fronts so hypervolumes stay comparable across cases. The
// matching hypervolume reference point sits at (1.1, 1.1).
struct ObjectiveNormalization {
  double f1_lo = 0.0;
  double f1_range = 1.0;
  double f2_lo = 0.0;
  double f2_range = 1.0;

  static constexpr std::pair<double, double> kRef{1.1, 1.1};

  static ObjectiveNormalization over(
      const std::vector<std::vector<FrontPoint>>& fronts);
  static ObjectiveNormalization over_pairs(
      const std::vector<std::vector<std::pair<double, double>>>& sets);

  std::pair<double, double> apply(double f1, double f2_neg) const;
};

// Normalized hypervolume of each generation snapshot, under one fixed
// rescaling fitted to the union of all snapshots.
std::vector<double> history_hypervolumes(
    const std::vector<std::vector<std::pair<double, double>>>& history);

// Thrown when an exhaustive enumeration would exceed the evaluation budget.
class OracleTooLarge : public std::runtime_error {
 public:
  explicit OracleTooLarge(const std::string& what) : std::runtime_error(what) {}
};

// Brute-force reference front: evaluates every genome on the uniform
// {0, 1/(levels-1), ..., 1}^D grid (gene 0.5 when levels == 1), keeps the
// feasible points, and Pareto-filters them. Guarded to levels^D <= 1e7.
std::vector<FrontPoint> oracle_front(const Scenario& scenario, int levels);

// ---- File formats -------------------------------------------------------

// front CSV: header "f1,f2_neg,cv", one row per point, full double precision.
void write_front_csv(const std::filesystem::path& path,
                     const std::vector<FrontPoint>& front);
std::vector<FrontPoint> read_front_csv(const std::filesystem::path& path);

// EAF CSV: header "level,f1,f2_neg"; level is best|median|worst.
void write_eaf_csv(const std::filesystem::path& path,
                   const AttainmentSurfaces& surfaces);
AttainmentSurfaces read_eaf_csv(const std::filesystem::path& path);

// stats JSON: {"mean": .., "std": .., "median": ..}.
void write_stats_json(const std::filesystem::path& path,
                      const VoltageStats& stats);
VoltageStats read_stats_json(const std::filesystem::path& path);

// Comma-split rows of a CSV file, skipping blank lines.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace codnopt
