#include "codnopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace codnopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Non-dominated sweep over (f1, f2) pairs, minimization; returns indices into
// the input, sorted by f1 ascending.
std::vector<std::size_t> nondominated_indices(
    const std::vector<std::pair<double, double>>& points) {
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].first != points[b].first) {
      return points[a].first < points[b].first;
    }
    return points[a].second < points[b].second;
  });
  std::vector<std::size_t> keep;
  double best_f2 = kInf;
  for (std::size_t idx : order) {
    if (points[idx].second < best_f2) {
      keep.push_back(idx);
      best_f2 = points[idx].second;
    }
  }
  return keep;
}

}  // namespace

std::vector<FrontPoint> pareto_filter(std::vector<FrontPoint> points) {
  std::vector<std::pair<double, double>> objs;
  objs.reserve(points.size());
  for (const FrontPoint& p : points) objs.emplace_back(p.f1, p.f2_neg);
  std::vector<FrontPoint> out;
  for (std::size_t idx : nondominated_indices(objs)) {
    out.push_back(std::move(points[idx]));
  }
  return out;
}

double hypervolume_2d(const std::vector<std::pair<double, double>>& points,
                      std::pair<double, double> ref) {
  for (const auto& p : points) {
    if (!(p.first < ref.first && p.second < ref.second)) {
      throw std::invalid_argument(
          "front point does not strictly dominate the reference point");
    }
  }
  const std::vector<std::size_t> keep = nondominated_indices(points);
  double area = 0.0;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto& p = points[keep[k]];
    const double right = (k + 1 < keep.size()) ? points[keep[k + 1]].first
                                               : ref.first;
    area += (right - p.first) * (ref.second - p.second);
  }
  return area;
}

double hypervolume_2d(const std::vector<FrontPoint>& front,
                      std::pair<double, double> ref) {
  std::vector<std::pair<double, double>> objs;
  objs.reserve(front.size());
  for (const FrontPoint& p : front) objs.emplace_back(p.f1, p.f2_neg);
  return hypervolume_2d(objs, ref);
}

AttainmentSurfaces attainment_surfaces(
    const std::vector<std::vector<FrontPoint>>& fronts) {
  if (fronts.empty()) {
    throw std::invalid_argument("attainment surfaces need at least one run");
  }
  const int k = static_cast<int>(fronts.size());

  // Per run, the prefix-min staircase g_r(x) = best f2 among points with
  // f1 <= x. A run attains (x, y) exactly when g_r(x) <= y.
  struct Stair {
    std::vector<double> x;  // sorted f1 values
    std::vector<double> y;  // prefix-min f2 at each x
  };
  std::vector<Stair> stairs;
  std::vector<double> xs;
  for (const auto& front : fronts) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(front.size());
    for (const FrontPoint& p : front) {
      pts.emplace_back(p.f1, p.f2_neg);
      xs.push_back(p.f1);
    }
    std::sort(pts.begin(), pts.end());
    Stair s;
    double best = kInf;
    for (const auto& p : pts) {
      best = std::min(best, p.second);
      s.x.push_back(p.first);
      s.y.push_back(best);
    }
    stairs.push_back(std::move(s));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // The level-j boundary follows the j-th smallest staircase value at each
  // grid abscissa; vertices are emitted only where it actually steps down.
  auto level_curve = [&](int level) {
    std::vector<std::pair<double, double>> curve;
    std::vector<double> values(static_cast<std::size_t>(k));
    double prev = kInf;
    for (double x : xs) {
      for (int r = 0; r < k; ++r) {
        const Stair& s = stairs[static_cast<std::size_t>(r)];
        const auto it = std::upper_bound(s.x.begin(), s.x.end(), x);
        values[static_cast<std::size_t>(r)] =
            (it == s.x.begin()) ? kInf
                                : s.y[static_cast<std::size_t>(
                                      (it - s.x.begin()) - 1)];
      }
      std::nth_element(values.begin(), values.begin() + (level - 1),
                       values.end());
      const double y = values[static_cast<std::size_t>(level - 1)];
      if (y < prev) {
        curve.emplace_back(x, y);
        prev = y;
      }
    }
    return curve;
  };

  AttainmentSurfaces out;
  out.k = k;
  out.best = level_curve(1);
  out.median = level_curve((k + 1) / 2);
  out.worst = level_curve(k);
  return out;
}

VoltageStats voltage_stats(const Evaluation& evaluation) {
  std::vector<double> samples;
  for (const auto& period : evaluation.voltages) {
    samples.insert(samples.end(), period.begin(), period.end());
  }
  VoltageStats stats;
  if (samples.empty()) return stats;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  stats.mean = sum / n;
  double sq = 0.0;
  for (double v : samples) sq += (v - stats.mean) * (v - stats.mean);
  stats.std_dev = std::sqrt(sq / n);
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  stats.median = (samples.size() % 2 == 1)
                     ? samples[mid]
                     : 0.5 * (samples[mid - 1] + samples[mid]);
  return stats;
}

bool ParetoArchive::insert(FrontPoint point) {
  auto pos = std::lower_bound(
      points_.begin(), points_.end(), point.f1,
      [](const FrontPoint& q, double f1) { return q.f1 < f1; });
  if (pos != points_.begin() && std::prev(pos)->f2_neg <= point.f2_neg) {
    return false;  // weakly dominated by the nearest point on the left
  }
  if (pos != points_.end() && pos->f1 == point.f1 &&
      pos->f2_neg <= point.f2_neg) {
    return false;
  }
  auto last = pos;
  while (last != points_.end() && last->f2_neg >= point.f2_neg) ++last;
  pos = points_.erase(pos, last);
  points_.insert(pos, std::move(point));
  return true;
}

std::vector<std::pair<double, double>> ParetoArchive::objectives() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(points_.size());
  for (const FrontPoint& p : points_) out.emplace_back(p.f1, p.f2_neg);
  return out;
}

ObjectiveNormalization ObjectiveNormalization::over(
    const std::vector<std::vector<FrontPoint>>& fronts) {
  std::vector<std::vector<std::pair<double, double>>> sets;
  sets.reserve(fronts.size());
  for (const auto& front : fronts) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(front.size());
    for (const FrontPoint& p : front) pairs.emplace_back(p.f1, p.f2_neg);
    sets.push_back(std::move(pairs));
  }
  return over_pairs(sets);
}

ObjectiveNormalization ObjectiveNormalization::over_pairs(
    const std::vector<std::vector<std::pair<double, double>>>& sets) {
  double f1_lo = kInf, f1_hi = -kInf, f2_lo = kInf, f2_hi = -kInf;
  for (const auto& set : sets) {
    for (const auto& p : set) {
      f1_lo = std::min(f1_lo, p.first);
      f1_hi = std::max(f1_hi, p.first);
      f2_lo = std::min(f2_lo, p.second);
      f2_hi = std::max(f2_hi, p.second);
    }
  }
  ObjectiveNormalization norm;
  if (f1_lo > f1_hi) return norm;  // no points: identity mapping
  norm.f1_lo = f1_lo;
  norm.f2_lo = f2_lo;
  norm.f1_range = (f1_hi > f1_lo) ? f1_hi - f1_lo : 1.0;
  norm.f2_range = (f2_hi > f2_lo) ? f2_hi - f2_lo : 1.0;
  return norm;
}

std::pair<double, double> ObjectiveNormalization::apply(double f1,
                                                        double f2_neg) const {
  return {(f1 - f1_lo) / f1_range, (f2_neg - f2_lo) / f2_range};
}

std::vector<double> history_hypervolumes(
    const std::vector<std::vector<std::pair<double, double>>>& history) {
  const ObjectiveNormalization norm =
      ObjectiveNormalization::over_pairs(history);
  std::vector<double> hv;
  hv.reserve(history.size());
  for (const auto& snapshot : history) {
    std::vector<std::pair<double, double>> scaled;
    scaled.reserve(snapshot.size());
    for (const auto& p : snapshot) scaled.push_back(norm.apply(p.first, p.second));
    hv.push_back(hypervolume_2d(scaled, ObjectiveNormalization::kRef));
  }
  return hv;
}

std::vector<FrontPoint> oracle_front(const Scenario& scenario, int levels) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  const Evaluator evaluator{scenario};
  const std::size_t dim = evaluator.genome_length();
  double total = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    total *= static_cast<double>(levels);
    if (total > 1e7) {
      throw OracleTooLarge("grid of " + std::to_string(levels) + "^" +
                           std::to_string(dim) +
                           " genomes exceeds the 1e7 evaluation budget");
    }
  }

  const double step = levels > 1 ? 1.0 / static_cast<double>(levels - 1) : 0.0;
  const auto gene_value = [&](int digit) {
    return levels > 1 ? static_cast<double>(digit) * step : 0.5;
  };
  std::vector<int> digits(dim, 0);
  Genome genome(dim, gene_value(0));

  ParetoArchive archive;
  while (true) {
    const Evaluation e = evaluator.evaluate(genome);
    if (e.cv == 0.0) archive.insert({e.f1, e.f2_neg, 0.0, genome});
    std::size_t pos = 0;
    while (pos < dim) {
      if (++digits[pos] < levels) {
        genome[pos] = gene_value(digits[pos]);
        break;
      }
      digits[pos] = 0;
      genome[pos] = gene_value(0);
      ++pos;
    }
    if (pos == dim) break;
  }
  return archive.points();
}

void write_front_csv(const std::filesystem::path& path,
                     const std::vector<FrontPoint>& front) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "f1,f2_neg,cv\n";
  for (const FrontPoint& p : front) {
    out << fmt(p.f1) << "," << fmt(p.f2_neg) << "," << fmt(p.cv) << "\n";
  }
}

std::vector<FrontPoint> read_front_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty() || rows.front() != std::vector<std::string>{"f1", "f2_neg", "cv"}) {
    throw std::runtime_error(path.string() + ": not a front CSV");
  }
  std::vector<FrontPoint> front;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw std::runtime_error(path.string() + ": malformed row " +
                               std::to_string(i + 1));
    }
    front.push_back(
        {std::stod(rows[i][0]), std::stod(rows[i][1]), std::stod(rows[i][2]), {}});
  }
  return front;
}

void write_eaf_csv(const std::filesystem::path& path,
                   const AttainmentSurfaces& surfaces) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "level,f1,f2_neg\n";
  const auto dump = [&](const char* level,
                        const std::vector<std::pair<double, double>>& curve) {
    for (const auto& p : curve) {
      out << level << "," << fmt(p.first) << "," << fmt(p.second) << "\n";
    }
  };
  dump("best", surfaces.best);
  dump("median", surfaces.median);
  dump("worst", surfaces.worst);
}

AttainmentSurfaces read_eaf_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty() ||
      rows.front() != std::vector<std::string>{"level", "f1", "f2_neg"}) {
    throw std::runtime_error(path.string() + ": not an EAF CSV");
  }
  AttainmentSurfaces surfaces;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) {
      throw std::runtime_error(path.string() + ": malformed row " +
                               std::to_string(i + 1));
    }
    const std::pair<double, double> p{std::stod(rows[i][1]),
                                      std::stod(rows[i][2])};
    if (rows[i][0] == "best") {
      surfaces.best.push_back(p);
    } else if (rows[i][0] == "median") {
      surfaces.median.push_back(p);
    } else if (rows[i][0] == "worst") {
      surfaces.worst.push_back(p);
    } else {
      throw std::runtime_error(path.string() + ": unknown level " + rows[i][0]);
    }
  }
  return surfaces;
}

void write_stats_json(const std::filesystem::path& path,
                      const VoltageStats& stats) {
  nlohmann::ordered_json j;
  j["mean"] = stats.mean;
  j["std"] = stats.std_dev;
  j["median"] = stats.median;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

VoltageStats read_stats_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  in >> j;
  return {j.at("mean").get<double>(), j.at("std").get<double>(),
          j.at("median").get<double>()};
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace codnopt
