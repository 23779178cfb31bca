#pragma once

#include <string>
#include <vector>

namespace codnopt {

struct Bus {
  int id = 0;
  double v_min = 0.95;  // p.u.
  double v_max = 1.05;  // p.u.
};

struct Branch {
  int from = 0;  // upstream bus
  int to = 0;    // downstream bus
  double r = 0.0;  // p.u.
  double x = 0.0;  // p.u.
};

// Radial network rooted at bus 0 (the slack/substation bus). Buses are
// indexed 0..n-1 and branches are oriented away from the root.
struct FeederNetwork {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  double v0 = 1.0;  // slack voltage, p.u.

  std::size_t bus_count() const { return buses.size(); }
};

// Per-branch flows and per-bus voltages for one period. Positive branch flow
// points downstream, toward net load.
struct FlowSolution {
  std::vector<double> branch_p;
  std::vector<double> branch_q;
  std::vector<double> voltages;
};

enum class TopologyIssue {
  ok,
  bad_bus_id,
  duplicate_branch,
  oriented_toward_root,
  cycle,
  disconnected,
};

struct TopologyCheck {
  TopologyIssue issue = TopologyIssue::ok;
  std::string detail;

  bool ok() const { return issue == TopologyIssue::ok; }
};

// Checks that the branches form a spanning tree rooted at bus 0 with every
// edge oriented away from the root.
TopologyCheck validate_radial(const FeederNetwork& network);

// Linearized DistFlow on a fixed radial network. Branch flows are subtree
// sums of net injections (positive injection = generation), voltages follow
// one root-to-leaf sweep of V_child = V_parent - (r*P + x*Q)/v0.
class RadialSolver {
 public:
  // Throws std::invalid_argument when validate_radial fails.
  explicit RadialSolver(FeederNetwork network);

  FlowSolution solve(const std::vector<double>& injection_p,
                     const std::vector<double>& injection_q) const;

  // Same as solve() but reuses the caller's buffers.
  void solve_into(const std::vector<double>& injection_p,
                  const std::vector<double>& injection_q,
                  FlowSolution& out) const;

  const FeederNetwork& network() const { return network_; }

 private:
  FeederNetwork network_;
  std::vector<int> order_;          // buses, root first, parents before children
  std::vector<int> parent_bus_;     // -1 for the root
  std::vector<int> parent_branch_;  // branch feeding each bus, -1 for the root
};

// One-shot convenience: validates, then solves.
FlowSolution solve_distflow(const FeederNetwork& network,
                            const std::vector<double>& injection_p,
                            const std::vector<double>& injection_q);

}  // namespace codnopt
