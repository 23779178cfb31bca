#include "codnopt/feeder.hpp"

#include <queue>
#include <set>
#include <stdexcept>
#include <utility>

namespace codnopt {

namespace {

std::string bus_pair(int from, int to) {
  return std::to_string(from) + "->" + std::to_string(to);
}

}  // namespace

TopologyCheck validate_radial(const FeederNetwork& network) {
  const int n = static_cast<int>(network.buses.size());
  if (n == 0) {
    return {TopologyIssue::bad_bus_id, "network has no buses"};
  }
  for (int i = 0; i < n; ++i) {
    if (network.buses[i].id != i) {
      return {TopologyIssue::bad_bus_id,
              "bus ids must be 0..n-1 in order; slot " + std::to_string(i) +
                  " holds id " + std::to_string(network.buses[i].id)};
    }
  }
  for (const Branch& b : network.branches) {
    if (b.from < 0 || b.from >= n || b.to < 0 || b.to >= n) {
      return {TopologyIssue::bad_bus_id,
              "branch " + bus_pair(b.from, b.to) + " references an unknown bus"};
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const Branch& b : network.branches) {
    const int lo = std::min(b.from, b.to);
    const int hi = std::max(b.from, b.to);
    if (!seen.insert({lo, hi}).second) {
      return {TopologyIssue::duplicate_branch,
              "branch " + bus_pair(b.from, b.to) + " appears more than once"};
    }
  }

  // BFS from the root along branch orientation. A traversed edge that lands
  // on an already-fed bus closes a loop; an unreached bus is either cut off
  // entirely or sits behind a branch pointing the wrong way.
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < network.branches.size(); ++e) {
    children[static_cast<std::size_t>(network.branches[e].from)].push_back(
        static_cast<int>(e));
  }
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  visited[0] = 1;
  std::queue<int> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    const int bus = frontier.front();
    frontier.pop();
    for (int e : children[static_cast<std::size_t>(bus)]) {
      const Branch& b = network.branches[static_cast<std::size_t>(e)];
      if (visited[static_cast<std::size_t>(b.to)]) {
        return {TopologyIssue::cycle,
                "bus " + std::to_string(b.to) + " is fed twice (via branch " +
                    bus_pair(b.from, b.to) + ")"};
      }
      visited[static_cast<std::size_t>(b.to)] = 1;
      frontier.push(b.to);
    }
  }
  for (int i = 1; i < n; ++i) {
    if (visited[static_cast<std::size_t>(i)]) continue;
    for (const Branch& b : network.branches) {
      if (!visited[static_cast<std::size_t>(b.from)] &&
          visited[static_cast<std::size_t>(b.to)]) {
        return {TopologyIssue::oriented_toward_root,
                "branch " + bus_pair(b.from, b.to) +
                    " points back toward the root; flip it to feed bus " +
                    std::to_string(b.from)};
      }
    }
    return {TopologyIssue::disconnected,
            "bus " + std::to_string(i) + " is not reachable from the root"};
  }
  if (static_cast<int>(network.branches.size()) != n - 1) {
    // Unreachable in practice: a clean traversal pins the edge count.
    return {TopologyIssue::duplicate_branch,
            "branch count does not match a spanning tree"};
  }
  return {};
}

RadialSolver::RadialSolver(FeederNetwork network) : network_(std::move(network)) {
  const TopologyCheck check = validate_radial(network_);
  if (!check.ok()) {
    throw std::invalid_argument("radial network invalid: " + check.detail);
  }
  const std::size_t n = network_.buses.size();
  parent_bus_.assign(n, -1);
  parent_branch_.assign(n, -1);
  std::vector<std::vector<int>> children(n);
  for (std::size_t e = 0; e < network_.branches.size(); ++e) {
    children[static_cast<std::size_t>(network_.branches[e].from)].push_back(
        static_cast<int>(e));
  }
  order_.reserve(n);
  order_.push_back(0);
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const int bus = order_[head];
    for (int e : children[static_cast<std::size_t>(bus)]) {
      const Branch& b = network_.branches[static_cast<std::size_t>(e)];
      parent_bus_[static_cast<std::size_t>(b.to)] = bus;
      parent_branch_[static_cast<std::size_t>(b.to)] = e;
      order_.push_back(b.to);
    }
  }
}

FlowSolution RadialSolver::solve(const std::vector<double>& injection_p,
                                 const std::vector<double>& injection_q) const {
  FlowSolution out;
  solve_into(injection_p, injection_q, out);
  return out;
}

void RadialSolver::solve_into(const std::vector<double>& injection_p,
                              const std::vector<double>& injection_q,
                              FlowSolution& out) const {
  const std::size_t n = network_.buses.size();
  if (injection_p.size() != n || injection_q.size() != n) {
    throw std::invalid_argument("injection vectors must have one entry per bus");
  }
  out.branch_p.assign(network_.branches.size(), 0.0);
  out.branch_q.assign(network_.branches.size(), 0.0);
  out.voltages.assign(n, network_.v0);

  // Leaves-to-root pass: accumulate subtree net injections, then negate so a
  // net-consuming subtree draws positive flow through its feeding branch.
  std::vector<double>& subtree_p = out.branch_p;
  std::vector<double>& subtree_q = out.branch_q;
  for (std::size_t k = n; k-- > 1;) {
    const std::size_t bus = static_cast<std::size_t>(order_[k]);
    const std::size_t e = static_cast<std::size_t>(parent_branch_[bus]);
    subtree_p[e] += injection_p[bus];
    subtree_q[e] += injection_q[bus];
    const int up = parent_branch_[static_cast<std::size_t>(parent_bus_[bus])];
    if (up >= 0) {
      subtree_p[static_cast<std::size_t>(up)] += subtree_p[e];
      subtree_q[static_cast<std::size_t>(up)] += subtree_q[e];
    }
  }
  for (std::size_t e = 0; e < out.branch_p.size(); ++e) {
    out.branch_p[e] = -out.branch_p[e];
    out.branch_q[e] = -out.branch_q[e];
  }

  // Root-to-leaves pass: linearized voltage drop along each feeding branch.
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t bus = static_cast<std::size_t>(order_[k]);
    const std::size_t e = static_cast<std::size_t>(parent_branch_[bus]);
    const Branch& b = network_.branches[e];
    out.voltages[bus] =
        out.voltages[static_cast<std::size_t>(parent_bus_[bus])] -
        (b.r * out.branch_p[e] + b.x * out.branch_q[e]) / network_.v0;
  }
}

FlowSolution solve_distflow(const FeederNetwork& network,
                            const std::vector<double>& injection_p,
                            const std::vector<double>& injection_q) {
  return RadialSolver(network).solve(injection_p, injection_q);
}

}  // namespace codnopt
