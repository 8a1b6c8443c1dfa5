/// Min-cost flow by successive shortest paths with Johnson potentials.
/// Arc costs must be nonnegative; capacities may be infinite. This is the
/// engine behind the convex flow solver and the transport plans.
#pragma once

#include <limits>
#include <vector>

#include "homflow/common.hpp"

namespace homflow::mincost {

constexpr double kInfCap = std::numeric_limits<double>::infinity();

struct Network {
  explicit Network(int num_nodes) : supply(num_nodes, 0.0), num_nodes_(num_nodes) {}

  /// Directed arc tail -> head with capacity in [0, cap] and unit cost.
  /// Returns an arc id usable with flow_of().
  int add_arc(int tail, int head, double cap, double cost);

  std::vector<double> supply;  // positive = source

  int num_nodes() const { return num_nodes_; }
  int num_arcs() const { return static_cast<int>(arcs_.size()) / 2; }

  struct Arc {
    int head;
    double cap;   // residual capacity
    double cost;
    int twin;
  };
  std::vector<Arc> arcs_;                 // forward arcs at even indices
  std::vector<std::vector<int>> out_;     // node -> arc ids

 private:
  int num_nodes_ = 0;
};

struct FlowResult {
  bool feasible = false;
  double cost = 0;
  std::vector<double> flow;  // per forward arc id
};

/// Solves min-cost flow for the node supplies; supplies must balance to zero
/// (within `tol`) or the result is infeasible. All costs must be >= 0.
/// Single-shot: residual capacities of `net` are consumed by the solve.
FlowResult solve(Network& net, double tol = 1e-10);

}  // namespace homflow::mincost
