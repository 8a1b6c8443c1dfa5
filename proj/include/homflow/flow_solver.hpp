/// Minimization of F(J, A) subject to DIVE J = m with pinned boundary edges:
/// an exact convex path (arc-splitting min-cost flow), a multi-start
/// cycle-coordinate descent for nonconvex costs, and a grid-search oracle
/// over the cycle space.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "homflow/energy.hpp"

namespace homflow::solver {

struct FlowProblem {
  const graph::RestrictedGraph* graph = nullptr;
  const energy::LocalizedEnergy* energy = nullptr;
  Region region;                 // localization set A
  calculus::VertexMeasure m;     // divergence target
  std::map<int, Vec> pinned;     // edge id -> canonical value
  int value_dim = 1;
  /// Vertices at which DIVE J = m is enforced; empty means all. Vertices
  /// outside the mask must not touch free edges.
  std::vector<bool> constrained;

  bool is_constrained(int x) const { return constrained.empty() || constrained[x]; }
};

enum class SolveStatus { optimal, heuristic, infeasible };

struct FlowSolution {
  calculus::DiscreteField J;
  double objective = 0;
  SolveStatus status = SolveStatus::infeasible;
  std::string log;
};

/// Global optimum for convex piecewise-linear families (weighted_abs,
/// piecewise_linear_convex), scalar species only.
FlowSolution solve_convex(const FlowProblem& p);

/// Feasible-by-construction heuristic for any Lipschitz family: multi-start
/// block-coordinate descent on cycle coordinates with golden-section line
/// search; deterministic given the seed.
FlowSolution solve_nonconvex(const FlowProblem& p, int restarts, int budget,
                             std::uint64_t seed = 1);

/// Exhaustive grid search over cycle coordinates in [-radius, radius]^k at
/// step h; requires at most 6 scalar coordinates after divergence
/// elimination. Grid best is within Lipschitz * h * k of the optimum over
/// the searched box.
FlowSolution brute_force(const FlowProblem& p, double h, double radius);

/// Spanning-forest parametrization of {J : DIVE J = m, pins respected}.
struct CycleSpace {
  std::vector<int> tree_edges;              // forest edge ids
  std::vector<int> chord_edges;             // one fundamental cycle per chord
  calculus::DiscreteField base_solution;    // feasible J0
  /// cycle k as signed edge list (edge id, sign relative to canonical).
  std::vector<std::vector<std::pair<int, double>>> cycles;
};

/// Throws Infeasible if the reduced divergence does not balance per
/// component (tolerance 1e-10 relative to TV(m)).
CycleSpace cycle_space(const FlowProblem& p);

/// J0 + sum_k t_k * chi_k for scalar coordinates (value_dim blocks of t).
calculus::DiscreteField field_from_coordinates(const FlowProblem& p, const CycleSpace& cs,
                                               const std::vector<double>& t);

}  // namespace homflow::solver
