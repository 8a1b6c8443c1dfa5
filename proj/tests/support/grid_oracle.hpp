// Test-support grid oracle: exhaustive search over cycle coordinates with
// zoom refinement. A grid point lies within h/2 of the minimizer, so the
// grid minimum is within Lip * sqrt(k) * h / 2 of the optimum; the zoom is
// justified for convex objectives because the window always contains the
// running best and descent directions are visible at every resolution.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "homflow/flow_solver.hpp"

namespace homflow::support {

// Precomputed evaluation of the objective as a function of the cycle
// coordinates (scalar species): per edge the base value, the signed cycle
// increments and the clipped-length weight.
class CycleGridObjective {
 public:
  CycleGridObjective(const solver::FlowProblem& p, const solver::CycleSpace& cs) : p_(p) {
    const auto& g = *p.graph;
    const int k = static_cast<int>(cs.cycles.size());
    eps_scale_ = std::pow(g.epsilon, (g.base ? g.base->dim : 1) - 1);
    std::vector<std::vector<double>> inc(g.num_edges(), std::vector<double>(k, 0.0));
    for (int c = 0; c < k; ++c)
      for (auto [e, sign] : cs.cycles[c]) inc[e][c] += sign;
    auto with_pins = cs.base_solution;
    for (const auto& [e, val] : p.pinned) with_pins.set_canonical(e, val);
    for (int e = 0; e < g.num_edges(); ++e) {
      auto [u, v] = g.edges[e];
      double w = geom::clipped_length(g.vertices[u], g.vertices[v], p.region);
      bool in_cycle = false;
      for (int c = 0; c < k; ++c) in_cycle = in_cycle || inc[e][c] != 0.0;
      double base = with_pins.canonical(e)[0];
      if (!in_cycle) {
        constant_ += eps_scale_ * p.energy->edge_cost(e).radial(std::abs(base) / eps_scale_) * w;
        continue;
      }
      if (w == 0.0 && !in_cycle) continue;
      edges_.push_back(e);
      weights_.push_back(w);
      bases_.push_back(base);
      incs_.push_back(inc[e]);
    }
  }

  double operator()(const std::vector<double>& t) const {
    double s = constant_;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      double val = bases_[i];
      for (std::size_t c = 0; c < t.size(); ++c) val += incs_[i][c] * t[c];
      if (weights_[i] == 0.0) continue;
      s += eps_scale_ * p_.energy->edge_cost(edges_[i]).radial(std::abs(val) / eps_scale_) *
           weights_[i];
    }
    return s;
  }

 private:
  const solver::FlowProblem& p_;
  double eps_scale_ = 1;
  double constant_ = 0;
  std::vector<int> edges_;
  std::vector<double> weights_;
  std::vector<double> bases_;
  std::vector<std::vector<double>> incs_;
};

inline double grid_pass(const CycleGridObjective& f, std::vector<double>& center, double radius,
                        int steps_per_axis) {
  const int k = static_cast<int>(center.size());
  std::vector<int> idx(k, 0);
  std::vector<double> t(k), best_t = center;
  double best = std::numeric_limits<double>::infinity();
  double h = 2.0 * radius / (steps_per_axis - 1);
  while (true) {
    for (int i = 0; i < k; ++i) t[i] = center[i] - radius + idx[i] * h;
    double obj = f(t);
    if (obj < best) {
      best = obj;
      best_t = t;
    }
    int i = k;
    bool done = false;
    while (i > 0) {
      --i;
      if (++idx[i] < steps_per_axis) break;
      idx[i] = 0;
      if (i == 0) done = true;
    }
    if (done) break;
  }
  center = best_t;
  return best;
}

inline double refined_grid_minimum(const solver::FlowProblem& p, double radius, double h_target,
                                   bool convex = true) {
  auto cs = solver::cycle_space(p);
  const int k = static_cast<int>(cs.cycles.size()) * p.value_dim;
  CycleGridObjective f(p, cs);
  if (k == 0) return f({});
  std::vector<double> center(k, 0.0);
  int steps = convex ? 17 : 41;
  if (k >= 5) steps = 13;
  double r = radius;
  double best = grid_pass(f, center, r, steps);
  double h = 2.0 * r / (steps - 1);
  while (h > h_target) {
    r = 2.5 * h;
    double v = grid_pass(f, center, r, k >= 5 ? 13 : 17);
    best = std::min(best, v);
    h = 2.0 * r / ((k >= 5 ? 13 : 17) - 1);
  }
  return best;
}

}  // namespace homflow::support
