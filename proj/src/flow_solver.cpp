#include "homflow/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "homflow/mincost.hpp"

namespace homflow::solver {

namespace {

// Reduced divergence after moving pinned edges to the right-hand side.
// Returns per-vertex V-valued targets for the free part of J.
std::vector<Vec> reduced_divergence(const FlowProblem& p) {
  const auto& g = *p.graph;
  std::vector<Vec> m(g.num_vertices(), Vec(p.value_dim, 0.0));
  for (int x = 0; x < g.num_vertices(); ++x)
    if (p.is_constrained(x)) m[x] = p.m.at(x);
  for (const auto& [e, val] : p.pinned) {
    auto [u, v] = g.edges[e];
    if (p.is_constrained(u)) num::axpy(m[u], -1.0, val);
    if (p.is_constrained(v)) num::axpy(m[v], 1.0, val);
  }
  return m;
}

std::vector<int> free_edges(const FlowProblem& p) {
  std::vector<int> fe;
  for (int e = 0; e < p.graph->num_edges(); ++e)
    if (!p.pinned.count(e)) fe.push_back(e);
  return fe;
}

void check_free_edges_constrained(const FlowProblem& p, const std::vector<int>& fe) {
  for (int e : fe) {
    auto [u, v] = p.graph->edges[e];
    if (!p.is_constrained(u) || !p.is_constrained(v))
      throw Error("flow problem: free edge touches an unconstrained vertex");
  }
}

// Connected components of the free-edge subgraph.
std::vector<int> free_components(const FlowProblem& p, const std::vector<int>& fe) {
  const auto& g = *p.graph;
  std::vector<std::vector<std::pair<int, int>>> adj(g.num_vertices());
  for (int e : fe) {
    auto [u, v] = g.edges[e];
    adj[u].push_back({v, e});
    adj[v].push_back({u, e});
  }
  std::vector<int> comp(g.num_vertices(), -1);
  int c = 0;
  for (int s = 0; s < g.num_vertices(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = c;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto [v, e] : adj[u]) {
        (void)e;
        if (comp[v] < 0) {
          comp[v] = c;
          q.push(v);
        }
      }
    }
    ++c;
  }
  return comp;
}

void check_component_balance(const FlowProblem& p, const std::vector<int>& fe,
                             const std::vector<Vec>& m) {
  auto comp = free_components(p, fe);
  int nc = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<Vec> sums(nc, Vec(p.value_dim, 0.0));
  double tv = 0;
  for (const Vec& v : m) tv += num::norm(v);
  for (int x = 0; x < p.graph->num_vertices(); ++x) num::axpy(sums[comp[x]], 1.0, m[x]);
  double tol = 1e-10 * std::max(1.0, tv);
  for (const Vec& s : sums)
    if (!num::near_zero(s, tol))
      throw Infeasible("divergence target does not balance on a connected component");
}

void apply_pins(const FlowProblem& p, calculus::DiscreteField& J) {
  for (const auto& [e, val] : p.pinned) J.set_canonical(e, val);
}

double edge_weight_in_region(const FlowProblem& p, int e) {
  auto [u, v] = p.graph->edges[e];
  return geom::clipped_length(p.graph->vertices[u], p.graph->vertices[v], p.region);
}

double objective_of(const FlowProblem& p, const calculus::DiscreteField& J) {
  return p.energy->eval_rescaled(J, p.region, p.graph->epsilon);
}

double feasibility_residual(const FlowProblem& p, const calculus::DiscreteField& J) {
  auto d = calculus::dive(J);
  double r = 0;
  for (int x = 0; x < p.graph->num_vertices(); ++x)
    if (p.is_constrained(x)) r += num::dist(d.at(x), p.m.at(x));
  return r;
}

}  // namespace

FlowSolution solve_convex(const FlowProblem& p) {
  if (p.value_dim != 1)
    throw Error("solve_convex supports scalar species only (radial costs do not decouple)");
  const auto& g = *p.graph;
  const double eps_scale = std::pow(g.epsilon, (g.base ? g.base->dim : 1) - 1);
  auto fe = free_edges(p);
  check_free_edges_constrained(p, fe);
  auto m = reduced_divergence(p);
  check_component_balance(p, fe, m);

  mincost::Network net(g.num_vertices());
  for (int x = 0; x < g.num_vertices(); ++x) net.supply[x] = m[x][0];

  // Arc splitting: per free edge and direction, one arc per convex segment.
  // With flow x on a segment of slope s the energy contributes
  // eps^{d-1} * s * (x/eps^{d-1}) * len = s * len * x, and the segment width
  // scales by eps^{d-1}.
  struct ArcRef {
    int edge;
    double sign;  // +1 canonical direction, -1 reverse
  };
  std::vector<ArcRef> refs;
  for (int e : fe) {
    const auto& cost = p.energy->edge_cost(e);
    if (!cost.convex()) throw Error("solve_convex requires a convex cost family");
    double len = edge_weight_in_region(p, e);
    auto [u, v] = g.edges[e];
    for (auto [width, slope] : cost.segments()) {
      double cap = std::isinf(width) ? mincost::kInfCap : width * eps_scale;
      net.add_arc(u, v, cap, slope * len);
      refs.push_back({e, 1.0});
      net.add_arc(v, u, cap, slope * len);
      refs.push_back({e, -1.0});
    }
  }

  auto res = mincost::solve(net);
  FlowSolution sol;
  sol.J = calculus::DiscreteField(&g, 1);
  if (!res.feasible) {
    sol.status = SolveStatus::infeasible;
    sol.log = "mincost routing infeasible";
    return sol;
  }
  for (std::size_t a = 0; a < refs.size(); ++a) {
    Vec cur = sol.J.canonical(refs[a].edge);
    cur[0] += refs[a].sign * res.flow[a];
    sol.J.set_canonical(refs[a].edge, cur);
  }
  apply_pins(p, sol.J);
  sol.objective = objective_of(p, sol.J);
  sol.status = SolveStatus::optimal;
  double resid = feasibility_residual(p, sol.J);
  if (resid > 1e-8) {
    sol.status = SolveStatus::infeasible;
    sol.log = "feasibility residual " + std::to_string(resid);
  }
  return sol;
}

CycleSpace cycle_space(const FlowProblem& p) {
  const auto& g = *p.graph;
  auto fe = free_edges(p);
  check_free_edges_constrained(p, fe);
  auto m = reduced_divergence(p);
  check_component_balance(p, fe, m);

  CycleSpace cs;
  cs.base_solution = calculus::DiscreteField(&g, p.value_dim);

  // BFS spanning forest over free edges.
  std::vector<std::vector<std::pair<int, int>>> adj(g.num_vertices());
  for (int e : fe) {
    auto [u, v] = g.edges[e];
    adj[u].push_back({v, e});
    adj[v].push_back({u, e});
  }
  std::vector<int> parent(g.num_vertices(), -1), parent_edge(g.num_vertices(), -1);
  std::vector<int> order;
  std::vector<bool> seen(g.num_vertices(), false), in_tree(g.num_edges(), false);
  for (int s = 0; s < g.num_vertices(); ++s) {
    if (seen[s]) continue;
    seen[s] = true;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      order.push_back(u);
      for (auto [v, e] : adj[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        parent[v] = u;
        parent_edge[v] = e;
        in_tree[e] = true;
        cs.tree_edges.push_back(e);
        q.push(v);
      }
    }
  }
  for (int e : fe)
    if (!in_tree[e]) cs.chord_edges.push_back(e);

  // Tree solve: accumulate subtree imbalances leaf-to-root.
  std::vector<Vec> acc = m;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (parent[v] < 0) continue;
    int e = parent_edge[v];
    // Flow of acc[v] must leave v toward parent: J(v, parent) = acc[v].
    auto [a, b] = g.edges[e];
    Vec val = acc[v];
    if (a == v) {  // canonical orientation v -> parent
      cs.base_solution.set_canonical(e, val);
    } else {
      cs.base_solution.set_canonical(e, num::scaled(val, -1.0));
    }
    num::axpy(acc[parent[v]], 1.0, acc[v]);
    (void)b;
  }

  // Fundamental cycle of each chord: chord + tree path between endpoints.
  std::vector<int> depth(g.num_vertices(), 0);
  for (int u : order)
    if (parent[u] >= 0) depth[u] = depth[parent[u]] + 1;
  for (int e : cs.chord_edges) {
    auto [u, v] = g.edges[e];
    std::vector<std::pair<int, double>> cyc;
    cyc.push_back({e, 1.0});  // canonical u -> v
    // Walk v up to the common ancestor with u; cycle direction v -> u.
    int a = v, b = u;
    std::vector<std::pair<int, double>> up_from_v, up_from_u;
    while (depth[a] > depth[b]) {
      int pe = parent_edge[a];
      double sign = (g.edges[pe].first == a) ? 1.0 : -1.0;  // a -> parent
      up_from_v.push_back({pe, sign});
      a = parent[a];
    }
    while (depth[b] > depth[a]) {
      int pe = parent_edge[b];
      double sign = (g.edges[pe].first == b) ? -1.0 : 1.0;  // parent -> b
      up_from_u.push_back({pe, sign});
      b = parent[b];
    }
    while (a != b) {
      int pe = parent_edge[a];
      up_from_v.push_back({pe, (g.edges[pe].first == a) ? 1.0 : -1.0});
      a = parent[a];
      pe = parent_edge[b];
      up_from_u.push_back({pe, (g.edges[pe].first == b) ? -1.0 : 1.0});
      b = parent[b];
    }
    for (auto& pr : up_from_v) cyc.push_back(pr);
    for (auto it = up_from_u.rbegin(); it != up_from_u.rend(); ++it) cyc.push_back(*it);
    cs.cycles.push_back(std::move(cyc));
  }
  return cs;
}

calculus::DiscreteField field_from_coordinates(const FlowProblem& p, const CycleSpace& cs,
                                               const std::vector<double>& t) {
  calculus::DiscreteField J = cs.base_solution;
  const int k = static_cast<int>(cs.cycles.size());
  for (int c = 0; c < k; ++c) {
    for (int comp = 0; comp < p.value_dim; ++comp) {
      double amp = t[static_cast<std::size_t>(comp) * k + c];
      if (amp == 0) continue;
      for (auto [e, sign] : cs.cycles[c]) {
        Vec cur = J.canonical(e);
        cur[comp] += sign * amp;
        J.set_canonical(e, cur);
      }
    }
  }
  apply_pins(p, J);
  return J;
}

namespace {

// Objective restricted to the edges of one cycle (everything else constant).
class CycleObjective {
 public:
  CycleObjective(const FlowProblem& p, const std::vector<std::pair<int, double>>& cycle,
                 const calculus::DiscreteField& J, int comp)
      : p_(p), cycle_(cycle), comp_(comp) {
    const auto& g = *p.graph;
    eps_scale_ = std::pow(g.epsilon, (g.base ? g.base->dim : 1) - 1);
    for (auto [e, sign] : cycle_) {
      base_.push_back(J.canonical(e));
      weights_.push_back(edge_weight_in_region(p, e));
      signs_.push_back(sign);
      edges_.push_back(e);
    }
  }

  double operator()(double delta) const {
    double s = 0;
    Vec v;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (weights_[i] == 0) continue;
      v = base_[i];
      v[comp_] += signs_[i] * delta;
      s += eps_scale_ * p_.energy->edge_cost(edges_[i]).radial(num::norm(v) / eps_scale_) *
           weights_[i];
    }
    return s;
  }

 private:
  const FlowProblem& p_;
  const std::vector<std::pair<int, double>>& cycle_;
  int comp_;
  double eps_scale_ = 1;
  std::vector<Vec> base_;
  std::vector<double> weights_;
  std::vector<double> signs_;
  std::vector<int> edges_;
};

double golden_section(const std::function<double(double)>& f, double a, double b, int iters) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

FlowSolution solve_nonconvex(const FlowProblem& p, int restarts, int budget, std::uint64_t seed) {
  auto cs = cycle_space(p);
  const int k = static_cast<int>(cs.cycles.size());
  const int nt = k * p.value_dim;

  // Start (a): convex-relaxation optimum via the minorant-slope Beckmann
  // problem (scalar species); otherwise the tree solution.
  std::vector<double> t0(nt, 0.0);
  if (p.value_dim == 1 && k > 0) {
    try {
      FlowProblem relax = p;
      // Same graph and pins; replace costs by the convex minorant slopes.
      // Reuse solve_convex by building a weighted_abs-like network directly.
      const auto& g = *p.graph;
      auto m = reduced_divergence(p);
      mincost::Network net(g.num_vertices());
      for (int x = 0; x < g.num_vertices(); ++x) net.supply[x] = m[x][0];
      auto fe = free_edges(p);
      std::vector<int> arc_edge;
      for (int e : fe) {
        double w = edge_weight_in_region(p, e) * p.energy->edge_cost(e).minorant_slope();
        auto [u, v] = g.edges[e];
        net.add_arc(u, v, mincost::kInfCap, w);
        net.add_arc(v, u, mincost::kInfCap, w);
        arc_edge.push_back(e);
      }
      auto res = mincost::solve(net);
      if (res.feasible) {
        calculus::DiscreteField Jr(&g, 1);
        for (std::size_t i = 0; i < arc_edge.size(); ++i) {
          Vec cur = Jr.canonical(arc_edge[i]);
          cur[0] += res.flow[2 * i] - res.flow[2 * i + 1];
          Jr.set_canonical(arc_edge[i], cur);
        }
        for (int c = 0; c < k; ++c)
          t0[c] = Jr.canonical(cs.chord_edges[c])[0] - cs.base_solution.canonical(cs.chord_edges[c])[0];
      }
      (void)relax;
    } catch (const Error&) {
      // fall back to the tree start
    }
  }

  rng::Stream rs(seed);
  FlowSolution best;
  best.J = field_from_coordinates(p, cs, t0);
  best.objective = objective_of(p, best.J);
  best.status = SolveStatus::heuristic;

  std::vector<double> t = t0;
  for (int r = 0; r <= restarts; ++r) {
    t = t0;
    if (r > 0)
      for (int i = 0; i < nt; ++i) t[i] += rs.uniform(-2.0, 2.0);
    calculus::DiscreteField J = field_from_coordinates(p, cs, t);
    double radius = 2.0;
    for (int sweep = 0; sweep < budget; ++sweep) {
      double improved = 0;
      for (int c = 0; c < k; ++c) {
        for (int comp = 0; comp < p.value_dim; ++comp) {
          CycleObjective f(p, cs.cycles[c], J, comp);
          double cur = f(0.0);
          double delta = golden_section([&](double x) { return f(x); }, -radius, radius, 40);
          double val = f(delta);
          if (val < cur - 1e-13) {
            improved += cur - val;
            for (auto [e, sign] : cs.cycles[c]) {
              Vec v = J.canonical(e);
              v[comp] += sign * delta;
              J.set_canonical(e, v);
            }
            t[static_cast<std::size_t>(comp) * k + c] += delta;
          }
        }
      }
      if (improved < 1e-12) {
        if (radius < 0.02) break;
        radius *= 0.25;  // refine the bracket before giving up
      }
    }
    double obj = objective_of(p, J);
    if (obj < best.objective - 1e-13) {
      best.J = J;
      best.objective = obj;
    }
  }
  best.log = "restarts=" + std::to_string(restarts);
  double resid = feasibility_residual(p, best.J);
  if (resid > 1e-8) throw Error("nonconvex solver lost feasibility: residual " + std::to_string(resid));
  return best;
}

FlowSolution brute_force(const FlowProblem& p, double h, double radius) {
  auto cs = cycle_space(p);
  const int k = static_cast<int>(cs.cycles.size());
  const int nt = k * p.value_dim;
  if (nt > 6)
    throw TooManyFreeVariables("brute_force handles at most 6 cycle coordinates, got " +
                               std::to_string(nt));
  FlowSolution sol;
  if (nt == 0) {
    sol.J = field_from_coordinates(p, cs, {});
    sol.objective = objective_of(p, sol.J);
    sol.status = SolveStatus::optimal;  // unique feasible point
    return sol;
  }
  const int steps = static_cast<int>(std::floor(2 * radius / h)) + 1;
  std::vector<int> idx(nt, 0);
  std::vector<double> t(nt), best_t(nt, 0.0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (int i = 0; i < nt; ++i) t[i] = -radius + idx[i] * h;
    auto J = field_from_coordinates(p, cs, t);
    double obj = objective_of(p, J);
    if (obj < best) {
      best = obj;
      best_t = t;
    }
    int i = nt;
    bool done = false;
    while (i > 0) {
      --i;
      if (++idx[i] < steps) break;
      idx[i] = 0;
      if (i == 0) done = true;
    }
    if (done) break;
  }
  sol.J = field_from_coordinates(p, cs, best_t);
  sol.objective = best;
  sol.status = SolveStatus::heuristic;
  sol.log = "grid " + std::to_string(steps) + "^" + std::to_string(nt);
  return sol;
}

}  // namespace homflow::solver
