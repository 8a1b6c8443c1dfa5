#include "homflow/correctors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace homflow::correctors {

namespace {

std::vector<int> erase_loops(const std::vector<int>& walk) {
  std::vector<int> stack;
  std::map<int, int> pos;
  for (int v : walk) {
    auto it = pos.find(v);
    if (it != pos.end()) {
      while (static_cast<int>(stack.size()) > it->second + 1) {
        pos.erase(stack.back());
        stack.pop_back();
      }
    } else {
      pos[v] = static_cast<int>(stack.size());
      stack.push_back(v);
    }
  }
  return stack;
}

}  // namespace

std::vector<int> localized_path(const graph::RestrictedGraph& g, int x, int y,
                                const PathConstants& pc) {
  if (x == y) return {x};
  const double eps = g.epsilon;
  const Vec& px = g.vertices[x];
  const Vec& py = g.vertices[y];
  double d = num::dist(px, py);
  if (d <= eps * pc.r1) return graph::shortest_path(g, x, y);

  int m = static_cast<int>(std::floor(d / (eps * pc.r1)));
  std::vector<int> anchors{x};
  for (int i = 1; i < m; ++i) {
    Vec z = px;
    num::axpy(z, static_cast<double>(i) * eps * pc.r1 / d, num::sub(py, px));
    int a = g.nearest_vertex(z);
    if (a < 0 || num::dist(g.vertices[a], z) > eps * pc.r1 * 1.25 + 1e-12)
      throw AnchorTooFar("localized_path: no vertex near a waypoint (local (G1) violation)");
    anchors.push_back(a);
  }
  anchors.push_back(y);

  std::vector<int> walk{x};
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
    if (anchors[i] == anchors[i + 1]) continue;
    auto sub = graph::shortest_path(g, anchors[i], anchors[i + 1]);
    walk.insert(walk.end(), sub.begin() + 1, sub.end());
  }
  return erase_loops(walk);
}

double path_deviation(const graph::RestrictedGraph& g, const std::vector<int>& path, int x, int y) {
  const Vec& a = g.vertices[x];
  const Vec& b = g.vertices[y];
  double dev = 0;
  for (int v : path) dev = std::max(dev, num::dist_to_segment(g.vertices[v], a, b));
  return dev;
}

CorrectorResult build_corrector(const graph::RestrictedGraph& g, const calculus::VertexMeasure& m,
                                const PathConstants& pc) {
  const int n = m.value_dim();
  Vec total = m.total_mass();
  if (!num::near_zero(total, 1e-9 * std::max(1.0, m.total_variation())))
    throw MassImbalance("build_corrector: measure must have zero mass per component");

  measures::AtomicMeasure atoms;
  atoms.space_dim = g.base ? g.base->dim : 1;
  atoms.value_dim = n;
  atoms.reference_point.assign(atoms.space_dim, 0.0);
  std::vector<int> atom_vertex;
  for (int x = 0; x < g.num_vertices(); ++x) {
    if (num::near_zero(m.at(x), 0.0)) continue;
    atoms.add(g.vertices[x], m.at(x));
    atom_vertex.push_back(x);
  }

  CorrectorResult out;
  out.J = calculus::DiscreteField(&g, n);
  out.tv_of_m = m.total_variation();
  if (!atoms.atoms.empty()) {
    out.kr_of_m = measures::kr_tilde(atoms).value;
    auto plans = measures::t1_flow(atoms);
    for (int comp = 0; comp < n; ++comp) {
      Vec unit(n, 0.0);
      unit[comp] = 1.0;
      for (const auto& entry : plans.component_plans[comp].entries) {
        int from = atom_vertex[entry.from];  // positive part: source
        int to = atom_vertex[entry.to];
        auto path = localized_path(g, from, to, pc);
        out.support_radius = std::max(out.support_radius, path_deviation(g, path, from, to));
        auto flux = calculus::unit_path_flux(g, path, n, &unit);
        flux *= entry.mass;
        out.J += flux;
      }
    }
  }
  out.tv = calculus::embed(out.J).total_variation();
  double denom = out.kr_of_m + g.epsilon * out.tv_of_m;
  out.bound_ratio = denom > 0 ? out.tv / denom : 0.0;
  return out;
}

BoundScalingReport verify_bound_scaling(
    const std::vector<std::pair<const graph::RestrictedGraph*, calculus::VertexMeasure>>& instances,
    const PathConstants& pc) {
  BoundScalingReport rep;
  for (const auto& [g, m] : instances) {
    auto res = build_corrector(*g, m, pc);
    rep.rows.push_back({g->epsilon, res.bound_ratio});
    rep.max_ratio = std::max(rep.max_ratio, res.bound_ratio);
  }
  std::vector<ScalingRow> fineness = rep.rows;
  for (auto& r : fineness) r.eps = 1.0 / r.eps;
  rep.tau_fineness = kendall_tau(fineness);
  return rep;
}

double kendall_tau(const std::vector<ScalingRow>& rows) {
  const int n = static_cast<int>(rows.size());
  if (n < 2) return 0;
  int concordant = 0, discordant = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double de = rows[i].eps - rows[j].eps;
      double dr = rows[i].bound_ratio - rows[j].bound_ratio;
      double s = de * dr;
      if (s > 0) ++concordant;
      if (s < 0) ++discordant;
    }
  return static_cast<double>(concordant - discordant) / (0.5 * n * (n - 1));
}

}  // namespace homflow::correctors
