#include "homflow/uniform_flow.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace homflow::uflow {

namespace {

std::vector<std::vector<long long>> iterate_window(const graph::IntBox& w) {
  if (w.empty()) throw EmptyWindow("uniform flow window is empty");
  std::vector<std::vector<long long>> cells;
  std::vector<long long> z(w.lo);
  const std::size_t d = w.lo.size();
  while (true) {
    cells.push_back(z);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++z[k] <= w.hi[k]) break;
      z[k] = w.lo[k];
      if (k == 0) return cells;
    }
  }
}

// Dijkstra with optionally noise-perturbed weights; tie-break on lower
// predecessor index as in graph::shortest_path.
std::vector<int> weighted_path(const graph::EmbeddedGraph& g, int x, int y,
                               std::uint64_t noise_seed) {
  if (noise_seed == 0) return graph::shortest_path(g, x, y);
  const int n = g.num_vertices();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> pred(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[x] = 0;
  pq.push({0.0, x});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u] + 1e-12) continue;
    if (u == y) break;
    for (const auto& [v, e] : g.adj[u]) {
      double w = g.edge_length(e);
      w *= 1.0 + 3.0 * rng::uniform01(rng::hash_key(noise_seed, {e}));
      double nd = dist[u] + w;
      if (nd < dist[v] - 1e-12) {
        dist[v] = nd;
        pred[v] = u;
        pq.push({nd, v});
      }
    }
  }
  if (x != y && pred[y] < 0) throw Disconnected("uniform flow: anchors not connected");
  std::vector<int> path{y};
  while (path.back() != x) path.push_back(pred[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

long long UniformFlowOperator::integer_divergence(int axis, int vertex) const {
  long long s = 0;
  for (const auto& [nb, e] : base->adj[vertex]) {
    auto [u, v] = base->edges[e];
    long long c = coeff[axis][e];
    s += (vertex == u) ? c : -c;
    (void)nb;
  }
  return s;
}

Box UniformFlowOperator::window_box() const {
  Box b;
  b.lo.resize(dim);
  b.hi.resize(dim);
  for (int k = 0; k < dim; ++k) {
    b.lo[k] = static_cast<double>(window.lo[k]);
    b.hi[k] = static_cast<double>(window.hi[k]);
  }
  return b;
}

UniformFlowOperator build(const graph::EmbeddedGraph& g, const graph::GeometryCertificate& cert,
                          const graph::IntBox& window, std::uint64_t path_noise_seed) {
  UniformFlowOperator op;
  op.base = &g;
  op.dim = g.dim;
  op.window = window;
  op.ell = cert.r2 * (2 * cert.r1 + 1) + 1;

  // Anchor threshold: the cover test certifies r1 up to the grid-pitch slack.
  double anchor_tol = cert.r1 * (1.0 + std::sqrt(static_cast<double>(g.dim)) / 8.0) + 1e-9;

  auto cells = iterate_window(window);
  Vec p(g.dim);
  for (const auto& z : cells) {
    for (int k = 0; k < g.dim; ++k) p[k] = static_cast<double>(z[k]);
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.num_vertices(); ++i) {
      double d = num::dist(p, g.vertices[i]);
      if (d < bd - 1e-15) {
        bd = d;
        best = i;
      }
    }
    if (best < 0 || bd > anchor_tol)
      throw AnchorTooFar("no vertex within the certified gap radius of a lattice point");
    op.anchors[z] = best;
  }

  op.coeff.assign(g.dim, std::vector<long long>(g.num_edges(), 0));
  std::uint64_t fp = 1469598103934665603ULL;
  auto mixfp = [&fp](std::uint64_t v) { fp = (fp ^ v) * 1099511628211ULL; };

  for (const auto& z : cells) {
    for (int axis = 0; axis < g.dim; ++axis) {
      auto z2 = z;
      z2[axis] += 1;
      auto it = op.anchors.find(z2);
      if (it == op.anchors.end()) continue;  // window truncation
      int a = op.anchors[z], b = it->second;
      UniformFlowOperator::CatalogueEntry entry;
      entry.z = z;
      entry.axis = axis;
      if (a == b) {
        entry.path = {a};
      } else {
        entry.path = weighted_path(g, a, b, path_noise_seed == 0 ? 0 : rng::hash_key(path_noise_seed, z) + axis + 1);
      }
      entry.length = graph::path_length(g, entry.path);
      entry.too_long = entry.length > op.ell + 1e-12;
      if (entry.too_long) ++op.num_too_long;
      for (std::size_t i = 0; i + 1 < entry.path.size(); ++i) {
        int s = entry.path[i], t = entry.path[i + 1];
        int e = g.find_edge(s, t);
        op.coeff[axis][e] += (s < t) ? 1 : -1;
      }
      for (int v : entry.path) mixfp(static_cast<std::uint64_t>(v) + 0x9e37);
      mixfp(axis);
      op.catalogue.push_back(std::move(entry));
    }
  }

  // Measured interior margin: depth of the deepest vertex (w.r.t. the window
  // box) at which the integer divergence is nonzero.
  Box wb = op.window_box();
  auto depth = [&](const Vec& q) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < op.dim; ++k) m = std::min({m, q[k] - wb.lo[k], wb.hi[k] - q[k]});
    return m;
  };
  op.interior_margin = 0;
  for (int x = 0; x < g.num_vertices(); ++x) {
    bool bad = false;
    for (int axis = 0; axis < g.dim && !bad; ++axis) bad = op.integer_divergence(axis, x) != 0;
    if (bad) op.interior_margin = std::max(op.interior_margin, depth(g.vertices[x]));
  }
  op.fingerprint = fp;
  return op;
}

calculus::DiscreteField apply_rescaled(const UniformFlowOperator& op, const Tensor& j,
                                       const graph::RestrictedGraph& rg) {
  if (rg.base != op.base) throw GraphMismatch("apply: graph is not a restriction of the operator base");
  if (j.d != op.dim) throw Error("apply: tensor dimension mismatch");
  double scale = std::pow(rg.epsilon, op.dim - 1);
  calculus::DiscreteField J(&rg, j.n);
  for (int e = 0; e < rg.num_edges(); ++e) {
    int be = rg.base_edge[e];
    // Canonical restricted orientation matches the canonical base orientation
    // (restriction preserves the index order of vertices).
    Vec val(j.n, 0.0);
    for (int axis = 0; axis < op.dim; ++axis) {
      long long c = op.coeff[axis][be];
      if (c == 0) continue;
      num::axpy(val, static_cast<double>(c) * scale, j.column(axis));
    }
    J.set_canonical(e, std::move(val));
  }
  return J;
}

calculus::DiscreteField apply(const UniformFlowOperator& op, const Tensor& j,
                              const graph::RestrictedGraph& rg) {
  if (std::abs(rg.epsilon - 1.0) > 1e-15) throw ScaleMismatch("apply expects epsilon = 1");
  return apply_rescaled(op, j, rg);
}

std::vector<ConvergenceRow> verify_convergence(const UniformFlowOperator& op, const Tensor& j,
                                               const std::function<double(const Vec&)>& phi,
                                               double phi_integral,
                                               const std::vector<double>& eps_list) {
  std::vector<ConvergenceRow> rows;
  for (double eps : eps_list) {
    auto rg = graph::restrict_rescale(*op.base, eps, Region::whole_space());
    auto J = apply_rescaled(op, j, rg);
    auto mu = calculus::embed(J);
    auto pairing = calculus::pair_numeric(mu, phi, 8);  // n x d matrix
    double err2 = 0;
    for (int i = 0; i < j.n; ++i)
      for (int k = 0; k < j.d; ++k) {
        double diff = pairing[static_cast<std::size_t>(i) * j.d + k] - j.at(i, k) * phi_integral;
        err2 += diff * diff;
      }
    rows.push_back({eps, std::sqrt(err2)});
  }
  return rows;
}

BoundednessReport verify_boundedness(const UniformFlowOperator& op, const Tensor& j,
                                     const std::vector<Box>& orthotopes, double eps) {
  BoundednessReport rep;
  auto rg = graph::restrict_rescale(*op.base, eps, Region::whole_space());
  auto mu = calculus::embed(apply_rescaled(op, j, rg));
  double jn = j.frobenius();
  for (const Box& q : orthotopes) {
    for (std::size_t k = 0; k < q.lo.size(); ++k)
      if (q.hi[k] - q.lo[k] < eps - 1e-12)
        throw DegenerateOrthotope("orthotope does not contain an eps-cube");
    double vol = q.volume();
    if (vol <= 0) throw DegenerateOrthotope("orthotope has zero volume");
    double v = jn > 0 ? mu.variation_on(Region::box(q)) / (jn * vol) : 0.0;
    rep.per_box.push_back(v);
    rep.constant = std::max(rep.constant, v);
  }
  return rep;
}

}  // namespace homflow::uflow
