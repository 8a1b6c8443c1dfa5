#include "homflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "homflow/delaunay.hpp"

namespace homflow::graph {

void EmbeddedGraph::add_edge(int u, int v) {
  if (u == v) throw Error("EmbeddedGraph: self-loop rejected");
  if (u > v) std::swap(u, v);
  int e = static_cast<int>(edges.size());
  edges.emplace_back(u, v);
  if (adj.size() < vertices.size()) adj.resize(vertices.size());
  adj[u].emplace_back(v, e);
  adj[v].emplace_back(u, e);
}

int EmbeddedGraph::find_edge(int u, int v) const {
  for (const auto& [w, e] : adj[u])
    if (w == v) return e;
  return -1;
}

double EmbeddedGraph::edge_length(int e) const {
  return num::dist(vertices[edges[e].first], vertices[edges[e].second]);
}

void EmbeddedGraph::finalize() {
  if (adj.size() < vertices.size()) adj.resize(vertices.size());
  for (auto& a : adj) std::sort(a.begin(), a.end());
}

double EmbeddedGraph::max_edge_length() const {
  double m = 0;
  for (int e = 0; e < num_edges(); ++e) m = std::max(m, edge_length(e));
  return m;
}

IntBox GraphSpec::effective_window() const {
  if (window) return *window;
  IntBox w;
  long long h = std::max(1, period_hint) / 2;
  long long l = h - std::max(1, period_hint) + 1;
  w.lo.assign(dim, l);
  w.hi.assign(dim, h);
  return w;
}

double cell_jitter(std::uint64_t seed, const std::vector<long long>& z, int k, double amplitude) {
  std::vector<long long> key = z;
  key.push_back(k);
  double u = rng::uniform01(rng::hash_key(seed, key));
  return amplitude * (2.0 * u - 1.0);
}

namespace {

// Lattice cells of the window in lexicographic order; positions are the
// integer cell plus (for jittered kinds) a per-cell jitter.
std::vector<std::vector<long long>> window_cells(const IntBox& w) {
  if (w.empty()) throw EmptyWindow("graph generation window is empty");
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

EmbeddedGraph lattice_like(const GraphSpec& spec, bool jitter) {
  IntBox w = spec.effective_window();
  auto cells = window_cells(w);
  EmbeddedGraph g;
  g.dim = spec.dim;
  g.vertices.reserve(cells.size());
  std::vector<long long> stride(spec.dim, 1);
  for (int k = spec.dim - 2; k >= 0; --k)
    stride[k] = stride[k + 1] * (w.hi[k + 1] - w.lo[k + 1] + 1);
  auto cell_index = [&](const std::vector<long long>& z) {
    long long idx = 0;
    for (int k = 0; k < spec.dim; ++k) idx += (z[k] - w.lo[k]) * stride[k];
    return static_cast<int>(idx);
  };
  for (const auto& z : cells) {
    Vec p(spec.dim);
    for (int k = 0; k < spec.dim; ++k) {
      p[k] = static_cast<double>(z[k]);
      if (jitter) p[k] += cell_jitter(spec.seed, z, k, spec.jitter_amplitude);
    }
    g.vertices.push_back(std::move(p));
  }
  g.adj.resize(g.vertices.size());
  for (const auto& z : cells) {
    for (int k = 0; k < spec.dim; ++k) {
      if (z[k] + 1 > w.hi[k]) continue;
      auto z2 = z;
      z2[k] += 1;
      g.add_edge(cell_index(z), cell_index(z2));
    }
  }
  g.finalize();
  return g;
}

EmbeddedGraph voronoi_graph(const GraphSpec& spec) {
  if (spec.dim != 2)
    throw UnsupportedDimension("voronoi_points graphs are implemented for d = 2 only");
  if (!(spec.jitter_amplitude > 0))
    throw Error("voronoi_points requires jitter_amplitude > 0 (general position)");
  GraphSpec pts = spec;
  pts.kind = GraphKind::jittered_lattice;
  EmbeddedGraph g = lattice_like(pts, /*jitter=*/true);
  g.edges.clear();
  g.adj.assign(g.vertices.size(), {});
  // Large windows use the local empty-circumcircle method, valid for the
  // (G1)-dense jittered point set. Near the window boundary it reproduces
  // the adjacency of the infinite configuration (no long hull edges),
  // which is the stationary graph the window approximates.
  double r1_bound = std::sqrt(2.0) * (0.5 + spec.jitter_amplitude);
  auto edges = g.num_vertices() > 2500
                   ? delaunay::delaunay_edges_dense(g.vertices, r1_bound)
                   : delaunay::delaunay_edges(g.vertices);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  g.finalize();
  return g;
}

}  // namespace

EmbeddedGraph generate(const GraphSpec& spec) {
  if (spec.dim < 1) throw UnsupportedDimension("dim must be >= 1");
  if (spec.jitter_amplitude < 0 || spec.jitter_amplitude >= 0.5)
    throw Error("jitter_amplitude must lie in [0, 0.5)");
  switch (spec.kind) {
    case GraphKind::lattice_zd:
      return lattice_like(spec, false);
    case GraphKind::jittered_lattice:
      return lattice_like(spec, true);
    case GraphKind::voronoi_points:
      return voronoi_graph(spec);
  }
  throw Error("unknown graph kind");
}

namespace {

template <class G>
std::vector<int> dijkstra_path(const G& g, int x, int y) {
  const int n = g.num_vertices();
  if (x < 0 || x >= n || y < 0 || y >= n) throw Error("shortest_path: vertex out of range");
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> pred(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[x] = 0;
  pq.push({0.0, x});
  const double tie = 1e-12;
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u] + tie) continue;
    if (u == y) break;
    for (const auto& [v, e] : g.adj[u]) {
      double nd = dist[u] + num::dist(g.vertices[u], g.vertices[v]);
      if (nd < dist[v] - tie) {
        dist[v] = nd;
        pred[v] = u;
        pq.push({nd, v});
      } else if (nd <= dist[v] + tie && pred[v] >= 0 && u < pred[v]) {
        pred[v] = u;  // deterministic tie-break: lower-index predecessor
      }
    }
  }
  if (x != y && pred[y] < 0) throw Disconnected("shortest_path: no path found");
  std::vector<int> path{y};
  while (path.back() != x) path.push_back(pred[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::vector<int> shortest_path(const EmbeddedGraph& g, int x, int y) {
  return dijkstra_path(g, x, y);
}
std::vector<int> shortest_path(const RestrictedGraph& g, int x, int y) {
  return dijkstra_path(g, x, y);
}

GeometryCertificate certify_geometry(const EmbeddedGraph& g, const Box& box, int samples,
                                     std::uint64_t seed) {
  if (g.num_vertices() == 0) throw Error("certify_geometry: empty graph");
  GeometryCertificate cert;
  cert.verified_box = box;
  cert.r3 = g.max_edge_length();

  // (G1): cover test at pitch r/4 for a geometric ladder of candidate radii.
  double base = std::max(cert.r3, 1e-6);
  std::vector<double> candidates;
  for (double f : {0.25, 0.354, 0.5, 0.71, 1.0, 1.42, 2.0, 2.83, 4.0, 8.0, 16.0})
    candidates.push_back(f * base);

  // Unit-cell buckets make the cover test linear in grid points.
  std::map<std::vector<long long>, std::vector<int>> buckets;
  for (int i = 0; i < g.num_vertices(); ++i) {
    std::vector<long long> c(g.dim);
    for (int k = 0; k < g.dim; ++k) c[k] = static_cast<long long>(std::floor(g.vertices[i][k]));
    buckets[c].push_back(i);
  }
  auto covered_within = [&](const Vec& p, double r) {
    int reach = static_cast<int>(std::ceil(r)) + 1;
    std::vector<long long> c(g.dim), q(g.dim);
    for (int k = 0; k < g.dim; ++k) c[k] = static_cast<long long>(std::floor(p[k]));
    std::vector<int> off(g.dim, -reach);
    while (true) {
      for (int k = 0; k < g.dim; ++k) q[k] = c[k] + off[k];
      auto it = buckets.find(q);
      if (it != buckets.end())
        for (int i : it->second)
          if (num::dist(p, g.vertices[i]) <= r) return true;
      int k = g.dim;
      while (k > 0) {
        --k;
        if (++off[k] <= reach) break;
        off[k] = -reach;
        if (k == 0) return false;
      }
    }
  };
  double diam = num::dist(box.lo, box.hi);
  cert.r1 = diam;  // fallback: box diameter always covers
  for (double r : candidates) {
    double pitch = r / 4.0;
    bool ok = true;
    std::vector<int> counts(g.dim);
    long long total = 1;
    for (int k = 0; k < g.dim; ++k) {
      counts[k] = std::max(1, static_cast<int>(std::ceil((box.hi[k] - box.lo[k]) / pitch)) + 1);
      total *= counts[k];
      if (total > 4'000'000) { ok = false; break; }  // pitch too fine to test
    }
    if (!ok) continue;
    Vec p(g.dim);
    std::vector<int> idx(g.dim, 0);
    while (ok) {
      for (int k = 0; k < g.dim; ++k)
        p[k] = std::min(box.hi[k], box.lo[k] + idx[k] * pitch);
      if (!covered_within(p, r)) ok = false;
      int k = g.dim;
      bool done = false;
      while (k > 0) {
        --k;
        if (++idx[k] < counts[k]) break;
        idx[k] = 0;
        if (k == 0) done = true;
      }
      if (done) break;
    }
    if (ok) {
      cert.r1 = r;
      cert.grid_pitch = r / 4.0;
      break;
    }
  }

  // (G2): stretch on random vertex pairs (plus a few long-range pairs).
  rng::Stream rs(seed);
  cert.r2 = 0;
  const int n = g.num_vertices();
  for (int s = 0; s < samples; ++s) {
    int a = rs.uniform_int(0, n - 1);
    int b = rs.uniform_int(0, n - 1);
    if (a == b) continue;
    auto path = shortest_path(g, a, b);  // throws Disconnected
    double len = path_length(g, path);
    cert.r2 = std::max(cert.r2, len / (num::dist(g.vertices[a], g.vertices[b]) + 1.0));
  }
  if (cert.r2 == 0) cert.r2 = 1.0;
  return cert;
}

RestrictedGraph restrict_rescale(const EmbeddedGraph& g, double epsilon, const Region& domain) {
  if (!(epsilon > 0 && epsilon <= 1)) throw ScaleMismatch("epsilon must lie in (0, 1]");
  RestrictedGraph r;
  r.base = &g;
  r.epsilon = epsilon;
  r.domain = domain;
  r.from_base.assign(g.num_vertices(), -1);
  auto keep = [&](const Vec& p) {
    if (domain.all_space) return true;
    for (const Box& b : domain.boxes)
      if (b.contains(p)) return true;
    return false;
  };
  for (int i = 0; i < g.num_vertices(); ++i) {
    Vec p = num::scaled(g.vertices[i], epsilon);
    if (!keep(p)) continue;
    r.from_base[i] = static_cast<int>(r.vertices.size());
    r.base_index.push_back(i);
    r.vertices.push_back(std::move(p));
  }
  r.adj.resize(r.vertices.size());
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    int ru = r.from_base[u], rv = r.from_base[v];
    if (ru < 0 || rv < 0) continue;
    if (ru > rv) std::swap(ru, rv);
    int re = static_cast<int>(r.edges.size());
    r.edges.emplace_back(ru, rv);
    r.base_edge.push_back(e);
    r.adj[ru].emplace_back(rv, re);
    r.adj[rv].emplace_back(ru, re);
  }
  for (auto& a : r.adj) std::sort(a.begin(), a.end());
  return r;
}

int RestrictedGraph::find_edge(int u, int v) const {
  for (const auto& [w, e] : adj[u])
    if (w == v) return e;
  return -1;
}

double RestrictedGraph::edge_length(int e) const {
  return num::dist(vertices[edges[e].first], vertices[edges[e].second]);
}

int RestrictedGraph::nearest_vertex(const Vec& p) const {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_vertices(); ++i) {
    double d = num::dist(p, vertices[i]);
    if (d < bd - 1e-15) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> components(const RestrictedGraph& g) {
  std::vector<int> comp(g.num_vertices(), -1);
  int c = 0;
  for (int s = 0; s < g.num_vertices(); ++s) {
    if (comp[s] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    comp[s] = c;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const auto& [v, e] : g.adj[u]) {
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

}  // namespace homflow::graph
