/// Embedded graphs in R^d: generation (lattice / jittered lattice / Voronoi),
/// geometry certificates for the gap, connectedness and edge-length
/// assumptions, restriction/rescaling, and shortest paths.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "homflow/common.hpp"

namespace homflow::graph {

/// Undirected graph with vertices embedded in R^d. Each edge is stored once
/// with u < v; antisymmetric data on edges lives in DiscreteField, not here.
struct EmbeddedGraph {
  int dim = 0;
  std::vector<Vec> vertices;
  std::vector<std::pair<int, int>> edges;            // u < v
  std::vector<std::vector<std::pair<int, int>>> adj; // vertex -> (neighbor, edge id)

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  void add_edge(int u, int v);
  int find_edge(int u, int v) const;  // -1 if absent
  double edge_length(int e) const;
  void finalize();  // sorts adjacency by neighbor index

  /// Max over edges of |x-y| (exact value of the (G3) constant).
  double max_edge_length() const;
};

enum class GraphKind { lattice_zd, jittered_lattice, voronoi_points };

struct IntBox {
  std::vector<long long> lo, hi;  // inclusive
  bool empty() const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (hi[i] < lo[i]) return true;
    return lo.empty();
  }
};

struct GraphSpec {
  GraphKind kind = GraphKind::lattice_zd;
  int dim = 2;
  double jitter_amplitude = 0.0;  // in [0, 0.5)
  std::uint64_t seed = 0;
  int period_hint = 4;            // cells per axis; window centered at 0
  std::optional<IntBox> window;   // explicit window overrides period_hint

  IntBox effective_window() const;
};

/// Deterministic jitter of cell z, component k: uniform in [-a, a].
double cell_jitter(std::uint64_t seed, const std::vector<long long>& z, int k, double amplitude);

EmbeddedGraph generate(const GraphSpec& spec);

struct GeometryCertificate {
  double r1 = 0;  // gap radius (G1), smallest tested radius passing the cover test
  double r2 = 0;  // path-stretch constant (G2), max over sampled pairs
  double r3 = 0;  // max edge length (G3), exact
  Box verified_box;
  double grid_pitch = 0;  // pitch used by the (G1) cover test (<= r1/4)
};

/// Numerically certify (G1)-(G3) on `box`; r2 is taken over `samples`
/// random vertex pairs plus all antipodal hull pairs. Throws Disconnected
/// if some sampled pair admits no path.
GeometryCertificate certify_geometry(const EmbeddedGraph& g, const Box& box, int samples,
                                     std::uint64_t seed = 12345);

/// eps * (base graph) intersected with a closed region; edges survive iff
/// both endpoints do. Vertices keep a link to their base index so that
/// stationary per-edge data (costs, uniform flows) can be keyed on base
/// coordinates.
struct RestrictedGraph {
  const EmbeddedGraph* base = nullptr;
  double epsilon = 1.0;
  Region domain;
  std::vector<int> base_index;                        // restricted -> base vertex
  std::vector<int> from_base;                         // base vertex -> restricted (-1 if dropped)
  std::vector<Vec> vertices;                          // eps-scaled coordinates
  std::vector<std::pair<int, int>> edges;             // u < v, restricted indices
  std::vector<int> base_edge;                         // restricted edge -> base edge id
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, edge id)

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int find_edge(int u, int v) const;
  double edge_length(int e) const;
  /// Index of the restricted vertex nearest to p (ties: lowest index); -1 if empty.
  int nearest_vertex(const Vec& p) const;
};

RestrictedGraph restrict_rescale(const EmbeddedGraph& g, double epsilon, const Region& domain);

/// Dijkstra on Euclidean edge lengths; equal-length relaxations prefer the
/// lower-index predecessor, which makes path catalogues reproducible.
/// Returns the vertex sequence from x to y. Throws Disconnected.
std::vector<int> shortest_path(const EmbeddedGraph& g, int x, int y);
std::vector<int> shortest_path(const RestrictedGraph& g, int x, int y);

/// Path length in the ambient metric.
template <class G>
double path_length(const G& g, const std::vector<int>& path) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    s += num::dist(g.vertices[path[i]], g.vertices[path[i + 1]]);
  return s;
}

/// Connected components of the restricted graph; returns component id per vertex.
std::vector<int> components(const RestrictedGraph& g);

}  // namespace homflow::graph
