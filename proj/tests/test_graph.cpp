#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "homflow/delaunay.hpp"
#include "homflow/graph.hpp"

using namespace homflow;
using namespace homflow::graph;

namespace {

GraphSpec lattice2d(int cells) {
  GraphSpec s;
  s.kind = GraphKind::lattice_zd;
  s.dim = 2;
  s.period_hint = cells;
  return s;
}

// Brute-force Delaunay adjacency: (i,j) is an edge iff some circumcircle
// through i, j and a third point contains no other point strictly inside.
std::set<std::pair<int, int>> circumcircle_adjacency(const std::vector<Vec>& pts) {
  std::set<std::pair<int, int>> edges;
  const int n = static_cast<int>(pts.size());
  auto circum = [&](int a, int b, int c, double& cx, double& cy, double& r2) {
    double ax = pts[a][0], ay = pts[a][1], bx = pts[b][0], by = pts[b][1];
    double qx = pts[c][0], qy = pts[c][1];
    double d = 2 * (ax * (by - qy) + bx * (qy - ay) + qx * (ay - by));
    if (std::abs(d) < 1e-14) return false;
    double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = qx * qx + qy * qy;
    cx = (a2 * (by - qy) + b2 * (qy - ay) + c2 * (ay - by)) / d;
    cy = (a2 * (qx - bx) + b2 * (ax - qx) + c2 * (bx - ax)) / d;
    r2 = (ax - cx) * (ax - cx) + (ay - cy) * (ay - cy);
    return true;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool found = false;
      for (int k = 0; k < n && !found; ++k) {
        if (k == i || k == j) continue;
        double cx, cy, r2;
        if (!circum(i, j, k, cx, cy, r2)) continue;
        bool empty = true;
        for (int l = 0; l < n && empty; ++l) {
          if (l == i || l == j || l == k) continue;
          double d2 = (pts[l][0] - cx) * (pts[l][0] - cx) + (pts[l][1] - cy) * (pts[l][1] - cy);
          if (d2 < r2 - 1e-12) empty = false;
        }
        found = empty;
      }
      if (found) edges.insert({i, j});
    }
  return edges;
}

// Shortest simple path length by exhaustive search (tiny windows only).
void enumerate_paths(const RestrictedGraph& g, int cur, int goal, std::vector<bool>& used,
                     double len, double& best) {
  if (cur == goal) {
    best = std::min(best, len);
    return;
  }
  for (const auto& [v, e] : g.adj[cur]) {
    (void)e;
    if (used[v]) continue;
    used[v] = true;
    enumerate_paths(g, v, goal, used, len + num::dist(g.vertices[cur], g.vertices[v]), best);
    used[v] = false;
  }
}

}  // namespace

TEST_CASE("lattice window counts") {
  auto g = generate(lattice2d(3));
  CHECK(g.num_vertices() == 9);
  CHECK(g.num_edges() == 12);  // 24 directed
  for (int e = 0; e < g.num_edges(); ++e) CHECK(g.edge_length(e) == doctest::Approx(1.0));
}

TEST_CASE("zero jitter reproduces the lattice") {
  GraphSpec s = lattice2d(4);
  s.kind = GraphKind::jittered_lattice;
  s.jitter_amplitude = 0.0;
  s.seed = 99;
  auto g1 = generate(s);
  auto g2 = generate(lattice2d(4));
  REQUIRE(g1.num_vertices() == g2.num_vertices());
  for (int i = 0; i < g1.num_vertices(); ++i)
    CHECK(num::dist(g1.vertices[i], g2.vertices[i]) == 0.0);
  CHECK(g1.edges == g2.edges);
}

TEST_CASE("voronoi adjacency equals the circumcircle oracle") {
  GraphSpec s;
  s.kind = GraphKind::voronoi_points;
  s.dim = 2;
  s.jitter_amplitude = 0.3;
  s.seed = 7;
  s.period_hint = 4;  // 16 points
  auto g = generate(s);
  CHECK(g.num_vertices() == 16);
  auto oracle = circumcircle_adjacency(g.vertices);
  std::set<std::pair<int, int>> got(g.edges.begin(), g.edges.end());
  CHECK(got == oracle);
}

TEST_CASE("dense delaunay agrees with Bowyer-Watson away from the hull") {
  GraphSpec s;
  s.kind = GraphKind::jittered_lattice;
  s.dim = 2;
  s.jitter_amplitude = 0.3;
  s.seed = 19;
  s.window = IntBox{{0, 0}, {19, 19}};
  auto pts = generate(s).vertices;
  double r1 = std::sqrt(2.0) * (0.5 + s.jitter_amplitude);
  auto dense = homflow::delaunay::delaunay_edges_dense(pts, r1);
  auto bw = homflow::delaunay::delaunay_edges(pts);
  auto interior = [&](const std::pair<int, int>& e) {
    for (int v : {e.first, e.second})
      for (double c : pts[v])
        if (c < 3 * r1 || c > 19 - 3 * r1) return false;
    return true;
  };
  std::set<std::pair<int, int>> din, bin;
  for (const auto& e : dense)
    if (interior(e)) din.insert(e);
  for (const auto& e : bw)
    if (interior(e)) bin.insert(e);
  CHECK(din == bin);
  CHECK(din.size() > 200);
}

TEST_CASE("voronoi rejects d != 2") {
  GraphSpec s;
  s.kind = GraphKind::voronoi_points;
  s.dim = 3;
  s.jitter_amplitude = 0.2;
  CHECK_THROWS_AS(generate(s), UnsupportedDimension);
}

TEST_CASE("certificate on the grid") {
  auto g = generate(lattice2d(5));  // window [-2,2]^2
  Box box;
  box.lo = {-2.0, -2.0};
  box.hi = {2.0, 2.0};
  auto cert = certify_geometry(g, box, 120);
  CHECK(cert.r3 == doctest::Approx(1.0));
  CHECK(cert.r2 <= 2.0);
  CHECK(cert.r1 >= std::sqrt(2.0) / 2 - 1e-9);
  CHECK(cert.r1 <= 1.0);
  CHECK(cert.grid_pitch <= cert.r1 / 4 + 1e-12);

  // exhaustive (G2) on the 5x5 window: staircase paths give
  // length = |x-y|_1 <= sqrt(2)|x-y| <= 2 (|x-y| + 1)
  double worst = 0;
  for (int a = 0; a < g.num_vertices(); ++a)
    for (int b = a + 1; b < g.num_vertices(); ++b) {
      auto p = shortest_path(g, a, b);
      worst = std::max(worst,
                       path_length(g, p) / (num::dist(g.vertices[a], g.vertices[b]) + 1.0));
    }
  CHECK(worst <= 2.0);
  CHECK(cert.r2 <= worst + 1e-12);
}

TEST_CASE("every edge respects the certified r3") {
  for (auto kind : {GraphKind::jittered_lattice, GraphKind::voronoi_points}) {
    GraphSpec s = lattice2d(5);
    s.kind = kind;
    s.jitter_amplitude = 0.25;
    s.seed = 3;
    auto g = generate(s);
    Box box;
    box.lo = {-2.0, -2.0};
    box.hi = {2.0, 2.0};
    auto cert = certify_geometry(g, box, 60);
    for (int e = 0; e < g.num_edges(); ++e) CHECK(g.edge_length(e) <= cert.r3 + 1e-12);
  }
}

TEST_CASE("single vertex graph gets the fallback gap radius") {
  EmbeddedGraph g;
  g.dim = 2;
  g.vertices = {{0.5, 0.5}};
  g.finalize();
  Box box;
  box.lo = {0.0, 0.0};
  box.hi = {2.0, 2.0};
  auto cert = certify_geometry(g, box, 10);
  CHECK(cert.r1 <= num::dist(box.lo, box.hi) + 1e-12);
}

TEST_CASE("restriction and rescaling") {
  auto g = generate(lattice2d(7));
  Box unit;
  unit.lo = {0.0, 0.0};
  unit.hi = {1.0, 1.0};

  auto r2 = restrict_rescale(g, 0.5, Region::box(unit));
  CHECK(r2.num_vertices() == 9);  // pitch 1/2

  auto rid = restrict_rescale(g, 1.0, Region::whole_space());
  CHECK(rid.num_vertices() == g.num_vertices());
  CHECK(rid.num_edges() == g.num_edges());

  auto r3 = restrict_rescale(g, 1.0 / 3.0, Region::box(unit));
  CHECK(r3.num_vertices() == 16);
  CHECK(r3.num_edges() == 24);  // 48 directed
  for (const auto& [u, v] : r3.edges) {
    CHECK(unit.contains(r3.vertices[u]));
    CHECK(unit.contains(r3.vertices[v]));
  }
}

TEST_CASE("restriction rejects bad epsilon") {
  auto g = generate(lattice2d(3));
  CHECK_THROWS_AS(restrict_rescale(g, 1.5, Region::whole_space()), ScaleMismatch);
}

TEST_CASE("shortest path values and tie-breaking") {
  auto g = generate(lattice2d(5));
  auto vid = [&](double x, double y) {
    for (int i = 0; i < g.num_vertices(); ++i)
      if (g.vertices[i][0] == x && g.vertices[i][1] == y) return i;
    return -1;
  };
  auto p1 = shortest_path(g, vid(0, 0), vid(2, 0));
  CHECK(path_length(g, p1) == doctest::Approx(2.0));

  auto p2 = shortest_path(g, vid(0, 0), vid(1, 1));
  CHECK(path_length(g, p2) == doctest::Approx(2.0));
  REQUIRE(p2.size() == 3);
  // lexicographically smallest neighbor first: via (0, 1)
  CHECK(g.vertices[p2[1]][0] == 0.0);
  CHECK(g.vertices[p2[1]][1] == 1.0);
}

TEST_CASE("shortest path on a jittered window matches exhaustive enumeration") {
  GraphSpec s = lattice2d(3);
  s.kind = GraphKind::jittered_lattice;
  s.jitter_amplitude = 0.25;
  s.seed = 5;
  auto g = generate(s);
  auto rg = restrict_rescale(g, 1.0, Region::whole_space());
  rng::Stream rs(11);
  for (int t = 0; t < 8; ++t) {
    int a = rs.uniform_int(0, rg.num_vertices() - 1);
    int b = rs.uniform_int(0, rg.num_vertices() - 1);
    if (a == b) continue;
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> used(rg.num_vertices(), false);
    used[a] = true;
    enumerate_paths(rg, a, b, used, 0.0, best);
    auto p = shortest_path(rg, a, b);
    CHECK(path_length(rg, p) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("disconnected pairs throw") {
  EmbeddedGraph g;
  g.dim = 2;
  g.vertices = {{0.0, 0.0}, {5.0, 5.0}};
  g.finalize();
  CHECK_THROWS_AS(shortest_path(g, 0, 1), Disconnected);
}

TEST_CASE("jittered lattice keeps points separated") {
  GraphSpec s = lattice2d(5);
  s.kind = GraphKind::jittered_lattice;
  s.jitter_amplitude = 0.35;
  s.seed = 21;
  auto g = generate(s);
  double mind = 1e9;
  for (int a = 0; a < g.num_vertices(); ++a)
    for (int b = a + 1; b < g.num_vertices(); ++b)
      mind = std::min(mind, num::dist(g.vertices[a], g.vertices[b]));
  CHECK(mind >= 1.0 - 2 * s.jitter_amplitude - 1e-12);
  double lmax = std::sqrt((1 + 2 * 0.35) * (1 + 2 * 0.35) + 4 * 0.35 * 0.35);
  CHECK(g.max_edge_length() <= lmax + 1e-12);
}

TEST_CASE("same cells give the same points under window shifts") {
  GraphSpec s = lattice2d(4);
  s.kind = GraphKind::jittered_lattice;
  s.jitter_amplitude = 0.3;
  s.seed = 8;
  IntBox w1{{0, 0}, {4, 4}};
  IntBox w2{{1, 2}, {5, 6}};
  s.window = w1;
  auto g1 = generate(s);
  s.window = w2;
  auto g2 = generate(s);
  int matches = 0;
  for (const auto& v1 : g1.vertices)
    for (const auto& v2 : g2.vertices)
      if (num::dist(v1, v2) == 0.0) ++matches;
  CHECK(matches == 4 * 3);  // shared cells [1,4] x [2,4]
}
