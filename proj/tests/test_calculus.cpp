#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <cmath>

#include "homflow/calculus.hpp"

using namespace homflow;
using namespace homflow::calculus;

namespace {

graph::EmbeddedGraph lattice(int dim, int cells) {
  graph::GraphSpec s;
  s.kind = graph::GraphKind::lattice_zd;
  s.dim = dim;
  s.period_hint = cells;
  return graph::generate(s);
}

DiscreteField random_field(const graph::RestrictedGraph& g, rng::Stream& rs, int n = 1) {
  DiscreteField J(&g, n);
  for (int e = 0; e < g.num_edges(); ++e) {
    Vec v(n);
    for (double& x : v) x = rs.uniform(-2.0, 2.0);
    J.set_canonical(e, v);
  }
  return J;
}

int vertex_at(const graph::RestrictedGraph& g, std::initializer_list<double> coords) {
  Vec p(coords);
  for (int i = 0; i < g.num_vertices(); ++i)
    if (num::dist(g.vertices[i], p) < 1e-12) return i;
  return -1;
}

}  // namespace

TEST_CASE("gradient basics") {
  auto base = lattice(2, 4);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());

  std::vector<double> constant(g.num_vertices(), 3.14);
  auto gc = grad(g, constant);
  for (int e = 0; e < g.num_edges(); ++e) CHECK(gc.canonical(e)[0] == 0.0);

  std::vector<double> x1(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) x1[i] = g.vertices[i][0];
  auto gx = grad(g, x1);
  int a = vertex_at(g, {0.0, 0.0}), b = vertex_at(g, {0.0, 1.0}), c = vertex_at(g, {1.0, 0.0});
  CHECK(gx.at(a, b)[0] == 0.0);       // e2 edge, psi = x.e1
  CHECK(gx.at(a, c)[0] == 1.0);
  CHECK(gx.at(c, a)[0] == -1.0);      // antisymmetry through accessor
}

TEST_CASE("one dimensional gradient of the identity") {
  auto base = lattice(1, 5);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  std::vector<double> psi(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) psi[i] = g.vertices[i][0];
  auto gp = grad(g, psi);
  for (int e = 0; e < g.num_edges(); ++e) CHECK(std::abs(gp.canonical(e)[0]) == 1.0);
}

TEST_CASE("divergence of path fluxes and grid fields") {
  auto base = lattice(2, 3);  // window [-1,1]^2
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());

  auto path = graph::shortest_path(g, 0, 5);
  auto d = dive(unit_path_flux(g, path));
  for (int x = 0; x < g.num_vertices(); ++x) {
    double want = x == 0 ? 1.0 : (x == 5 ? -1.0 : 0.0);
    CHECK(d.at(x)[0] == want);
  }

  DiscreteField zero(&g, 1);
  CHECK(dive(zero).total_variation() == 0.0);

  // J = 1 on every e1 edge: net outflow +1 on the left column, -1 right
  DiscreteField J(&g, 1);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    if (g.vertices[v][0] - g.vertices[u][0] != 0.0) J.set_canonical(e, {1.0});
  }
  auto dj = dive(J);
  for (int x = 0; x < g.num_vertices(); ++x) {
    double col = g.vertices[x][0];
    double want = col == -1.0 ? 1.0 : (col == 1.0 ? -1.0 : 0.0);
    CHECK(dj.at(x)[0] == want);
  }
}

TEST_CASE("path flux rejects bad paths") {
  auto base = lattice(2, 3);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  int a = vertex_at(g, {-1.0, -1.0}), far = vertex_at(g, {1.0, 1.0});
  CHECK_THROWS_AS(unit_path_flux(g, {a, far}), NotAPath);
  auto cycle = std::vector<int>{a, vertex_at(g, {-1.0, 0.0}), a};
  CHECK_THROWS_AS(unit_path_flux(g, cycle), NotSimple);
  CHECK(dive(unit_path_flux(g, {a})).total_variation() == 0.0);  // length 0
}

TEST_CASE("hat function midpoint identity") {
  auto base = lattice(2, 4);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  std::vector<double> ones(g.num_vertices(), 1.0);
  for (double k : hat(g, ones)) CHECK(k == 1.0);

  std::vector<double> lin(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) lin[i] = 2 * g.vertices[i][0] - g.vertices[i][1];
  auto h = hat(g, lin);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    Vec mid = num::scaled(num::add(g.vertices[u], g.vertices[v]), 0.5);
    CHECK(h[e] == doctest::Approx(2 * mid[0] - mid[1]).epsilon(1e-14));
  }

  int a = vertex_at(g, {0.0, 0.0}), c = vertex_at(g, {1.0, 0.0});
  std::vector<double> x1(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) x1[i] = g.vertices[i][0];
  CHECK(hat(g, x1)[g.find_edge(a, c)] == doctest::Approx(0.5));
}

TEST_CASE("star products and the Leibniz identity") {
  auto base = lattice(2, 4);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  rng::Stream rs(7);

  EdgeScalar zero(g.num_edges(), 0.0);
  auto J = random_field(g, rs);
  CHECK(star(zero, J).total_variation() == 0.0);

  // Leibniz: DIVE(hat(psi) J) = psi DIVE J + grad(psi) star J
  for (int trial = 0; trial < 10; ++trial) {
    auto Jr = random_field(g, rs, 2);
    std::vector<double> psi(g.num_vertices());
    for (double& p : psi) p = rs.uniform(-1.0, 1.0);
    auto lhs = dive(edge_scale(hat(g, psi), Jr));
    auto d = dive(Jr);
    auto s = star(grad(g, psi), Jr);
    double worst = 0;
    for (int x = 0; x < g.num_vertices(); ++x) {
      Vec want = num::scaled(d.at(x), psi[x]);
      num::axpy(want, 1.0, s.at(x));
      worst = std::max(worst, num::dist(lhs.at(x), want));
    }
    CHECK(worst <= 1e-12);
  }

  // K = grad(x.e1), J = unit flux along an e1 line: interior value 1
  std::vector<double> x1(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) x1[i] = g.vertices[i][0];
  std::vector<int> line;
  for (double x = -1.0; x <= 2.0; x += 1.0) line.push_back(vertex_at(g, {x, 0.0}));
  auto flux = unit_path_flux(g, line);
  auto sv = star(grad(g, x1), flux);
  for (std::size_t i = 1; i + 1 < line.size(); ++i) CHECK(sv.at(line[i])[0] == doctest::Approx(1.0));
}

TEST_CASE("embedding total variation") {
  graph::EmbeddedGraph base;
  base.dim = 2;
  base.vertices = {{0.0, 0.0}, {1.0, 0.0}};
  base.add_edge(0, 1);
  base.finalize();
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  DiscreteField J(&g, 1);
  J.set_canonical(0, {2.0});
  CHECK(embed(J).total_variation() == doctest::Approx(2.0));
  CHECK(J.at(1, 0)[0] == -2.0);

  DiscreteField zero(&g, 1);
  CHECK(embed(zero).atoms.empty());
}

TEST_CASE("embedding intertwines with the divergence") {
  auto base = lattice(2, 4);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  rng::Stream rs(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto J = random_field(g, rs);
    // Psi(x) = x1 e1*: <iota J, grad Psi> + <DIVE J, Psi> = 0
    PolyField Psi{Polynomial::coordinate(2, 0)};
    std::vector<PolyField> rows(1);
    for (int k = 0; k < 2; ++k) rows[0].push_back(Psi[0].partial(k));
    double a = pair_with_test(embed(J), rows);
    double b = pair_with_test(dive(J), Psi);
    CHECK(std::abs(a + b) <= 1e-12);
  }
}

TEST_CASE("polynomial pairings are exact") {
  graph::EmbeddedGraph base;
  base.dim = 2;
  base.vertices = {{0.0, 0.0}, {1.0, 0.0}};
  base.add_edge(0, 1);
  base.finalize();
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  DiscreteField J(&g, 1);
  J.set_canonical(0, {1.0});
  auto m = embed(J);

  // phi == 1: the total vector (1, 0)
  auto total = moment(m, Polynomial::constant(2, 1.0));
  CHECK(total[0] == doctest::Approx(1.0));
  CHECK(total[1] == doctest::Approx(0.0));

  // phi = x1 against the unit e1 edge: int_0^1 t dt = 1/2
  auto mom = moment(m, Polynomial::coordinate(2, 0));
  CHECK(mom[0] == doctest::Approx(0.5));

  // quadratic phi against a dense midpoint-Riemann oracle; the rule's own
  // error bound f'' h^2 / 24 must sit below the asserted tolerance
  Polynomial quad = Polynomial::coordinate(2, 0) * Polynomial::coordinate(2, 0);
  quad.add_term({0, 1}, 0.7);
  auto exact = moment(m, quad);
  const int N = 200000;
  double riemann = 0;
  for (int i = 0; i < N; ++i) {
    double t = (i + 0.5) / N;
    riemann += quad.eval({t, 0.0}) / N;
  }
  CHECK(std::abs(exact[0] - riemann) <= 1e-10);

  Polynomial deg4 = quad * quad;
  CHECK_THROWS_AS(moment(m, deg4), DegreeTooHigh);
}

TEST_CASE("gradient comparison bound") {
  // |<iota_eps J, Psi x grad psi> - <grad psi star J, Psi>|
  //    <= R3 eps Lip(Psi) |grad psi . iota_eps J|(B_eps)
  auto base = lattice(2, 9);
  double eps = 0.25;
  auto g = graph::restrict_rescale(base, eps, Region::whole_space());
  rng::Stream rs(17);
  for (int trial = 0; trial < 6; ++trial) {
    auto J = random_field(g, rs);
    // psi in C^1: a random quadratic; Psi a random affine field (Lipschitz)
    Polynomial psi(2);
    psi.add_term({1, 0}, rs.uniform(-1.0, 1.0));
    psi.add_term({0, 1}, rs.uniform(-1.0, 1.0));
    psi.add_term({2, 0}, rs.uniform(-0.5, 0.5));
    psi.add_term({1, 1}, rs.uniform(-0.5, 0.5));
    Polynomial Psi(2);
    Psi.add_term({0, 0}, rs.uniform(-1.0, 1.0));
    double a1 = rs.uniform(-1.0, 1.0), a2 = rs.uniform(-1.0, 1.0);
    Psi.add_term({1, 0}, a1);
    Psi.add_term({0, 1}, a2);
    double lip = std::sqrt(a1 * a1 + a2 * a2);

    // vertex values of psi for the discrete side
    std::vector<double> psi_v(g.num_vertices());
    for (int i = 0; i < g.num_vertices(); ++i) psi_v[i] = psi.eval(g.vertices[i]);

    // <iota J, Psi x grad psi> via per-segment quadrature (degree <= 3 exact)
    std::vector<PolyField> rows(1);
    for (int k = 0; k < 2; ++k) rows[0].push_back(Psi * psi.partial(k));
    double lhs1 = pair_with_test(embed(J), rows);
    PolyField PsiF{Psi};
    double lhs2 = pair_with_test(star(grad(g, psi_v), J), PsiF);
    double lhs = std::abs(lhs1 - lhs2);

    // |grad psi . iota J|(R^2) numerically (8-point Gauss on segments)
    double rhs_var = 0;
    for (const auto& atom : embed(J).atoms) {
      double len = num::dist(atom.a, atom.b);
      double acc = 0;
      for (int q = 0; q < 8; ++q) {
        double t = (q + 0.5) / 8;
        Vec z = atom.a;
        num::axpy(z, t, num::sub(atom.b, atom.a));
        double g1 = psi.partial(0).eval(z), g2 = psi.partial(1).eval(z);
        acc += std::abs(atom.density[0] * g1 + atom.density[1] * g2) / 8;
      }
      rhs_var += acc * len;
    }
    double r3 = 1.0;  // unit grid
    CHECK(lhs <= r3 * eps * lip * rhs_var + 1e-10);
  }
}

TEST_CASE("segment measure export") {
  auto base = lattice(2, 3);
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  rng::Stream rs(5);
  auto J = random_field(g, rs);
  auto m = embed(J);
  m.write_csv("/tmp/homflow_segments.csv");
  std::ifstream in("/tmp/homflow_segments.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(m.atoms.size()) + 1);
}

TEST_CASE("variation on boxes uses exact clipping") {
  graph::EmbeddedGraph base;
  base.dim = 2;
  base.vertices = {{0.0, 0.0}, {1.0, 0.0}};
  base.add_edge(0, 1);
  base.finalize();
  auto g = graph::restrict_rescale(base, 1.0, Region::whole_space());
  DiscreteField J(&g, 1);
  J.set_canonical(0, {3.0});
  Box half;
  half.lo = {0.0, -1.0};
  half.hi = {0.5, 1.0};
  CHECK(embed(J).variation_on(Region::box(half)) == doctest::Approx(1.5));
  // overlapping boxes are merged, not double counted
  Box quarter;
  quarter.lo = {0.25, -1.0};
  quarter.hi = {0.75, 1.0};
  Region both;
  both.boxes = {half, quarter};
  CHECK(embed(J).variation_on(both) == doctest::Approx(3.0 * 0.75));
}
