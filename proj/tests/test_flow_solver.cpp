#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <cmath>

#include "homflow/flow_solver.hpp"
#include "homflow/simplex.hpp"

using namespace homflow;
using namespace homflow::solver;

namespace {

struct Instance {
  graph::EmbeddedGraph base;
  std::shared_ptr<graph::RestrictedGraph> g;
  std::shared_ptr<energy::LocalizedEnergy> en;
  FlowProblem problem;
};

Instance make_instance(graph::EmbeddedGraph base, energy::EdgeCostFamily fam) {
  Instance inst;
  inst.base = std::move(base);
  inst.g = std::make_shared<graph::RestrictedGraph>(
      graph::restrict_rescale(inst.base, 1.0, Region::whole_space()));
  inst.en = std::make_shared<energy::LocalizedEnergy>(inst.g.get(), fam, 1.0);
  inst.problem.graph = inst.g.get();
  inst.problem.energy = inst.en.get();
  inst.problem.region = Region::whole_space();
  inst.problem.m = calculus::VertexMeasure(inst.g.get(), 1);
  inst.problem.value_dim = 1;
  return inst;
}

graph::EmbeddedGraph path_graph(int n) {
  graph::EmbeddedGraph g;
  g.dim = 1;
  for (int i = 0; i < n; ++i) g.vertices.push_back({static_cast<double>(i)});
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  g.finalize();
  return g;
}

graph::EmbeddedGraph grid(int cells) {
  graph::GraphSpec s;
  s.kind = graph::GraphKind::lattice_zd;
  s.dim = 2;
  s.period_hint = cells;
  return graph::generate(s);
}

// Independent LP oracle: the arc-split Beckmann LP solved by the dense
// simplex on the plain formulation (per-vertex balance rows).
double beckmann_lp_oracle(const FlowProblem& p) {
  const auto& g = *p.graph;
  simplex::LinearProgram lp;
  lp.num_vars = 2 * g.num_edges();
  lp.objective.resize(lp.num_vars);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    double w = p.energy->edge_cost(e).a *
               geom::clipped_length(g.vertices[u], g.vertices[v], p.region);
    lp.objective[2 * e] = w;
    lp.objective[2 * e + 1] = w;
  }
  for (int x = 0; x < g.num_vertices(); ++x) {
    simplex::Constraint c{std::vector<double>(lp.num_vars, 0.0), simplex::Relation::eq,
                          p.m.at(x)[0]};
    for (const auto& [y, e] : g.adj[x]) {
      (void)y;
      auto [eu, ev] = g.edges[e];
      double sign = (x == eu) ? 1.0 : -1.0;
      c.coeffs[2 * e] += sign;
      c.coeffs[2 * e + 1] -= sign;
    }
    lp.constraints.push_back(std::move(c));
  }
  auto res = simplex::solve(lp);
  REQUIRE(res.status == simplex::LpStatus::optimal);
  return res.value;
}

}  // namespace

TEST_CASE("path graph with a forced flow") {
  energy::EdgeCostFamily fam;  // unit |.|
  auto inst = make_instance(path_graph(3), fam);
  inst.problem.m.at(0)[0] = 1.0;
  inst.problem.m.at(2)[0] = -1.0;
  auto sol = solve_convex(inst.problem);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(sol.J.at(0, 1)[0] == doctest::Approx(1.0));
  CHECK(sol.J.at(1, 2)[0] == doctest::Approx(1.0));
}

TEST_CASE("parallel routes pick the cheap one") {
  // two 2-edge routes; the long one costs sqrt(5) per edge
  graph::EmbeddedGraph g;
  g.dim = 2;
  g.vertices = {{0.0, 0.0}, {0.0, 1.0}, {2.0, 1.0}, {0.0, 2.0}};  // s, a, b, t
  g.add_edge(0, 1);
  g.add_edge(1, 3);
  g.add_edge(0, 2);
  g.add_edge(2, 3);
  g.finalize();
  energy::EdgeCostFamily fam;
  auto inst = make_instance(std::move(g), fam);
  inst.problem.m.at(0)[0] = 1.0;
  inst.problem.m.at(3)[0] = -1.0;
  auto sol = solve_convex(inst.problem);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(sol.objective == doctest::Approx(beckmann_lp_oracle(inst.problem)).epsilon(1e-9));
  CHECK(std::abs(sol.J.at(0, 2)[0]) <= 1e-12);
}

TEST_CASE("grid Beckmann equals the Manhattan distance") {
  energy::EdgeCostFamily fam;
  auto inst = make_instance(grid(3), fam);  // 3x3 window [-1,1]^2
  int a = -1, b = -1;
  for (int i = 0; i < inst.g->num_vertices(); ++i) {
    if (inst.g->vertices[i] == Vec{-1.0, -1.0}) a = i;
    if (inst.g->vertices[i] == Vec{1.0, 1.0}) b = i;
  }
  inst.problem.m.at(a)[0] = 1.0;
  inst.problem.m.at(b)[0] = -1.0;
  auto sol = solve_convex(inst.problem);
  CHECK(sol.objective == doctest::Approx(4.0));
  CHECK(sol.objective == doctest::Approx(beckmann_lp_oracle(inst.problem)).epsilon(1e-9));
}

TEST_CASE("random weighted instances match the LP oracle") {
  rng::Stream rs(5);
  for (int t = 0; t < 12; ++t) {
    energy::EdgeCostFamily fam;
    fam.seed = 100 + t;
    fam.p_min = 0.5;
    fam.p_max = 2.5;
    auto inst = make_instance(grid(3), fam);
    int n = inst.g->num_vertices();
    double total = 0;
    for (int k = 0; k < 3; ++k) {
      int v = rs.uniform_int(0, n - 1);
      double mass = rs.uniform(-1.5, 1.5);
      inst.problem.m.at(v)[0] += mass;
      total += mass;
    }
    inst.problem.m.at(rs.uniform_int(0, n - 1))[0] -= total;
    auto sol = solve_convex(inst.problem);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(beckmann_lp_oracle(inst.problem)).epsilon(1e-9));
  }
}

TEST_CASE("piecewise linear convex costs against brute force") {
  rng::Stream rs(9);
  for (int t = 0; t < 6; ++t) {
    energy::EdgeCostFamily fam;
    fam.kind = energy::CostKind::piecewise_linear_convex;
    fam.seed = 55 + t;
    fam.p_min = 0.5;
    fam.p_max = 1.5;
    // 2x3 grid: two fundamental cycles
    graph::GraphSpec s;
    s.kind = graph::GraphKind::lattice_zd;
    s.dim = 2;
    s.window = graph::IntBox{{0, 0}, {2, 1}};
    auto inst = make_instance(graph::generate(s), fam);
    inst.problem.m.at(0)[0] = 2.0;
    inst.problem.m.at(5)[0] = -2.0;
    auto sol = solve_convex(inst.problem);
    REQUIRE(sol.status == SolveStatus::optimal);
    // refine the oracle grid around the optimum (valid for convex objectives)
    auto oracle = brute_force(inst.problem, 0.02, 3.0);
    CHECK(sol.objective <= oracle.objective + 1e-9);
    CHECK(oracle.objective - sol.objective <= 0.1);
    double resid = calculus::VertexMeasure(calculus::dive(sol.J) - inst.problem.m).total_variation();
    CHECK(resid <= 1e-8);
  }
}

TEST_CASE("nonconvex closed forms and cross checks") {
  // single edge, demand 2, capped cost: objective min(2 alpha, beta + 2 gamma)
  energy::EdgeCostFamily fam;
  fam.kind = energy::CostKind::nonconvex_capped;
  fam.p_min = 1.0;
  fam.p_max = 1.0;
  fam.b_override = 0.5;
  fam.c_override = 0.25;
  auto inst = make_instance(path_graph(2), fam);
  inst.problem.m.at(0)[0] = 2.0;
  inst.problem.m.at(1)[0] = -2.0;
  auto sol = solve_nonconvex(inst.problem, 2, 40);
  CHECK(sol.status == SolveStatus::heuristic);
  CHECK(sol.objective == doctest::Approx(1.0));  // min(2, 0.5 + 0.5)

  // a convex instance: the heuristic reaches the convex optimum
  energy::EdgeCostFamily wfam;
  wfam.seed = 3;
  wfam.p_min = 0.5;
  wfam.p_max = 2.0;
  auto conv = make_instance(grid(3), wfam);
  conv.problem.m.at(0)[0] = 1.0;
  conv.problem.m.at(8)[0] = -1.0;
  auto exact = solve_convex(conv.problem);
  auto heur = solve_nonconvex(conv.problem, 3, 80);
  CHECK(heur.objective <= exact.objective + 1e-6);
  CHECK(heur.objective >= exact.objective - 1e-9);

  // nonconvex 4-cycle against the grid oracle
  energy::EdgeCostFamily cfam;
  cfam.kind = energy::CostKind::nonconvex_capped;
  cfam.seed = 7;
  cfam.p_min = 0.8;
  cfam.p_max = 1.6;
  graph::GraphSpec cs;
  cs.kind = graph::GraphKind::lattice_zd;
  cs.dim = 2;
  cs.window = graph::IntBox{{0, 0}, {1, 1}};
  auto cyc = make_instance(graph::generate(cs), cfam);
  cyc.problem.m.at(0)[0] = 1.5;
  cyc.problem.m.at(3)[0] = -1.5;
  auto h = solve_nonconvex(cyc.problem, 6, 80);
  auto oracle = brute_force(cyc.problem, 0.001, 3.0);
  CHECK(h.objective <= oracle.objective + 1e-4);
}

TEST_CASE("determinism of the heuristic") {
  energy::EdgeCostFamily fam;
  fam.kind = energy::CostKind::nonconvex_capped;
  fam.seed = 21;
  fam.p_min = 0.5;
  fam.p_max = 2.0;
  auto inst = make_instance(grid(3), fam);
  inst.problem.m.at(2)[0] = 1.0;
  inst.problem.m.at(6)[0] = -1.0;
  auto s1 = solve_nonconvex(inst.problem, 3, 50, 77);
  auto s2 = solve_nonconvex(inst.problem, 3, 50, 77);
  CHECK(s1.objective == s2.objective);
  for (int e = 0; e < inst.g->num_edges(); ++e)
    CHECK(s1.J.canonical(e)[0] == s2.J.canonical(e)[0]);
}

TEST_CASE("brute force on trees and variable limits") {
  energy::EdgeCostFamily fam;
  auto tree = make_instance(path_graph(4), fam);
  tree.problem.m.at(0)[0] = 1.0;
  tree.problem.m.at(3)[0] = -1.0;
  auto sol = brute_force(tree.problem, 0.5, 1.0);
  CHECK(sol.status == SolveStatus::optimal);  // cycle space empty
  CHECK(sol.objective == doctest::Approx(3.0));

  auto big = make_instance(grid(4), fam);  // 9 cycles
  big.problem.m.at(0)[0] = 1.0;
  big.problem.m.at(1)[0] = -1.0;
  CHECK_THROWS_AS(brute_force(big.problem, 0.5, 1.0), TooManyFreeVariables);
}

TEST_CASE("infeasible mass distributions throw") {
  energy::EdgeCostFamily fam;
  auto inst = make_instance(path_graph(3), fam);
  inst.problem.m.at(0)[0] = 1.0;  // no compensating sink
  CHECK_THROWS_AS(solve_convex(inst.problem), Infeasible);
  CHECK_THROWS_AS(cycle_space(inst.problem), Infeasible);
}

TEST_CASE("pinned edges move to the right hand side") {
  energy::EdgeCostFamily fam;
  auto inst = make_instance(path_graph(4), fam);
  // pin the middle edge to carry 1.5; demand 1.5 end to end
  int mid = inst.g->find_edge(1, 2);
  inst.problem.pinned[mid] = {1.5};
  inst.problem.m.at(0)[0] = 1.5;
  inst.problem.m.at(3)[0] = -1.5;
  auto sol = solve_convex(inst.problem);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.J.at(1, 2)[0] == 1.5);
  CHECK(sol.J.at(0, 1)[0] == doctest::Approx(1.5));
  CHECK(sol.objective == doctest::Approx(4.5));
}

TEST_CASE("spanning tree parametrization round trip") {
  energy::EdgeCostFamily fam;
  fam.seed = 10;
  auto inst = make_instance(grid(3), fam);
  inst.problem.m.at(1)[0] = 1.0;
  inst.problem.m.at(7)[0] = -1.0;
  auto cs = cycle_space(inst.problem);
  rng::Stream rs(15);
  // random feasible field: base + random cycle combination
  std::vector<double> t(cs.cycles.size());
  for (double& x : t) x = rs.uniform(-2.0, 2.0);
  auto J = field_from_coordinates(inst.problem, cs, t);
  double resid = calculus::VertexMeasure(calculus::dive(J) - inst.problem.m).total_variation();
  CHECK(resid <= 1e-12);
  // recover the coordinates from the chords and rebuild
  std::vector<double> t2(cs.cycles.size());
  for (std::size_t c = 0; c < cs.cycles.size(); ++c)
    t2[c] = J.canonical(cs.chord_edges[c])[0] - cs.base_solution.canonical(cs.chord_edges[c])[0];
  auto J2 = field_from_coordinates(inst.problem, cs, t2);
  for (int e = 0; e < inst.g->num_edges(); ++e)
    CHECK(J2.canonical(e)[0] == doctest::Approx(J.canonical(e)[0]).epsilon(1e-12));
}

TEST_CASE("convex engine rejects vector species") {
  energy::EdgeCostFamily fam;
  auto inst = make_instance(path_graph(3), fam);
  inst.problem.value_dim = 2;
  inst.problem.m = calculus::VertexMeasure(inst.g.get(), 2);
  CHECK_THROWS_AS(solve_convex(inst.problem), Error);
}
