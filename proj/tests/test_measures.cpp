#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "homflow/measures.hpp"

using namespace homflow;
using namespace homflow::measures;

namespace {

AtomicMeasure scalar1d(std::initializer_list<std::pair<double, double>> atoms) {
  AtomicMeasure m;
  m.space_dim = 1;
  m.value_dim = 1;
  m.reference_point = {0.0};
  for (auto [x, v] : atoms) m.add({x}, {v});
  return m;
}

// Exact scalar W1 for zero-mass 1d measures: integral of |CDF|.
double w1_cdf_oracle(const AtomicMeasure& m) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [p, v] : m.atoms) pts.emplace_back(p[0], v[0]);
  std::sort(pts.begin(), pts.end());
  double cost = 0, cdf = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    cdf += pts[i].second;
    cost += std::abs(cdf) * (pts[i + 1].first - pts[i].first);
  }
  return cost;
}

AtomicMeasure random_measure(rng::Stream& rs, int dim, int atoms, bool zero_mass) {
  AtomicMeasure m;
  m.space_dim = dim;
  m.value_dim = 1;
  m.reference_point.assign(dim, 0.0);
  double total = 0;
  for (int k = 0; k < atoms; ++k) {
    Vec p(dim);
    for (double& x : p) x = rs.uniform(-2.0, 2.0);
    double v = rs.uniform(-1.0, 1.0);
    total += v;
    m.add(p, {v});
  }
  if (zero_mass && !m.atoms.empty()) m.atoms.back().second[0] -= total;
  return m;
}

}  // namespace

TEST_CASE("total variation") {
  CHECK(total_variation(scalar1d({{0.0, 1.0}, {1.0, -1.0}})) == doctest::Approx(2.0));
  CHECK(total_variation(scalar1d({})) == 0.0);
  CHECK(total_variation(scalar1d({{0.5, 1.0}, {0.5, -1.0}})) == 0.0);  // coalesced
}

TEST_CASE("kr_tilde on dipoles equals the distance") {
  AtomicMeasure m;
  m.space_dim = 2;
  m.value_dim = 1;
  m.reference_point = {0.0, 0.0};
  m.add({0.25, 0.5}, {1.0});
  m.add({2.0, -1.0}, {-1.0});
  double d = num::dist({0.25, 0.5}, {2.0, -1.0});
  CHECK(kr_tilde(m).value == doctest::Approx(d).epsilon(1e-9));
  CHECK(kr_tilde(m).mode == KrMode::exact_scalar);

  CHECK(kr_tilde(scalar1d({})).value == 0.0);
}

TEST_CASE("kr_tilde three atom example") {
  // +1 at 0, +1 at 1, -2 at 3: optimal plan 0->3 and 1->3, cost 3 + 2 = 5
  auto m = scalar1d({{0.0, 1.0}, {1.0, 1.0}, {3.0, -2.0}});
  CHECK(w1_cdf_oracle(m) == doctest::Approx(5.0));
  CHECK(kr_tilde(m).value == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("kr norm of dipoles saturates at 2") {
  auto near = scalar1d({{0.0, 1.0}, {0.7, -1.0}});
  CHECK(kr(near).value == doctest::Approx(0.7).epsilon(1e-9));
  auto far = scalar1d({{0.0, 1.0}, {9.0, -1.0}});
  CHECK(kr(far).value == doctest::Approx(2.0).epsilon(1e-9));
  auto mass = scalar1d({{4.0, -2.5}});
  CHECK(kr(mass).value == doctest::Approx(2.5).epsilon(1e-9));  // psi == -1
}

TEST_CASE("kr chain inequalities on random measures") {
  rng::Stream rs(31);
  for (int t = 0; t < 100; ++t) {
    auto m = random_measure(rs, 2, 2 + t % 5, false);
    double k = kr(m).value;
    double kt = kr_tilde(m).value;
    double diam = 4.0 * std::sqrt(2.0);
    double cx = 1.0 + std::max(1.0, diam + 2.0 * std::sqrt(2.0));  // atoms + x0 hull
    CHECK(k <= kt + 1e-9);
    CHECK(kt <= cx * k + 1e-9);
    CHECK(k <= total_variation(m) + 1e-9);
  }
}

TEST_CASE("norm axioms on random triples") {
  rng::Stream rs(77);
  for (int t = 0; t < 50; ++t) {
    auto m1 = random_measure(rs, 2, 3, false);
    auto m2 = random_measure(rs, 2, 3, false);
    AtomicMeasure sum = m1;
    for (const auto& [p, v] : m2.atoms) sum.add(p, v);
    CHECK(kr(sum).value <= kr(m1).value + kr(m2).value + 1e-9);
    CHECK(kr_tilde(sum).value <= kr_tilde(m1).value + kr_tilde(m2).value + 1e-9);
    AtomicMeasure scaled = m1;
    double lambda = rs.uniform(-3.0, 3.0);
    for (auto& [p, v] : scaled.atoms) v[0] *= lambda;
    CHECK(kr(scaled).value == doctest::Approx(std::abs(lambda) * kr(m1).value).epsilon(1e-7));
    CHECK(kr_tilde(scaled).value ==
          doctest::Approx(std::abs(lambda) * kr_tilde(m1).value).epsilon(1e-7));
  }
}

TEST_CASE("kr_tilde matches the 1d CDF transport oracle") {
  rng::Stream rs(13);
  for (int t = 0; t < 40; ++t) {
    auto m = random_measure(rs, 1, 2 + t % 5, true);
    CHECK(kr_tilde(m).value == doctest::Approx(w1_cdf_oracle(m)).epsilon(1e-9));
  }
}

TEST_CASE("kr_tilde scaling under dilations") {
  // pushing atoms through y -> (y - z)/delta scales the norm within
  // [min(1, 1/delta), max(1, 1/delta)]
  rng::Stream rs(41);
  for (double delta : {0.25, 0.5, 2.0, 5.0}) {
    for (int t = 0; t < 10; ++t) {
      auto m = random_measure(rs, 2, 4, true);
      AtomicMeasure pushed = m;
      Vec z{0.3, -0.4};
      for (auto& [p, v] : pushed.atoms)
        for (int k = 0; k < 2; ++k) p[k] = (p[k] - z[k]) / delta;
      pushed.reference_point = {(m.reference_point[0] - z[0]) / delta,
                                (m.reference_point[1] - z[1]) / delta};
      double ratio = kr_tilde(pushed).value / std::max(kr_tilde(m).value, 1e-300);
      CHECK(ratio >= std::min(1.0, 1.0 / delta) - 1e-9);
      CHECK(ratio <= std::max(1.0, 1.0 / delta) + 1e-9);
    }
  }
}

TEST_CASE("t1 flow plans") {
  auto dipole = scalar1d({{0.0, 1.0}, {1.0, -1.0}});
  auto f = t1_flow(dipole);
  CHECK(f.total_cost == doctest::Approx(1.0));
  REQUIRE(f.component_plans.size() == 1);
  REQUIRE(f.component_plans[0].entries.size() == 1);
  CHECK(f.component_plans[0].entries[0].mass == doctest::Approx(1.0));

  // sources at 0, 2 and sinks at 1, 3: monotone matching costs 2, the
  // crossing matching costs 4
  auto two = scalar1d({{0.0, 1.0}, {2.0, 1.0}, {1.0, -1.0}, {3.0, -1.0}});
  CHECK(t1_flow(two).total_cost == doctest::Approx(2.0));

  // vector case: independent component plans, total = sum of costs
  AtomicMeasure vec;
  vec.space_dim = 1;
  vec.value_dim = 2;
  vec.reference_point = {0.0};
  vec.add({0.0}, {1.0, 0.0});
  vec.add({1.0}, {-1.0, 1.0});
  vec.add({4.0}, {0.0, -1.0});
  auto vf = t1_flow(vec);
  CHECK(vf.component_plans[0].cost == doctest::Approx(1.0));
  CHECK(vf.component_plans[1].cost == doctest::Approx(3.0));
  CHECK(vf.total_cost == doctest::Approx(4.0));

  CHECK_THROWS_AS(t1_flow(scalar1d({{0.0, 1.0}})), MassImbalance);
}

TEST_CASE("vector kr_tilde is the componentwise sum upper bound") {
  AtomicMeasure vec;
  vec.space_dim = 2;
  vec.value_dim = 2;
  vec.reference_point = {0.0, 0.0};
  vec.add({0.0, 0.0}, {1.0, 2.0});
  vec.add({1.0, 0.0}, {-1.0, 0.0});
  vec.add({0.0, 3.0}, {0.0, -2.0});
  auto v = kr_tilde(vec);
  CHECK(v.mode == KrMode::component_sum_upper_bound);
  CHECK(v.value == doctest::Approx(1.0 + 2.0 * 3.0).epsilon(1e-9));
}

TEST_CASE("large measures switch to the transport route consistently") {
  // 50 atoms forces the flow path for kr_tilde; t1_flow is an independently
  // coded bipartite formulation of the same value.
  rng::Stream rs(59);
  auto m = random_measure(rs, 2, 50, true);
  CHECK(kr_tilde(m).value == doctest::Approx(t1_flow(m).total_cost).epsilon(1e-9));
}
