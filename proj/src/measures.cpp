#include "homflow/measures.hpp"

#include <algorithm>
#include <cmath>

#include "homflow/mincost.hpp"
#include "homflow/simplex.hpp"

namespace homflow::measures {

void AtomicMeasure::coalesce(double point_tol, double value_tol) {
  std::vector<std::pair<Vec, Vec>> merged;
  for (const auto& [p, v] : atoms) {
    bool found = false;
    for (auto& [q, w] : merged) {
      if (num::dist(p, q) <= point_tol) {
        num::axpy(w, 1.0, v);
        found = true;
        break;
      }
    }
    if (!found) merged.emplace_back(p, v);
  }
  atoms.clear();
  for (auto& [q, w] : merged)
    if (num::norm(w) > value_tol) atoms.emplace_back(std::move(q), std::move(w));
}

Vec AtomicMeasure::total_mass() const {
  Vec m(value_dim, 0.0);
  for (const auto& [p, v] : atoms) num::axpy(m, 1.0, v);
  return m;
}

bool AtomicMeasure::zero_mass(double tol) const { return num::near_zero(total_mass(), tol); }

double total_variation(const AtomicMeasure& m) {
  AtomicMeasure c = m;
  c.coalesce();
  double s = 0;
  for (const auto& [p, v] : c.atoms) s += num::norm(v);
  return s;
}

namespace {

struct ScalarAtoms {
  std::vector<Vec> points;
  std::vector<double> masses;
};

ScalarAtoms component(const AtomicMeasure& m, int i) {
  ScalarAtoms s;
  for (const auto& [p, v] : m.atoms) {
    s.points.push_back(p);
    s.masses.push_back(v[i]);
  }
  return s;
}

// Dual LP: max sum psi_k m_k subject to the pairwise Lipschitz constraints,
// optionally |psi| <= 1 (plain KR) or psi(ref) pinned to 0 (tilde KR).
double scalar_kr_lp(const ScalarAtoms& s, bool sup_norm_box, const Vec* ref) {
  const int n = static_cast<int>(s.points.size());
  if (n == 0) return 0;
  simplex::LinearProgram lp;
  lp.maximize = true;
  lp.num_vars = n;
  lp.objective = s.masses;
  for (int j = 0; j < n; ++j) lp.free_vars.push_back(j);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      double d = num::dist(s.points[a], s.points[b]);
      simplex::Constraint c1{std::vector<double>(n, 0.0), simplex::Relation::le, d};
      c1.coeffs[a] = 1;
      c1.coeffs[b] = -1;
      lp.constraints.push_back(c1);
      c1.coeffs[a] = -1;
      c1.coeffs[b] = 1;
      lp.constraints.push_back(c1);
    }
  if (sup_norm_box) {
    for (int a = 0; a < n; ++a) {
      simplex::Constraint c{std::vector<double>(n, 0.0), simplex::Relation::le, 1.0};
      c.coeffs[a] = 1;
      lp.constraints.push_back(c);
      c.coeffs[a] = -1;
      lp.constraints.push_back(c);
    }
  }
  if (ref) {
    // psi(x0) = 0 with x0 adjoined through its Lipschitz links to all atoms:
    // equivalently max over psi with |psi_a| <= |x_a - x0| ... but the exact
    // dual needs x0 as an atom location; add it as a pinned variable.
    lp.num_vars = n + 1;
    lp.free_vars.push_back(n);
    lp.objective.push_back(0.0);
    for (auto& c : lp.constraints) c.coeffs.push_back(0.0);
    for (int a = 0; a < n; ++a) {
      double d = num::dist(s.points[a], *ref);
      simplex::Constraint c1{std::vector<double>(n + 1, 0.0), simplex::Relation::le, d};
      c1.coeffs[a] = 1;
      c1.coeffs[n] = -1;
      lp.constraints.push_back(c1);
      c1.coeffs[a] = -1;
      c1.coeffs[n] = 1;
      lp.constraints.push_back(c1);
    }
    simplex::Constraint pin{std::vector<double>(n + 1, 0.0), simplex::Relation::eq, 0.0};
    pin.coeffs[n] = 1;
    lp.constraints.push_back(pin);
  }
  auto res = simplex::solve(lp);
  if (res.status != simplex::LpStatus::optimal)
    throw LPInfeasible("kr dual LP unexpectedly not optimal");
  return res.value;
}

// Primal transport formulation of the same values, for large atom counts.
// tilde variant: W1 between the positive and negative parts of
// (m - m(X) delta_x0); plain KR adds unit-cost creation/destruction.
double scalar_kr_flow(const ScalarAtoms& s, bool flat_norm, const Vec* ref) {
  std::vector<Vec> pts = s.points;
  std::vector<double> masses = s.masses;
  if (ref) {
    double total = 0;
    for (double v : masses) total += v;
    pts.push_back(*ref);
    masses.push_back(-total);
  }
  const int n = static_cast<int>(pts.size());
  int extra = flat_norm ? 1 : 0;  // virtual node for mass creation/destruction
  mincost::Network net(n + extra);
  for (int a = 0; a < n; ++a) net.supply[a] = masses[a];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      if (masses[a] > 0 && masses[b] < 0)
        net.add_arc(a, b, mincost::kInfCap, num::dist(pts[a], pts[b]));
    }
  if (flat_norm) {
    for (int a = 0; a < n; ++a) {
      if (masses[a] > 0) net.add_arc(a, n, mincost::kInfCap, 1.0);
      if (masses[a] < 0) net.add_arc(n, a, mincost::kInfCap, 1.0);
    }
    double total = 0;
    for (double v : masses) total += v;
    net.supply.back() = -total;
  }
  auto res = mincost::solve(net);
  if (!res.feasible) throw LPInfeasible("kr transport formulation infeasible");
  return res.cost;
}

constexpr int kLpAtomLimit = 40;  // beyond this the dual LP tableau is too big

double scalar_kr(const ScalarAtoms& s, bool plain_kr, const Vec& ref) {
  // Routing through pairs with nonzero mass only.
  ScalarAtoms t;
  for (std::size_t k = 0; k < s.masses.size(); ++k)
    if (s.masses[k] != 0.0) {
      t.points.push_back(s.points[k]);
      t.masses.push_back(s.masses[k]);
    }
  if (t.points.empty()) return 0;
  if (static_cast<int>(t.points.size()) <= kLpAtomLimit)
    return scalar_kr_lp(t, plain_kr, plain_kr ? nullptr : &ref);
  return scalar_kr_flow(t, plain_kr, plain_kr ? nullptr : &ref);
}

}  // namespace

KrValue kr(const AtomicMeasure& m) {
  AtomicMeasure c = m;
  c.coalesce();
  KrValue out;
  out.mode = c.value_dim > 1 ? KrMode::component_sum_upper_bound : KrMode::exact_scalar;
  for (int i = 0; i < c.value_dim; ++i)
    out.value += scalar_kr(component(c, i), /*plain_kr=*/true, c.reference_point);
  return out;
}

KrValue kr_tilde(const AtomicMeasure& m) {
  AtomicMeasure c = m;
  c.coalesce();
  KrValue out;
  out.mode = c.value_dim > 1 ? KrMode::component_sum_upper_bound : KrMode::exact_scalar;
  Vec ref = c.reference_point;
  if (ref.empty()) ref.assign(c.space_dim, 0.0);
  Vec mass = c.total_mass();
  out.value = num::norm(mass);
  for (int i = 0; i < c.value_dim; ++i) out.value += scalar_kr(component(c, i), false, ref);
  return out;
}

T1Flow t1_flow(const AtomicMeasure& m) {
  AtomicMeasure c = m;
  c.coalesce();
  if (!c.zero_mass(1e-9 * std::max(1.0, total_variation(c))))
    throw MassImbalance("t1_flow requires zero mass per component");
  T1Flow out;
  for (int i = 0; i < c.value_dim; ++i) {
    auto s = component(c, i);
    TransportPlan plan;
    std::vector<int> pos, neg;
    for (int k = 0; k < static_cast<int>(s.masses.size()); ++k) {
      if (s.masses[k] > 0) pos.push_back(k);
      if (s.masses[k] < 0) neg.push_back(k);
    }
    if (!pos.empty()) {
      mincost::Network net(static_cast<int>(s.masses.size()));
      for (int k = 0; k < static_cast<int>(s.masses.size()); ++k) net.supply[k] = s.masses[k];
      std::vector<std::pair<int, int>> arc_atoms;
      for (int a : pos)
        for (int b : neg) {
          net.add_arc(a, b, mincost::kInfCap, num::dist(s.points[a], s.points[b]));
          arc_atoms.emplace_back(a, b);
        }
      auto res = mincost::solve(net);
      if (!res.feasible) throw MassImbalance("t1_flow: component masses do not balance");
      plan.cost = res.cost;
      for (std::size_t k = 0; k < arc_atoms.size(); ++k)
        if (res.flow[k] > 1e-14)
          plan.entries.push_back({arc_atoms[k].first, arc_atoms[k].second, res.flow[k]});
    }
    out.total_cost += plan.cost;
    out.component_plans.push_back(std::move(plan));
  }
  return out;
}

}  // namespace homflow::measures
