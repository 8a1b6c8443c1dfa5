/// Edge-based localized energies: stationary per-edge Lipschitz costs of
/// linear growth, the localized functional F(J,A) and its rescaling F_eps.
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "homflow/calculus.hpp"

namespace homflow::energy {

enum class CostKind { weighted_abs, piecewise_linear_convex, huberized, nonconvex_capped };

std::string to_string(CostKind k);
CostKind cost_kind_from_string(const std::string& s);

/// Per-edge cost parameters; interpretation depends on the kind.
struct EdgeCost {
  CostKind kind;
  double a = 1, b = 0, c = 0;

  /// f_e evaluated at |v|_V (all families are radial).
  double radial(double r) const;
  double operator()(const Vec& v) const { return radial(num::norm(v)); }

  /// Convex families only: (width, slope) segments of r -> f(r) for r >= 0,
  /// slopes increasing, last width infinite.
  std::vector<std::pair<double, double>> segments() const;
  bool convex() const {
    return kind == CostKind::weighted_abs || kind == CostKind::piecewise_linear_convex;
  }
  /// Slope of the largest convex minorant through the origin (the convex
  /// relaxation used to seed the nonconvex solver).
  double minorant_slope() const;
};

/// Stationary recipe: parameters are a seeded hash of the integer cell of
/// the edge midpoint in *base* coordinates plus a direction class, so any
/// two windows agree on shared edges and integer shifts act by relabeling.
struct EdgeCostFamily {
  CostKind kind = CostKind::weighted_abs;
  std::uint64_t seed = 0;
  double p_min = 1.0, p_max = 1.0;  // principal parameter range (e.g. alpha)
  // When set (not NaN), fix the secondary parameters instead of sampling
  // them; used for closed-form instances in tests.
  double b_override = std::numeric_limits<double>::quiet_NaN();
  double c_override = std::numeric_limits<double>::quiet_NaN();

  double lipschitz_L() const;
  double growth_c2() const;  // per-edge lower slope: f_e(v) >= c2 |v|

  /// Parameters for the base edge [x, y] (base coordinates).
  EdgeCost sample(const Vec& base_x, const Vec& base_y) const;
};

/// F(J, A) over a restricted graph; costs are keyed on base coordinates so
/// the same family induces the whole eps-family of rescaled energies.
class LocalizedEnergy {
 public:
  LocalizedEnergy() = default;
  LocalizedEnergy(const graph::RestrictedGraph* g, EdgeCostFamily family, double r_lip);

  const graph::RestrictedGraph* graph() const { return graph_; }
  const EdgeCostFamily& family() const { return family_; }
  double r_lip() const { return r_lip_; }
  const EdgeCost& edge_cost(int e) const { return costs_[e]; }

  /// F(J, A) = 1/2 sum f_e(J) H^1([x,y] cap A) at unit scale (graph eps = 1).
  double eval(const calculus::DiscreteField& J, const Region& A) const;

  /// F_eps(J, A) = eps^d F(J(eps .)/eps^{d-1}, A/eps). `eps` must match the
  /// field's graph scale.
  double eval_rescaled(const calculus::DiscreteField& J, const Region& A, double eps) const;

  /// (|F_eps(J,A) - F_eps(J',A)|, Lipschitz bound 2 C1 |iota(J-J')|(B(A, eps R_lip))).
  std::pair<double, double> lipschitz_gap(const calculus::DiscreteField& J,
                                          const calculus::DiscreteField& Jp,
                                          const Region& A) const;

 private:
  const graph::RestrictedGraph* graph_ = nullptr;
  EdgeCostFamily family_;
  double r_lip_ = 0;
  std::vector<EdgeCost> costs_;  // per restricted edge
};

}  // namespace homflow::energy
