#include "homflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homflow::energy {

std::string to_string(CostKind k) {
  switch (k) {
    case CostKind::weighted_abs: return "weighted_abs";
    case CostKind::piecewise_linear_convex: return "piecewise_linear_convex";
    case CostKind::huberized: return "huberized";
    case CostKind::nonconvex_capped: return "nonconvex_capped";
  }
  return "?";
}

CostKind cost_kind_from_string(const std::string& s) {
  if (s == "weighted_abs") return CostKind::weighted_abs;
  if (s == "piecewise_linear_convex") return CostKind::piecewise_linear_convex;
  if (s == "huberized") return CostKind::huberized;
  if (s == "nonconvex_capped") return CostKind::nonconvex_capped;
  throw IOError("unknown cost kind: " + s);
}

double EdgeCost::radial(double r) const {
  switch (kind) {
    case CostKind::weighted_abs:
      return a * r;
    case CostKind::piecewise_linear_convex:
      // slope a up to breakpoint c, then slope b
      return r <= c ? a * r : a * c + b * (r - c);
    case CostKind::huberized: {
      // linear growth a*r plus a Huber bump of weight b, knee c
      double h = r <= c ? r * r / (2 * c) : r - c / 2;
      return a * r + b * h;
    }
    case CostKind::nonconvex_capped:
      return std::min(a * r, b + c * r);
  }
  return 0;
}

std::vector<std::pair<double, double>> EdgeCost::segments() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case CostKind::weighted_abs:
      return {{inf, a}};
    case CostKind::piecewise_linear_convex:
      return {{c, a}, {inf, b}};
    default:
      throw Error("segments(): cost is not piecewise linear convex");
  }
}

double EdgeCost::minorant_slope() const {
  switch (kind) {
    case CostKind::weighted_abs:
      return a;
    case CostKind::piecewise_linear_convex:
      return a;
    case CostKind::huberized:
      return a;  // a*r <= f, and f'(0+) = a
    case CostKind::nonconvex_capped:
      return c;  // conv f = c |r| since the cap has asymptotic slope c < a
  }
  return 0;
}

namespace {

// Direction class: the edge direction, sign-normalized so the first nonzero
// component is positive, quantized to quarters.
std::vector<long long> direction_class(const Vec& x, const Vec& y) {
  Vec d = num::sub(y, x);
  double sign = 1.0;
  for (double v : d) {
    if (std::abs(v) > 1e-12) {
      sign = v > 0 ? 1.0 : -1.0;
      break;
    }
  }
  std::vector<long long> cls(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) cls[k] = std::llround(4.0 * sign * d[k]);
  return cls;
}

}  // namespace

EdgeCost EdgeCostFamily::sample(const Vec& base_x, const Vec& base_y) const {
  std::vector<long long> key;
  for (std::size_t k = 0; k < base_x.size(); ++k)
    key.push_back(static_cast<long long>(std::floor(0.5 * (base_x[k] + base_y[k]))));
  for (long long c : direction_class(base_x, base_y)) key.push_back(c);
  key.push_back(static_cast<long long>(kind));
  std::uint64_t h = rng::hash_key(seed, key);
  double u1 = rng::uniform01(h);
  double u2 = rng::uniform01(rng::splitmix64(h + 1));
  double u3 = rng::uniform01(rng::splitmix64(h + 2));
  double p = p_min + (p_max - p_min) * u1;
  EdgeCost c;
  c.kind = kind;
  bool fix_b = !std::isnan(b_override), fix_c = !std::isnan(c_override);
  switch (kind) {
    case CostKind::weighted_abs:
      c.a = p;
      break;
    case CostKind::piecewise_linear_convex:
      c.a = p;
      c.b = fix_b ? b_override : p * (1.3 + 0.7 * u2);
      c.c = fix_c ? c_override : 0.5 + u3;  // breakpoint
      break;
    case CostKind::huberized:
      c.a = p;
      c.b = fix_b ? b_override : 0.5 * p * u2;
      c.c = fix_c ? c_override : 0.5;  // knee
      break;
    case CostKind::nonconvex_capped:
      c.a = p;
      c.c = fix_c ? c_override : p * (0.2 + 0.2 * u2);  // cap slope, < a
      c.b = fix_b ? b_override : 0.3 + 0.4 * u3;        // cap offset
      break;
  }
  return c;
}

double EdgeCostFamily::lipschitz_L() const {
  switch (kind) {
    case CostKind::weighted_abs:
      return p_max;
    case CostKind::piecewise_linear_convex:
      return 2.0 * p_max;
    case CostKind::huberized:
      return 1.5 * p_max;
    case CostKind::nonconvex_capped:
      return p_max;
  }
  return p_max;
}

double EdgeCostFamily::growth_c2() const {
  switch (kind) {
    case CostKind::weighted_abs:
      return p_min;
    case CostKind::piecewise_linear_convex:
      return p_min;
    case CostKind::huberized:
      return p_min;
    case CostKind::nonconvex_capped:
      return 0.2 * p_min;
  }
  return p_min;
}

LocalizedEnergy::LocalizedEnergy(const graph::RestrictedGraph* g, EdgeCostFamily family,
                                 double r_lip)
    : graph_(g), family_(family), r_lip_(r_lip) {
  costs_.reserve(g->num_edges());
  for (int e = 0; e < g->num_edges(); ++e) {
    auto [bu, bv] = g->base->edges[g->base_edge[e]];
    costs_.push_back(family_.sample(g->base->vertices[bu], g->base->vertices[bv]));
  }
}

double LocalizedEnergy::eval(const calculus::DiscreteField& J, const Region& A) const {
  if (J.graph() != graph_) throw GraphMismatch("energy eval: field lives on a different graph");
  if (std::abs(graph_->epsilon - 1.0) > 1e-15)
    throw ScaleMismatch("eval expects a unit-scale graph; use eval_rescaled");
  double s = 0;
  for (int e = 0; e < graph_->num_edges(); ++e) {
    auto [u, v] = graph_->edges[e];
    double len = geom::clipped_length(graph_->vertices[u], graph_->vertices[v], A);
    if (len == 0) continue;
    s += costs_[e](J.canonical(e)) * len;
  }
  return s;
}

double LocalizedEnergy::eval_rescaled(const calculus::DiscreteField& J, const Region& A,
                                      double eps) const {
  if (J.graph() != graph_) throw GraphMismatch("energy eval: field lives on a different graph");
  if (std::abs(graph_->epsilon - eps) > 1e-15)
    throw ScaleMismatch("eval_rescaled: eps does not match the field's graph scale");
  const int d = graph_->base->dim;
  double scale = std::pow(eps, d - 1);
  double s = 0;
  for (int e = 0; e < graph_->num_edges(); ++e) {
    auto [u, v] = graph_->edges[e];
    double len = geom::clipped_length(graph_->vertices[u], graph_->vertices[v], A);
    if (len == 0) continue;
    s += scale * costs_[e].radial(num::norm(J.canonical(e)) / scale) * len;
  }
  return s;
}

std::pair<double, double> LocalizedEnergy::lipschitz_gap(const calculus::DiscreteField& J,
                                                         const calculus::DiscreteField& Jp,
                                                         const Region& A) const {
  double eps = graph_->epsilon;
  double lhs = std::abs(eval_rescaled(J, A, eps) - eval_rescaled(Jp, A, eps));
  Region inflated = A;
  for (Box& b : inflated.boxes) b = b.inflated(eps * r_lip_);
  auto diff = J - Jp;
  double rhs = 2.0 * family_.lipschitz_L() * calculus::embed(diff).variation_on(inflated);
  return {lhs, rhs};
}

}  // namespace homflow::energy
