/// Antisymmetric V-valued edge fields and V-valued vertex measures on a
/// restricted graph. Each undirected edge stores one value for its canonical
/// orientation (lower index -> higher index); the reverse sign is applied on
/// access, so antisymmetry is structural.
#pragma once

#include <vector>

#include "homflow/common.hpp"
#include "homflow/graph.hpp"

namespace homflow::calculus {

class DiscreteField {
 public:
  DiscreteField() = default;
  DiscreteField(const graph::RestrictedGraph* g, int value_dim)
      : graph_(g), value_dim_(value_dim), values_(g->num_edges(), Vec(value_dim, 0.0)) {}

  const graph::RestrictedGraph* graph() const { return graph_; }
  int value_dim() const { return value_dim_; }

  /// Value for the canonical orientation of edge e.
  const Vec& canonical(int e) const { return values_[e]; }
  void set_canonical(int e, Vec v) { values_[e] = std::move(v); }

  /// J(x,y) for an arbitrary orientation of edge e.
  Vec oriented(int e, int from, int to) const {
    const auto& [u, v] = graph_->edges[e];
    if (from == u && to == v) return values_[e];
    if (from == v && to == u) return num::scaled(values_[e], -1.0);
    throw Error("DiscreteField: vertices do not match edge");
  }

  /// J(x,y) looked up by vertex pair; throws if (x,y) is not an edge.
  Vec at(int x, int y) const {
    int e = graph_->find_edge(x, y);
    if (e < 0) throw Error("DiscreteField: no such edge");
    return oriented(e, x, y);
  }

  DiscreteField& operator+=(const DiscreteField& o);
  DiscreteField& operator*=(double s);
  friend DiscreteField operator+(DiscreteField a, const DiscreteField& b) { return a += b; }
  friend DiscreteField operator-(DiscreteField a, const DiscreteField& b) {
    DiscreteField nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend DiscreteField operator*(double s, DiscreteField a) {
    a *= s;
    return a;
  }

 private:
  const graph::RestrictedGraph* graph_ = nullptr;
  int value_dim_ = 1;
  std::vector<Vec> values_;
};

/// Finite V-valued measure supported on graph vertices.
class VertexMeasure {
 public:
  VertexMeasure() = default;
  VertexMeasure(const graph::RestrictedGraph* g, int value_dim)
      : graph_(g), value_dim_(value_dim), values_(g->num_vertices(), Vec(value_dim, 0.0)) {}

  const graph::RestrictedGraph* graph() const { return graph_; }
  int value_dim() const { return value_dim_; }
  const Vec& at(int x) const { return values_[x]; }
  Vec& at(int x) { return values_[x]; }

  double total_variation() const {
    double s = 0;
    for (const Vec& v : values_) s += num::norm(v);
    return s;
  }

  Vec total_mass() const {
    Vec m(value_dim_, 0.0);
    for (const Vec& v : values_) num::axpy(m, 1.0, v);
    return m;
  }

  VertexMeasure& operator+=(const VertexMeasure& o);
  VertexMeasure& operator*=(double s);
  friend VertexMeasure operator-(VertexMeasure a, const VertexMeasure& b) {
    VertexMeasure nb = b;
    nb *= -1.0;
    return a += nb;
  }

 private:
  const graph::RestrictedGraph* graph_ = nullptr;
  int value_dim_ = 1;
  std::vector<Vec> values_;
};

/// Scalar function on edges (symmetric in the orientation), e.g. hat(psi).
using EdgeScalar = std::vector<double>;

}  // namespace homflow::calculus
