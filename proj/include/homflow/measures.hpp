/// Atomic V-valued measures with total-variation and Kantorovich-Rubinstein
/// norms, and componentwise optimal W1 transport plans.
#pragma once

#include <vector>

#include "homflow/common.hpp"

namespace homflow::measures {

struct AtomicMeasure {
  int space_dim = 1;
  int value_dim = 1;
  std::vector<std::pair<Vec, Vec>> atoms;  // (point, value)
  Vec reference_point;                     // x0 for the tilde-KR norm

  void add(const Vec& p, const Vec& v) { atoms.emplace_back(p, v); }
  /// Merge atoms closer than 1e-12 (values summed) and drop zero values.
  void coalesce(double point_tol = 1e-12, double value_tol = 0.0);
  Vec total_mass() const;
  bool zero_mass(double tol = 1e-12) const;
};

double total_variation(const AtomicMeasure& m);

/// How a KR value was computed for vector-valued measures.
enum class KrMode { exact_scalar, component_sum_upper_bound };

struct KrValue {
  double value = 0;
  KrMode mode = KrMode::exact_scalar;
};

/// ||m||_KR: dual over test functions with both sup-norm <= 1 and
/// Lip <= 1 on the atom set. Exact LP for scalar measures; componentwise
/// sum (an upper bound) for value_dim > 1.
KrValue kr(const AtomicMeasure& m);

/// ||m||_KR~: |m(X)| plus the dual over Lipschitz test functions vanishing
/// at the reference point. Equals the T1 transport cost for zero-mass
/// measures. Scalar components exact; vector case componentwise sum.
KrValue kr_tilde(const AtomicMeasure& m);

struct TransportPlan {
  struct Entry {
    int from, to;   // atom indices (source = positive part, sink = negative)
    double mass;
  };
  std::vector<Entry> entries;
  double cost = 0;
};

struct T1Flow {
  std::vector<TransportPlan> component_plans;  // one per V component
  double total_cost = 0;
};

/// Componentwise optimal scalar W1 plans between the positive and negative
/// parts; requires zero mass per component. A plan entry transports
/// `mass` from atom `from` (positive part) to atom `to` (negative part).
T1Flow t1_flow(const AtomicMeasure& m);

}  // namespace homflow::measures
