/// Correctors for the discrete divergence equation DIVE J = m: localized
/// good paths glued from anchor-to-anchor shortest paths, componentwise
/// W1 transport plans, and total-variation bounds against the KR norm.
#pragma once

#include <vector>

#include "homflow/calculus.hpp"
#include "homflow/measures.hpp"

namespace homflow::correctors {

struct PathConstants {
  double r1 = 1;  // certified gap radius of the base graph
  double r2 = 1;  // certified stretch constant
  /// Deviation constant of the localisation lemma: C = r2 (r1 + 1/2) + r1.
  double deviation_c() const { return r2 * (r1 + 0.5) + r1; }
  /// Length constant: paths measure at most R' (|x-y| + eps).
  double length_c() const { return std::max(r2, r2 * (2 * r1 + 1) / r1); }
};

/// Simple path from x to y on the eps-graph staying within C*eps of the
/// segment [x,y]: waypoints on [x,y] at spacing eps*r1, nearest-vertex
/// anchors, shortest sub-paths, loops erased at first revisit.
std::vector<int> localized_path(const graph::RestrictedGraph& g, int x, int y,
                                const PathConstants& pc);

/// Max over path segments of the distance to the straight segment [x,y].
double path_deviation(const graph::RestrictedGraph& g, const std::vector<int>& path, int x, int y);

struct CorrectorResult {
  calculus::DiscreteField J;
  double tv = 0;              // |iota_eps J|(R^d)
  double kr_of_m = 0;         // ||iota_eps m||_KR~
  double tv_of_m = 0;
  double support_radius = 0;  // max deviation of used paths from their transport segments
  double bound_ratio = 0;     // tv / (kr_of_m + eps * tv_of_m)
};

/// Solve DIVE J = m by componentwise optimal transport between the positive
/// and negative parts, routing each plan atom along a localized path.
/// Requires zero mass per component.
CorrectorResult build_corrector(const graph::RestrictedGraph& g, const calculus::VertexMeasure& m,
                                const PathConstants& pc);

struct ScalingRow {
  double eps;
  double bound_ratio;
};

/// Kendall rank correlation of (eps, ratio) pairs; the corrector bound is
/// uniform in eps, so the ratios should show no increasing trend.
double kendall_tau(const std::vector<ScalingRow>& rows);

struct BoundScalingReport {
  std::vector<ScalingRow> rows;
  /// Kendall tau between fineness 1/eps and bound_ratio; positive values
  /// mean the ratio grows under refinement (the bad direction).
  double tau_fineness = 0;
  double max_ratio = 0;
};

/// Builds correctors for a family of (eps-graph, measure) instances and
/// reports the bound ratios across eps.
BoundScalingReport verify_bound_scaling(
    const std::vector<std::pair<const graph::RestrictedGraph*, calculus::VertexMeasure>>& instances,
    const PathConstants& pc);

}  // namespace homflow::correctors
