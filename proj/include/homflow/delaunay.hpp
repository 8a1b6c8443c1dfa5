/// 2D Delaunay triangulation (Bowyer-Watson) with exact-fallback incircle
/// and orientation predicates. Only the edge adjacency is exposed; it is the
/// Voronoi dual used by the voronoi_points graph generator.
#pragma once

#include <utility>
#include <vector>

#include "homflow/common.hpp"

namespace homflow::delaunay {

/// Sign of the orientation determinant of (a,b,c): +1 ccw, -1 cw, 0 collinear.
int orient2d(const double* a, const double* b, const double* c);

/// Sign of the incircle determinant: +1 if d is strictly inside the
/// circumcircle of the ccw triangle (a,b,c).
int incircle(const double* a, const double* b, const double* c, const double* d);

/// Delaunay edges of a 2D point set, each pair once with i < j.
/// Requires at least 3 non-collinear points.
std::vector<std::pair<int, int>> delaunay_edges(const std::vector<Vec>& points);

/// Delaunay edges for (G1)-dense point sets: every disk of radius r1_bound
/// contains a point. Then every empty circumdisk has radius at most
/// r1_bound, so adjacency is decided by local empty-circumcircle tests;
/// linear in the number of points for bounded density.
std::vector<std::pair<int, int>> delaunay_edges_dense(const std::vector<Vec>& points,
                                                      double r1_bound);

}  // namespace homflow::delaunay
