#include "homflow/delaunay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>

namespace homflow::delaunay {

namespace {

using Rational = boost::multiprecision::cpp_rational;

int exact_orient2d(const double* a, const double* b, const double* c) {
  Rational ax(a[0]), ay(a[1]), bx(b[0]), by(b[1]), cx(c[0]), cy(c[1]);
  Rational det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return det.sign();
}

int exact_incircle(const double* a, const double* b, const double* c, const double* d) {
  Rational adx = Rational(a[0]) - Rational(d[0]);
  Rational ady = Rational(a[1]) - Rational(d[1]);
  Rational bdx = Rational(b[0]) - Rational(d[0]);
  Rational bdy = Rational(b[1]) - Rational(d[1]);
  Rational cdx = Rational(c[0]) - Rational(d[0]);
  Rational cdy = Rational(c[1]) - Rational(d[1]);
  Rational alift = adx * adx + ady * ady;
  Rational blift = bdx * bdx + bdy * bdy;
  Rational clift = cdx * cdx + cdy * cdy;
  Rational det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
                 clift * (adx * bdy - ady * bdx);
  return det.sign();
}

}  // namespace

int orient2d(const double* a, const double* b, const double* c) {
  double detl = (b[0] - a[0]) * (c[1] - a[1]);
  double detr = (b[1] - a[1]) * (c[0] - a[0]);
  double det = detl - detr;
  double perm = std::abs(detl) + std::abs(detr);
  if (std::abs(det) > 4e-16 * perm) return det > 0 ? 1 : -1;
  return exact_orient2d(a, b, c);
}

int incircle(const double* a, const double* b, const double* c, const double* d) {
  double adx = a[0] - d[0], ady = a[1] - d[1];
  double bdx = b[0] - d[0], bdy = b[1] - d[1];
  double cdx = c[0] - d[0], cdy = c[1] - d[1];
  double alift = adx * adx + ady * ady;
  double blift = bdx * bdx + bdy * bdy;
  double clift = cdx * cdx + cdy * cdy;
  double det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
               clift * (adx * bdy - ady * bdx);
  double perm = alift * (std::abs(bdx * cdy) + std::abs(bdy * cdx)) +
                blift * (std::abs(cdx * ady) + std::abs(cdy * adx)) +
                clift * (std::abs(adx * bdy) + std::abs(ady * bdx));
  if (std::abs(det) > 2e-15 * perm) return det > 0 ? 1 : -1;
  return exact_incircle(a, b, c, d);
}

std::vector<std::pair<int, int>> delaunay_edges(const std::vector<Vec>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw Error("delaunay_edges: need at least 3 points");

  // Working copy with the three super-triangle vertices appended.
  std::vector<std::array<double, 2>> pts(n + 3);
  double lo[2] = {points[0][0], points[0][1]};
  double hi[2] = {points[0][0], points[0][1]};
  for (int i = 0; i < n; ++i) {
    pts[i] = {points[i][0], points[i][1]};
    for (int k = 0; k < 2; ++k) {
      lo[k] = std::min(lo[k], points[i][k]);
      hi[k] = std::max(hi[k], points[i][k]);
    }
  }
  double span = std::max(hi[0] - lo[0], hi[1] - lo[1]);
  double big = 1e9 * (1.0 + span);
  double cx = 0.5 * (lo[0] + hi[0]), cy = 0.5 * (lo[1] + hi[1]);
  pts[n] = {cx - big, cy - big};
  pts[n + 1] = {cx + big, cy - big};
  pts[n + 2] = {cx, cy + big};

  struct Tri {
    int v[3];
    bool alive = true;
  };
  std::vector<Tri> tris;
  tris.push_back({{n, n + 1, n + 2}, true});

  auto tri_contains_in_circumcircle = [&](const Tri& t, int p) {
    return incircle(pts[t.v[0]].data(), pts[t.v[1]].data(), pts[t.v[2]].data(), pts[p].data()) > 0;
  };

  for (int p = 0; p < n; ++p) {
    // Cavity: all live triangles whose circumcircle strictly contains p.
    std::vector<int> bad;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (tris[t].alive && tri_contains_in_circumcircle(tris[t], p)) bad.push_back(t);
    if (bad.empty()) throw Error("delaunay_edges: duplicate or degenerate point configuration");

    // Boundary edges of the cavity appear in exactly one bad triangle.
    std::map<std::pair<int, int>, int> count;
    std::map<std::pair<int, int>, std::pair<int, int>> oriented;
    for (int t : bad) {
      const auto& v = tris[t].v;
      for (int k = 0; k < 3; ++k) {
        int a = v[k], b = v[(k + 1) % 3];
        auto key = std::minmax(a, b);
        count[key]++;
        oriented[key] = {a, b};
      }
    }
    for (int t : bad) tris[t].alive = false;
    for (const auto& [key, c] : count) {
      if (c != 1) continue;
      auto [a, b] = oriented[key];
      tris.push_back({{a, b, p}, true});
    }
  }

  std::vector<std::pair<int, int>> edges;
  for (const Tri& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;  // touches super-triangle
    for (int k = 0; k < 3; ++k) {
      int a = t.v[k], b = t.v[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::pair<int, int>> delaunay_edges_dense(const std::vector<Vec>& points,
                                                      double r1_bound) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw Error("delaunay_edges_dense: need at least 3 points");
  // Bucket by unit cell.
  std::map<std::pair<long long, long long>, std::vector<int>> buckets;
  for (int i = 0; i < n; ++i)
    buckets[{static_cast<long long>(std::floor(points[i][0])),
             static_cast<long long>(std::floor(points[i][1]))}].push_back(i);
  auto nearby = [&](const Vec& p, double radius) {
    std::vector<int> out;
    long long cx = static_cast<long long>(std::floor(p[0]));
    long long cy = static_cast<long long>(std::floor(p[1]));
    long long reach = static_cast<long long>(std::ceil(radius)) + 1;
    for (long long dx = -reach; dx <= reach; ++dx)
      for (long long dy = -reach; dy <= reach; ++dy) {
        auto it = buckets.find({cx + dx, cy + dy});
        if (it == buckets.end()) continue;
        for (int i : it->second)
          if (num::dist(points[i], p) <= radius) out.push_back(i);
      }
    return out;
  };

  // An empty circumdisk through i and j has radius <= r1_bound, hence
  // |i - j| <= 2 r1_bound and the disk stays within 2 r1_bound of the
  // segment midpoint; the third triangle vertex lies on that disk.
  double pair_cut = 2.0 * r1_bound + 1e-9;
  double local_cut = 3.0 * r1_bound + 1e-9;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    Vec mid(2);
    for (int j : nearby(points[i], pair_cut)) {
      if (j <= i) continue;
      mid[0] = 0.5 * (points[i][0] + points[j][0]);
      mid[1] = 0.5 * (points[i][1] + points[j][1]);
      auto local = nearby(mid, local_cut);
      bool found = false;
      for (int k : local) {
        if (k == i || k == j) continue;
        if (orient2d(points[i].data(), points[j].data(), points[k].data()) == 0) continue;
        // orient the triangle ccw for the incircle predicate
        const double* a = points[i].data();
        const double* b = points[j].data();
        const double* c = points[k].data();
        if (orient2d(a, b, c) < 0) std::swap(b, c);
        bool empty = true;
        for (int l : local) {
          if (l == i || l == j || l == k) continue;
          if (incircle(a, b, c, points[l].data()) > 0) {
            empty = false;
            break;
          }
        }
        if (empty) {
          found = true;
          break;
        }
      }
      if (found) edges.emplace_back(i, j);
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace homflow::delaunay
