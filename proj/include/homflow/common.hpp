/// Shared scalar/vector helpers, axis-aligned boxes, seeded hashing and
/// error types used across the homflow modules.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace homflow {

using Vec = std::vector<double>;  // point in R^d or value in V = R^n

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedDimension : Error { using Error::Error; };
struct EmptyWindow : Error { using Error::Error; };
struct Disconnected : Error { using Error::Error; };
struct NotAPath : Error { using Error::Error; };
struct NotSimple : Error { using Error::Error; };
struct DegreeTooHigh : Error { using Error::Error; };
struct LPInfeasible : Error { using Error::Error; };
struct MassImbalance : Error { using Error::Error; };
struct GraphMismatch : Error { using Error::Error; };
struct ScaleMismatch : Error { using Error::Error; };
struct AnchorTooFar : Error { using Error::Error; };
struct DegenerateOrthotope : Error { using Error::Error; };
struct EtaOutOfRange : Error { using Error::Error; };
struct TooManyFreeVariables : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };
struct IOError : Error { using Error::Error; };

namespace num {

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(const Vec& a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

inline void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double dist(const Vec& a, const Vec& b) { return norm(sub(a, b)); }

inline bool near_zero(const Vec& a, double tol) {
  for (double x : a)
    if (std::abs(x) > tol) return false;
  return true;
}

inline Vec zero(std::size_t n) { return Vec(n, 0.0); }

/// Distance from point p to the segment [a,b].
inline double dist_to_segment(const Vec& p, const Vec& a, const Vec& b) {
  Vec ab = sub(b, a);
  double den = dot(ab, ab);
  double t = den > 0 ? dot(sub(p, a), ab) / den : 0.0;
  t = std::max(0.0, std::min(1.0, t));
  Vec q = a;
  axpy(q, t, ab);
  return dist(p, q);
}

}  // namespace num

/// Element of V tensor R^d, stored row-major n x d. Column k is the
/// V-value transported in coordinate direction k.
struct Tensor {
  int n = 1, d = 1;
  std::vector<double> m;  // n*d

  Tensor() = default;
  Tensor(int n_, int d_) : n(n_), d(d_), m(static_cast<std::size_t>(n_) * d_, 0.0) {}

  double& at(int i, int k) { return m[static_cast<std::size_t>(i) * d + k]; }
  double at(int i, int k) const { return m[static_cast<std::size_t>(i) * d + k]; }

  Vec column(int k) const {
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = at(i, k);
    return c;
  }

  double frobenius() const {
    double s = 0;
    for (double v : m) s += v * v;
    return std::sqrt(s);
  }

  /// Scalar species j in R^(1 x d) from a direction vector.
  static Tensor row(const Vec& dir) {
    Tensor t(1, static_cast<int>(dir.size()));
    t.m = dir;
    return t;
  }
};

/// Axis-aligned box [lo, hi] (closed).
struct Box {
  Vec lo, hi;

  std::size_t dim() const { return lo.size(); }

  bool contains(const Vec& p) const {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }

  double volume() const {
    double v = 1;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }

  Box inflated(double r) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] -= r;
      b.hi[i] += r;
    }
    return b;
  }

  Vec center() const {
    Vec c(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  static Box cube(const Vec& center, double side) {
    Box b;
    b.lo.resize(center.size());
    b.hi.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
      b.lo[i] = center[i] - 0.5 * side;
      b.hi[i] = center[i] + 0.5 * side;
    }
    return b;
  }

  /// Concentric box with sides rescaled by alpha (paper's Q_alpha).
  Box rescaled(double alpha) const {
    Box b;
    Vec c = center();
    b.lo.resize(lo.size());
    b.hi.resize(hi.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      double h = 0.5 * alpha * (hi[i] - lo[i]);
      b.lo[i] = c[i] - h;
      b.hi[i] = c[i] + h;
    }
    return b;
  }
};

/// Localization region: either all of R^d or a finite union of boxes
/// (assumed pairwise disjoint wherever sigma-additivity matters).
struct Region {
  bool all_space = false;
  std::vector<Box> boxes;

  static Region whole_space() {
    Region r;
    r.all_space = true;
    return r;
  }
  static Region box(const Box& b) {
    Region r;
    r.boxes.push_back(b);
    return r;
  }
};

namespace geom {

/// Parametric slab clipping of segment [a,b] against a box.
/// Returns false if the intersection is empty, otherwise [t0,t1] in [0,1].
inline bool clip_segment(const Vec& a, const Vec& b, const Box& box, double& t0, double& t1) {
  t0 = 0.0;
  t1 = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = b[i] - a[i];
    if (std::abs(d) < 1e-300) {
      if (a[i] < box.lo[i] || a[i] > box.hi[i]) return false;
      continue;
    }
    double u = (box.lo[i] - a[i]) / d;
    double v = (box.hi[i] - a[i]) / d;
    if (u > v) std::swap(u, v);
    t0 = std::max(t0, u);
    t1 = std::min(t1, v);
    if (t0 > t1) return false;
  }
  return true;
}

/// H^1([a,b] cap region). Overlapping boxes are handled by interval merging,
/// so the result is the length of the union. Pieces below 1e-14 are dropped.
inline double clipped_length(const Vec& a, const Vec& b, const Region& region) {
  double len = num::dist(a, b);
  if (region.all_space) return len;
  std::vector<std::pair<double, double>> iv;
  for (const Box& bx : region.boxes) {
    double t0, t1;
    if (clip_segment(a, b, bx, t0, t1) && t1 - t0 > 0) iv.emplace_back(t0, t1);
  }
  if (iv.empty()) return 0.0;
  std::sort(iv.begin(), iv.end());
  double total = 0, cur0 = iv[0].first, cur1 = iv[0].second;
  for (std::size_t k = 1; k < iv.size(); ++k) {
    if (iv[k].first <= cur1) {
      cur1 = std::max(cur1, iv[k].second);
    } else {
      total += cur1 - cur0;
      cur0 = iv[k].first;
      cur1 = iv[k].second;
    }
  }
  total += cur1 - cur0;
  double r = total * len;
  return r < 1e-14 ? 0.0 : r;
}

/// Euclidean distance from segment [a,b] to the complement of a box,
/// i.e. min over points p in [a,b] of dist(p, R^d \ box). Zero if the
/// segment touches the complement. Exact for axis-aligned boxes: the
/// distance-to-complement of a point is min_i min(p_i-lo_i, hi_i-p_i),
/// and the min over the segment of this concave-piecewise-linear function
/// is attained at an endpoint.
inline double dist_to_complement(const Vec& a, const Vec& b, const Box& box) {
  auto point_dist = [&](const Vec& p) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m = std::min(m, p[i] - box.lo[i]);
      m = std::min(m, box.hi[i] - p[i]);
    }
    return std::max(0.0, m);
  };
  return std::min(point_dist(a), point_dist(b));
}

}  // namespace geom

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

/// Hash of a seed with a list of integer keys; basis of all stationary
/// per-cell randomness.
inline std::uint64_t hash_key(std::uint64_t seed, const std::vector<long long>& keys) {
  std::uint64_t h = splitmix64(seed);
  for (long long k : keys) h = mix(h, static_cast<std::uint64_t>(k));
  return h;
}

inline double uniform01(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Small deterministic stream for tests and heuristics.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(splitmix64(seed + 1)) {}
  std::uint64_t next_u64() {
    state_ = splitmix64(state_);
    return state_;
  }
  double next01() { return uniform01(next_u64()); }
  double uniform(double a, double b) { return a + (b - a) * next01(); }
  int uniform_int(int a, int b) {  // inclusive
    return a + static_cast<int>(next_u64() % static_cast<std::uint64_t>(b - a + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace rng
}  // namespace homflow
