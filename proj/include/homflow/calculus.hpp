/// Discrete vector calculus: gradient, divergence, path fluxes, the hat/star
/// products with their Leibniz identity, and the segment embedding iota_eps
/// with exact polynomial pairings.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homflow/field.hpp"

namespace homflow::calculus {

/// Multivariate polynomial, sparse monomial form.
class Polynomial {
 public:
  struct Term {
    std::vector<int> exps;
    double coeff;
  };

  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}
  static Polynomial constant(int dim, double c);
  static Polynomial coordinate(int dim, int k);  // x_k

  int dim() const { return dim_; }
  int degree() const;
  void add_term(std::vector<int> exps, double coeff);
  double eval(const Vec& p) const;
  Polynomial partial(int k) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial scaled(double s) const;
  const std::vector<Term>& terms() const { return terms_; }

 private:
  int dim_ = 0;
  std::vector<Term> terms_;
};

/// Vector of polynomials, one per component of a test field X -> R^m.
using PolyField = std::vector<Polynomial>;

/// V tensor R^d valued measure carried by line segments; `density` is the
/// (constant) density w.r.t. H^1 on [a,b], stored row-major n x d.
struct SegmentMeasure {
  struct Atom {
    Vec a, b;
    std::vector<double> density;  // n*d, row-major
  };
  int value_dim = 1;  // n
  int space_dim = 1;  // d
  double epsilon = 1.0;
  std::vector<Atom> atoms;

  double total_variation() const;
  /// |measure|(region): Frobenius norm of the density times clipped length.
  double variation_on(const Region& region) const;
  /// measure(region) as an n x d matrix.
  std::vector<double> mass_on(const Region& region) const;
  void write_csv(const std::string& path) const;
};

DiscreteField grad(const graph::RestrictedGraph& g, const std::vector<double>& psi);
VertexMeasure dive(const DiscreteField& J);

/// Unit flux through a simple path (+1 along, -1 reversed, 0 elsewhere).
DiscreteField unit_path_flux(const graph::RestrictedGraph& g, const std::vector<int>& path,
                             int value_dim = 1, const Vec* value = nullptr);

EdgeScalar hat(const graph::RestrictedGraph& g, const std::vector<double>& psi);

/// Edgewise product K * J (K symmetric scalar, J antisymmetric).
DiscreteField edge_scale(const EdgeScalar& k, const DiscreteField& J);

/// (K star J)(x) := 1/2 sum_{y ~ x} K(x,y) J(x,y), for symmetric scalar K.
VertexMeasure star(const EdgeScalar& k, const DiscreteField& J);

/// Same product for antisymmetric scalar K (e.g. K = grad psi); the
/// integrand K(x,y) J(x,y) is then orientation-independent.
VertexMeasure star(const DiscreteField& k, const DiscreteField& J);

/// iota_eps J: spread each edge value along its segment with direction
/// density J(x,y) (x) (y-x)/|y-x|.
SegmentMeasure embed(const DiscreteField& J);

/// Exact pairing of a segment measure with a matrix polynomial test field
/// Phi : R^d -> (V tensor R^d)^*, total degree <= 3 per component
/// (2-point Gauss per segment). Throws DegreeTooHigh beyond degree 3.
double pair_with_test(const SegmentMeasure& m, const std::vector<PolyField>& phi_rows);

/// Pairing of a vertex measure with Psi : R^d -> V^*, degree <= 3.
double pair_with_test(const VertexMeasure& m, const PolyField& psi);

/// Moments: integral of a scalar polynomial against the measure, returning
/// the n x d matrix (segment) or V vector (vertex).
std::vector<double> moment(const SegmentMeasure& m, const Polynomial& phi);
Vec moment(const VertexMeasure& m, const Polynomial& phi);

/// Numerical pairing with an arbitrary smooth scalar test function
/// (fixed-order Gauss per segment); diagnostic quality, not exact.
std::vector<double> pair_numeric(const SegmentMeasure& m, const std::function<double(const Vec&)>& phi,
                                 int gauss_points = 8);

}  // namespace homflow::calculus
