#include "homflow/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace homflow::calculus {

DiscreteField& DiscreteField::operator+=(const DiscreteField& o) {
  if (graph_ != o.graph_ || value_dim_ != o.value_dim_)
    throw GraphMismatch("field addition requires identical graphs");
  for (std::size_t e = 0; e < values_.size(); ++e) num::axpy(values_[e], 1.0, o.values_[e]);
  return *this;
}

DiscreteField& DiscreteField::operator*=(double s) {
  for (auto& v : values_) v = num::scaled(v, s);
  return *this;
}

VertexMeasure& VertexMeasure::operator+=(const VertexMeasure& o) {
  if (graph_ != o.graph_ || value_dim_ != o.value_dim_)
    throw GraphMismatch("measure addition requires identical graphs");
  for (std::size_t x = 0; x < values_.size(); ++x) num::axpy(values_[x], 1.0, o.values_[x]);
  return *this;
}

VertexMeasure& VertexMeasure::operator*=(double s) {
  for (auto& v : values_) v = num::scaled(v, s);
  return *this;
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(std::vector<int>(dim, 0), c);
  return p;
}

Polynomial Polynomial::coordinate(int dim, int k) {
  Polynomial p(dim);
  std::vector<int> e(dim, 0);
  e[k] = 1;
  p.add_term(e, 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const Term& t : terms_) {
    int s = 0;
    for (int e : t.exps) s += e;
    d = std::max(d, s);
  }
  return d;
}

void Polynomial::add_term(std::vector<int> exps, double coeff) {
  for (Term& t : terms_) {
    if (t.exps == exps) {
      t.coeff += coeff;
      return;
    }
  }
  terms_.push_back({std::move(exps), coeff});
}

double Polynomial::eval(const Vec& p) const {
  double s = 0;
  for (const Term& t : terms_) {
    double m = t.coeff;
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < t.exps[k]; ++i) m *= p[k];
    s += m;
  }
  return s;
}

Polynomial Polynomial::partial(int k) const {
  Polynomial r(dim_);
  for (const Term& t : terms_) {
    if (t.exps[k] == 0) continue;
    auto e = t.exps;
    double c = t.coeff * e[k];
    e[k] -= 1;
    r.add_term(e, c);
  }
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r(dim_);
  for (const Term& a : terms_)
    for (const Term& b : o.terms_) {
      std::vector<int> e(dim_);
      for (int k = 0; k < dim_; ++k) e[k] = a.exps[k] + b.exps[k];
      r.add_term(e, a.coeff * b.coeff);
    }
  return r;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  for (const Term& t : o.terms_) r.add_term(t.exps, t.coeff);
  return r;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial r = *this;
  for (Term& t : r.terms_) t.coeff *= s;
  return r;
}

double SegmentMeasure::total_variation() const {
  double s = 0;
  for (const Atom& a : atoms) s += num::norm(a.density) * num::dist(a.a, a.b);
  return s;
}

double SegmentMeasure::variation_on(const Region& region) const {
  double s = 0;
  for (const Atom& a : atoms) s += num::norm(a.density) * geom::clipped_length(a.a, a.b, region);
  return s;
}

std::vector<double> SegmentMeasure::mass_on(const Region& region) const {
  std::vector<double> m(static_cast<std::size_t>(value_dim) * space_dim, 0.0);
  for (const Atom& a : atoms) {
    double len = geom::clipped_length(a.a, a.b, region);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += a.density[i] * len;
  }
  return m;
}

void SegmentMeasure::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path);
  out.precision(17);
  for (int k = 0; k < space_dim; ++k) out << "a" << k << ",";
  for (int k = 0; k < space_dim; ++k) out << "b" << k << ",";
  for (int i = 0; i < value_dim; ++i)
    for (int k = 0; k < space_dim; ++k) out << "d" << i << k << (i * space_dim + k + 1 < value_dim * space_dim ? "," : "");
  out << "\n";
  for (const Atom& a : atoms) {
    for (double x : a.a) out << x << ",";
    for (double x : a.b) out << x << ",";
    for (std::size_t i = 0; i < a.density.size(); ++i)
      out << a.density[i] << (i + 1 < a.density.size() ? "," : "");
    out << "\n";
  }
}

DiscreteField grad(const graph::RestrictedGraph& g, const std::vector<double>& psi) {
  DiscreteField J(&g, 1);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    J.set_canonical(e, Vec{psi[v] - psi[u]});
  }
  return J;
}

VertexMeasure dive(const DiscreteField& J) {
  const auto& g = *J.graph();
  VertexMeasure m(&g, J.value_dim());
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    const Vec& val = J.canonical(e);  // J(u, v)
    num::axpy(m.at(u), 1.0, val);
    num::axpy(m.at(v), -1.0, val);
  }
  return m;
}

DiscreteField unit_path_flux(const graph::RestrictedGraph& g, const std::vector<int>& path,
                             int value_dim, const Vec* value) {
  DiscreteField J(&g, value_dim);
  if (path.size() <= 1) return J;
  std::set<int> seen(path.begin(), path.end());
  if (seen.size() != path.size()) throw NotSimple("unit_path_flux: path revisits a vertex");
  Vec unit = value ? *value : Vec(value_dim, 1.0);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    int a = path[i], b = path[i + 1];
    int e = g.find_edge(a, b);
    if (e < 0) throw NotAPath("unit_path_flux: consecutive vertices not adjacent");
    Vec cur = J.canonical(e);
    double sign = (a < b) ? 1.0 : -1.0;  // canonical orientation is low -> high
    num::axpy(cur, sign, unit);
    J.set_canonical(e, cur);
  }
  return J;
}

EdgeScalar hat(const graph::RestrictedGraph& g, const std::vector<double>& psi) {
  EdgeScalar k(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    k[e] = 0.5 * (psi[u] + psi[v]);
  }
  return k;
}

DiscreteField edge_scale(const EdgeScalar& k, const DiscreteField& J) {
  DiscreteField r = J;
  for (int e = 0; e < J.graph()->num_edges(); ++e) r.set_canonical(e, num::scaled(J.canonical(e), k[e]));
  return r;
}

VertexMeasure star(const EdgeScalar& k, const DiscreteField& J) {
  const auto& g = *J.graph();
  VertexMeasure m(&g, J.value_dim());
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    // (K*J)(u) gets 1/2 K(u,v) J(u,v); (K*J)(v) gets 1/2 K(v,u) J(v,u).
    Vec val = num::scaled(J.canonical(e), 0.5 * k[e]);
    num::axpy(m.at(u), 1.0, val);
    num::axpy(m.at(v), -1.0, val);
  }
  return m;
}

VertexMeasure star(const DiscreteField& k, const DiscreteField& J) {
  if (k.value_dim() != 1) throw Error("star: antisymmetric K must be scalar");
  const auto& g = *J.graph();
  if (k.graph() != &g) throw GraphMismatch("star: fields live on different graphs");
  VertexMeasure m(&g, J.value_dim());
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    Vec val = num::scaled(J.canonical(e), 0.5 * k.canonical(e)[0]);
    num::axpy(m.at(u), 1.0, val);
    num::axpy(m.at(v), 1.0, val);  // K(v,u) J(v,u) = K(u,v) J(u,v)
  }
  return m;
}

SegmentMeasure embed(const DiscreteField& J) {
  const auto& g = *J.graph();
  SegmentMeasure m;
  m.value_dim = J.value_dim();
  m.space_dim = g.base ? g.base->dim : static_cast<int>(g.vertices.empty() ? 0 : g.vertices[0].size());
  m.epsilon = g.epsilon;
  for (int e = 0; e < g.num_edges(); ++e) {
    const Vec& val = J.canonical(e);
    if (num::near_zero(val, 0.0)) continue;
    auto [u, v] = g.edges[e];
    const Vec& a = g.vertices[u];
    const Vec& b = g.vertices[v];
    double len = num::dist(a, b);
    if (len <= 0) continue;
    SegmentMeasure::Atom atom;
    atom.a = a;
    atom.b = b;
    atom.density.resize(static_cast<std::size_t>(m.value_dim) * m.space_dim);
    for (int i = 0; i < m.value_dim; ++i)
      for (int k = 0; k < m.space_dim; ++k)
        atom.density[static_cast<std::size_t>(i) * m.space_dim + k] = val[i] * (b[k] - a[k]) / len;
    m.atoms.push_back(std::move(atom));
  }
  return m;
}

namespace {

// 2-point Gauss-Legendre on [0,1]: exact for polynomials of degree <= 3.
constexpr double kGauss2[2] = {0.21132486540518711775, 0.78867513459481288225};

void check_degree(const Polynomial& p) {
  if (p.degree() > 3) throw DegreeTooHigh("polynomial test functions are limited to degree 3");
}

}  // namespace

double pair_with_test(const SegmentMeasure& m, const std::vector<PolyField>& phi_rows) {
  for (const auto& row : phi_rows)
    for (const auto& p : row) check_degree(p);
  double total = 0;
  Vec z(m.space_dim);
  for (const auto& atom : m.atoms) {
    double len = num::dist(atom.a, atom.b);
    if (len <= 0) continue;
    double acc = 0;
    for (double t : kGauss2) {
      for (int k = 0; k < m.space_dim; ++k) z[k] = atom.a[k] + t * (atom.b[k] - atom.a[k]);
      double v = 0;
      for (int i = 0; i < m.value_dim; ++i)
        for (int k = 0; k < m.space_dim; ++k)
          v += atom.density[static_cast<std::size_t>(i) * m.space_dim + k] * phi_rows[i][k].eval(z);
      acc += 0.5 * v;
    }
    total += acc * len;
  }
  return total;
}

double pair_with_test(const VertexMeasure& m, const PolyField& psi) {
  for (const auto& p : psi) check_degree(p);
  const auto& g = *m.graph();
  double total = 0;
  for (int x = 0; x < g.num_vertices(); ++x) {
    const Vec& val = m.at(x);
    for (int i = 0; i < m.value_dim(); ++i) total += val[i] * psi[i].eval(g.vertices[x]);
  }
  return total;
}

std::vector<double> moment(const SegmentMeasure& m, const Polynomial& phi) {
  check_degree(phi);
  std::vector<double> out(static_cast<std::size_t>(m.value_dim) * m.space_dim, 0.0);
  Vec z(m.space_dim);
  for (const auto& atom : m.atoms) {
    double len = num::dist(atom.a, atom.b);
    if (len <= 0) continue;
    double w = 0;
    for (double t : kGauss2) {
      for (int k = 0; k < m.space_dim; ++k) z[k] = atom.a[k] + t * (atom.b[k] - atom.a[k]);
      w += 0.5 * phi.eval(z);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += atom.density[i] * w * len;
  }
  return out;
}

Vec moment(const VertexMeasure& m, const Polynomial& phi) {
  check_degree(phi);
  const auto& g = *m.graph();
  Vec out(m.value_dim(), 0.0);
  for (int x = 0; x < g.num_vertices(); ++x) num::axpy(out, phi.eval(g.vertices[x]), m.at(x));
  return out;
}

std::vector<double> pair_numeric(const SegmentMeasure& m, const std::function<double(const Vec&)>& phi,
                                 int gauss_points) {
  // Gauss-Legendre nodes/weights on [0,1] up to 8 points.
  static const std::vector<std::vector<std::pair<double, double>>> tables = [] {
    std::vector<std::vector<std::pair<double, double>>> t(9);
    t[2] = {{0.211324865405187, 0.5}, {0.788675134594813, 0.5}};
    t[4] = {{0.069431844202974, 0.173927422568727},
            {0.330009478207572, 0.326072577431273},
            {0.669990521792428, 0.326072577431273},
            {0.930568155797026, 0.173927422568727}};
    t[8] = {{0.019855071751232, 0.050614268145188}, {0.101666761293187, 0.111190517226687},
            {0.237233795041836, 0.156853322938944}, {0.408282678752175, 0.181341891689181},
            {0.591717321247825, 0.181341891689181}, {0.762766204958164, 0.156853322938944},
            {0.898333238706813, 0.111190517226687}, {0.980144928248768, 0.050614268145188}};
    return t;
  }();
  int gp = gauss_points <= 2 ? 2 : (gauss_points <= 4 ? 4 : 8);
  std::vector<double> out(static_cast<std::size_t>(m.value_dim) * m.space_dim, 0.0);
  Vec z(m.space_dim);
  for (const auto& atom : m.atoms) {
    double len = num::dist(atom.a, atom.b);
    if (len <= 0) continue;
    double w = 0;
    for (const auto& [t, wt] : tables[gp]) {
      for (int k = 0; k < m.space_dim; ++k) z[k] = atom.a[k] + t * (atom.b[k] - atom.a[k]);
      w += wt * phi(z);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += atom.density[i] * w * len;
  }
  return out;
}

}  // namespace homflow::calculus
