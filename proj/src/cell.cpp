#include "homflow/cell.hpp"

#include <algorithm>
#include <cmath>

namespace homflow::cell {

namespace {

Region box_region(const Box& b) { return Region::box(b); }

measures::AtomicMeasure atomize_vertex_measure(const graph::RestrictedGraph& g,
                                               const calculus::VertexMeasure& m,
                                               const std::vector<bool>& mask, const Box& clip,
                                               const Vec& ref) {
  measures::AtomicMeasure a;
  a.space_dim = g.base->dim;
  a.value_dim = m.value_dim();
  a.reference_point = ref;
  for (int x = 0; x < g.num_vertices(); ++x) {
    if (!mask.empty() && !mask[x]) continue;
    if (!clip.contains(g.vertices[x])) continue;
    if (num::near_zero(m.at(x), 0.0)) continue;
    a.add(g.vertices[x], m.at(x));
  }
  return a;
}

// Segment measure restricted to a box, atomized at clipped midpoints for
// KR evaluation (midpoint quantization error <= length/2 per unit mass).
measures::AtomicMeasure atomize_segment_measure(const calculus::SegmentMeasure& s, const Box& clip,
                                                const Vec& ref) {
  measures::AtomicMeasure a;
  a.space_dim = s.space_dim;
  a.value_dim = s.value_dim * s.space_dim;
  a.reference_point = ref;
  Region r = Region::box(clip);
  for (const auto& atom : s.atoms) {
    double t0, t1;
    if (!geom::clip_segment(atom.a, atom.b, clip, t0, t1)) continue;
    double len = num::dist(atom.a, atom.b) * (t1 - t0);
    if (len <= 1e-14) continue;
    Vec mid(s.space_dim);
    double tm = 0.5 * (t0 + t1);
    for (int k = 0; k < s.space_dim; ++k) mid[k] = atom.a[k] + tm * (atom.b[k] - atom.a[k]);
    a.add(mid, num::scaled(atom.density, len));
  }
  (void)r;
  return a;
}

}  // namespace

bool RepresentativeSet::is_member(const calculus::DiscreteField& J, double div_tol,
                                  double pin_tol) const {
  if (J.graph() != graph.get()) return false;
  for (const auto& [e, val] : pins)
    if (num::dist(J.canonical(e), val) > pin_tol) return false;
  auto d = calculus::dive(J);
  double resid = 0;
  for (int x = 0; x < graph->num_vertices(); ++x)
    if (constrained[x]) resid += num::norm(d.at(x));
  return resid <= div_tol;
}

solver::FlowProblem RepresentativeSet::flow_problem() const {
  solver::FlowProblem p;
  p.graph = graph.get();
  p.energy = energy.get();
  p.region = localization;
  p.m = calculus::VertexMeasure(graph.get(), j.n);
  p.pinned = pins;
  p.value_dim = j.n;
  p.constrained = constrained;
  return p;
}

namespace {

RepresentativeSet build_representative_set(const Environment& env, const Tensor& j,
                                           const Region& loc, double eps) {
  RepresentativeSet rs;
  rs.op = env.op;
  rs.j = j;
  rs.localization = loc;
  Box bounding = loc.boxes.front();
  for (const Box& b : loc.boxes)
    for (std::size_t k = 0; k < bounding.lo.size(); ++k) {
      bounding.lo[k] = std::min(bounding.lo[k], b.lo[k]);
      bounding.hi[k] = std::max(bounding.hi[k], b.hi[k]);
    }
  rs.region = bounding;
  rs.eps = eps;
  rs.r_partial = env.r_partial();

  double margin = eps * (rs.r_partial + 3.0 * std::max(env.cert.r3, 1.0));
  Box window = bounding.inflated(margin);
  rs.graph = std::make_shared<graph::RestrictedGraph>(
      graph::restrict_rescale(*env.base, eps, Region::box(window)));
  rs.energy = std::make_shared<energy::LocalizedEnergy>(rs.graph.get(), env.family,
                                                        env.effective_r_lip());
  rs.canonical = uflow::apply_rescaled(*env.op, j, *rs.graph);

  const auto& g = *rs.graph;
  // For disjoint, separated boxes the distance to the union's complement is
  // the max over the per-box distances.
  auto dist_to_union_complement = [&](const Vec& a, const Vec& b) {
    double d = 0;
    for (const Box& bx : loc.boxes) d = std::max(d, geom::dist_to_complement(a, b, bx));
    return d;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [u, v] = g.edges[e];
    if (dist_to_union_complement(g.vertices[u], g.vertices[v]) <= eps * rs.r_partial + 1e-12)
      rs.pins[e] = rs.canonical.canonical(e);
  }
  rs.num_free_edges = g.num_edges() - static_cast<int>(rs.pins.size());

  // Divergence is asserted only at vertices with a complete star that also
  // lie inside the operator's clean interior; the finite-window truncation
  // of the uniform flow is confined to a boundary layer of the operator
  // window, which is excluded from the constraints.
  Box opwb = env.op->window_box();
  rs.constrained.assign(g.num_vertices(), false);
  for (int x = 0; x < g.num_vertices(); ++x) {
    int bx = g.base_index[x];
    bool complete = g.adj[x].size() == env.base->adj[bx].size();
    double depth = std::numeric_limits<double>::infinity();
    const Vec& bp = env.base->vertices[bx];
    for (std::size_t k = 0; k < bp.size(); ++k)
      depth = std::min({depth, bp[k] - opwb.lo[k], opwb.hi[k] - bp[k]});
    rs.constrained[x] = complete && depth > env.op->interior_margin + 1e-9;
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    if (rs.pins.count(e)) continue;
    auto [u, v] = g.edges[e];
    if (!rs.constrained[u] || !rs.constrained[v])
      throw Error("representative window too small: free edge touches the window boundary");
  }
  if (!rs.is_member(rs.canonical, 1e-9))
    throw Error("canonical representative violates the divergence constraint; "
                "enlarge the uniform-flow window");
  return rs;
}

}  // namespace

RepresentativeSet make_representative_set(const Environment& env, const Tensor& j, const Box& A,
                                          double eps) {
  return build_representative_set(env, j, Region::box(A), eps);
}

RepresentativeSet make_representative_set_union(const Environment& env, const Tensor& j,
                                                const std::vector<Box>& boxes, double eps) {
  Region loc;
  loc.boxes = boxes;
  return build_representative_set(env, j, loc, eps);
}

CellValue cell_value(const RepresentativeSet& rs, std::uint64_t seed) {
  auto p = rs.flow_problem();
  CellValue cv;
  cv.j = rs.j;
  cv.region = rs.region;
  cv.eps = rs.eps;
  bool convex = rs.energy->family().kind == energy::CostKind::weighted_abs ||
                rs.energy->family().kind == energy::CostKind::piecewise_linear_convex;
  solver::FlowSolution sol;
  if (convex && rs.j.n == 1) {
    sol = solver::solve_convex(p);
  } else {
    sol = solver::solve_nonconvex(p, 3, 80, seed);
  }
  cv.value = sol.objective;
  cv.status = sol.status;
  cv.minimizer = sol.J;
  return cv;
}

std::vector<double> representative_mass(const RepresentativeSet& rs,
                                        const calculus::DiscreteField& J) {
  return calculus::embed(J).mass_on(rs.localization);
}

std::pair<double, double> scaling_check(const Environment& env, const Tensor& j, const Box& A,
                                        double eps) {
  auto rs_eps = make_representative_set(env, j, A, eps);
  double lhs = cell_value(rs_eps).value;
  Box blown;
  blown.lo = num::scaled(A.lo, 1.0 / eps);
  blown.hi = num::scaled(A.hi, 1.0 / eps);
  auto rs_one = make_representative_set(env, j, blown, 1.0);
  double rhs = std::pow(eps, env.base->dim) * cell_value(rs_one).value;
  return {lhs, rhs};
}

HomEstimate estimate_fhom(const Environment& env, const Tensor& j,
                          const std::vector<double>& eps_list, const Box& A, std::uint64_t seed) {
  if (eps_list.size() < 2) throw Error("estimate_fhom needs at least two eps levels");
  HomEstimate est;
  est.j = j;
  est.eps_list = eps_list;
  est.operator_fingerprint = env.op->fingerprint;
  double vol = A.volume();
  for (double eps : eps_list) {
    auto rs = make_representative_set(env, j, A, eps);
    auto cv = cell_value(rs, seed);
    if (cv.status == solver::SolveStatus::infeasible) throw Infeasible("cell problem infeasible");
    if (cv.status == solver::SolveStatus::heuristic) est.certified = false;
    est.values.push_back(cv.value / vol);
  }
  // Least-squares fit value(eps) ~ fhom + slope * eps.
  double n = static_cast<double>(eps_list.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    sx += eps_list[i];
    sy += est.values[i];
    sxx += eps_list[i] * eps_list[i];
    sxy += eps_list[i] * est.values[i];
  }
  double den = n * sxx - sx * sx;
  est.slope = (n * sxy - sx * sy) / den;
  est.fhom = (sy - est.slope * sx) / n;
  for (std::size_t i = 0; i < eps_list.size(); ++i)
    est.fit_residual =
        std::max(est.fit_residual, std::abs(est.fhom + est.slope * eps_list[i] - est.values[i]));
  return est;
}

namespace {

double tensor_dist(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.m.size(); ++i) s += (a.m[i] - b.m[i]) * (a.m[i] - b.m[i]);
  return std::sqrt(s);
}

const HomEstimate* find_estimate(const std::vector<HomEstimate>& grid, const Tensor& t) {
  for (const auto& e : grid)
    if (e.j.n == t.n && e.j.d == t.d && tensor_dist(e.j, t) < 1e-9) return &e;
  return nullptr;
}

}  // namespace

FhomProperties fhom_properties_check(const std::vector<HomEstimate>& grid, double c2,
                                     double lipschitz_bound, double tol) {
  FhomProperties rep;
  rep.min_growth_slack = std::numeric_limits<double>::infinity();
  for (const auto& e : grid)
    rep.min_growth_slack = std::min(rep.min_growth_slack, e.fhom - c2 * e.j.frobenius());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = i + 1; k < grid.size(); ++k) {
      double dj = tensor_dist(grid[i].j, grid[k].j);
      if (dj < 1e-12) continue;
      rep.max_lipschitz_ratio =
          std::max(rep.max_lipschitz_ratio, std::abs(grid[i].fhom - grid[k].fhom) / dj);
      Tensor sum(grid[i].j.n, grid[i].j.d), mid(grid[i].j.n, grid[i].j.d);
      for (std::size_t q = 0; q < sum.m.size(); ++q) {
        sum.m[q] = grid[i].j.m[q] + grid[k].j.m[q];
        mid.m[q] = 0.5 * sum.m[q];
      }
      if (const auto* es = find_estimate(grid, sum))
        rep.max_triangle_excess =
            std::max(rep.max_triangle_excess, es->fhom - grid[i].fhom - grid[k].fhom);
      if (const auto* em = find_estimate(grid, mid))
        rep.max_midpoint_excess = std::max(
            rep.max_midpoint_excess, em->fhom - 0.5 * (grid[i].fhom + grid[k].fhom));
    }
    Tensor neg = grid[i].j;
    for (double& v : neg.m) v = -v;
    if (const auto* en = find_estimate(grid, neg))
      rep.max_symmetry_gap = std::max(rep.max_symmetry_gap, std::abs(en->fhom - grid[i].fhom));
  }
  rep.pass = rep.min_growth_slack > -tol && rep.max_lipschitz_ratio <= lipschitz_bound + tol &&
             rep.max_triangle_excess <= tol && rep.max_midpoint_excess <= tol &&
             rep.max_symmetry_gap <= tol;
  return rep;
}

EnforceReport enforce_representative(const Environment& env, const RepresentativeSet& rs,
                                     const calculus::DiscreteField& J, double eta) {
  const auto& g = *rs.graph;
  const Box& A = rs.region;
  const double eps = rs.eps;
  double side = A.hi[0] - A.lo[0];
  double vol = A.volume();
  double jn = rs.j.frobenius();

  auto muJ = calculus::embed(J);
  double tvJ_on_A = muJ.variation_on(box_region(A));

  // Admissible window (unit-cube normalization: eta is relative to the side).
  double eta_lo = eps * std::max(rs.r_partial, env.effective_r_lip()) / side;
  double eta_hi = std::min(1.0 / 3.0, (1.0 + jn) * vol / (16.0 * std::max(tvJ_on_A, 1e-300)));
  if (!(eta > eta_lo && eta < eta_hi))
    throw EtaOutOfRange("eta must lie in (" + std::to_string(eta_lo) + ", " +
                        std::to_string(eta_hi) + ")");

  // Cutoff band of width eta, shifted inward by the finite-eps pin clearance
  // (pinned edges reach depth eps (R_partial + R3) from the complement; the
  // shift realizes the deeper members of the cutoff family at finite eps and
  // vanishes as eps -> 0): psi = 1 on the (1 - 2 eta - 2 s)-cube and 0
  // outside the (1 - eta - s)-cube, C^1 ramp with Lip <= C / eta.
  double shift = 2.0 * eps * (rs.r_partial + env.cert.r3) / side;
  if (1.0 - 2.0 * eta - 2.0 * shift <= 0.1)
    throw EtaOutOfRange("cutoff band leaves no interior cube at this eps");
  Vec center = A.center();
  auto psi_at = [&](const Vec& p) {
    double r = 0;
    for (std::size_t k = 0; k < p.size(); ++k)
      r = std::max(r, std::abs(p[k] - center[k]) / (0.5 * side));
    double t = (r - (1.0 - 2.0 * eta - 2.0 * shift)) / eta;
    t = std::max(0.0, std::min(1.0, t));
    return 1.0 - t * t * (3.0 - 2.0 * t);
  };
  std::vector<double> psi(g.num_vertices());
  for (int x = 0; x < g.num_vertices(); ++x) psi[x] = psi_at(g.vertices[x]);
  auto psihat = calculus::hat(g, psi);

  calculus::DiscreteField J2(&g, rs.j.n);
  for (int e = 0; e < g.num_edges(); ++e) {
    Vec v = num::scaled(J.canonical(e), psihat[e]);
    num::axpy(v, 1.0 - psihat[e], rs.canonical.canonical(e));
    J2.set_canonical(e, v);
  }
  for (const auto& [e, val] : rs.pins)
    if (num::dist(J2.canonical(e), val) > 1e-12)
      throw EtaOutOfRange("cutoff band reaches the pinned margin; increase eta");

  // Divergence correction: K with DIVE K = -DIVE J2, localized.
  auto div2 = calculus::dive(J2);
  calculus::VertexMeasure m2(&g, rs.j.n);
  double tv2 = 0;
  for (int x = 0; x < g.num_vertices(); ++x)
    if (rs.constrained[x]) tv2 += num::norm(div2.at(x));
  for (int x = 0; x < g.num_vertices(); ++x) {
    if (!rs.constrained[x]) continue;
    Vec v = div2.at(x);
    if (num::norm(v) <= 1e-12 * std::max(1.0, tv2)) continue;
    m2.at(x) = num::scaled(v, -1.0);
  }
  correctors::PathConstants pc{env.cert.r1, env.cert.r2};
  auto corr = correctors::build_corrector(g, m2, pc);
  for (const auto& [e, val] : rs.pins) {
    (void)val;
    if (num::norm(corr.J.canonical(e)) > 1e-12)
      throw EtaOutOfRange("divergence corrector reaches the pinned margin; increase eta");
  }

  EnforceReport rep;
  rep.eta = eta;
  rep.result = J2 + corr.J;
  if (!rs.is_member(rep.result, 1e-8))
    throw Error("enforce_representative produced a non-member (window too small?)");
  rep.energy_before = rs.energy->eval_rescaled(J, box_region(A), eps);
  rep.energy_after = rs.energy->eval_rescaled(rep.result, box_region(A), eps);
  rep.energy_increase = rep.energy_after - rep.energy_before;

  // Error functional terms of the non-asymptotic cube estimate.
  auto divJ = calculus::dive(J);
  auto div_atoms = atomize_vertex_measure(g, divJ, rs.constrained, A, center);
  double kr_div = measures::kr_tilde(div_atoms).value;
  double tv_div = total_variation(div_atoms);

  auto diff = J - rs.canonical;
  auto mu_diff = calculus::embed(diff);
  auto diff_atoms = atomize_segment_measure(mu_diff, A, center);
  double kr_diff = measures::kr_tilde(diff_atoms).value;

  rep.err_divergence = kr_div / eta;
  rep.err_boundary = kr_diff / (eta * eta);
  rep.err_cutoff = std::sqrt(eta) * ((1.0 + jn) * vol + tvJ_on_A);
  rep.err_scale = eps * (jn * vol + tv_div + tvJ_on_A / eta);
  rep.err_total = rep.err_divergence + rep.err_boundary + rep.err_cutoff + rep.err_scale;
  return rep;
}

}  // namespace homflow::cell
