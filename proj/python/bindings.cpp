// Python bindings for the main operations: graph generation with geometry
// certificates, KR norms and transport plans, Beckmann solves, correctors,
// uniform-flow checks and f_hom estimation.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homflow/experiments.hpp"

namespace py = pybind11;
using namespace homflow;
namespace hx = homflow::experiments;

namespace {

graph::GraphSpec make_spec(const std::string& kind, int dim, double jitter, std::uint64_t seed,
                           int period_hint) {
  graph::GraphSpec s;
  s.kind = kind == "lattice_zd"          ? graph::GraphKind::lattice_zd
           : kind == "jittered_lattice" ? graph::GraphKind::jittered_lattice
                                        : graph::GraphKind::voronoi_points;
  if (kind != "lattice_zd" && kind != "jittered_lattice" && kind != "voronoi_points")
    throw Error("unknown graph kind: " + kind);
  s.dim = dim;
  s.jitter_amplitude = jitter;
  s.seed = seed;
  s.period_hint = period_hint;
  return s;
}

energy::EdgeCostFamily make_family(const std::string& kind, std::uint64_t seed, double p_min,
                                   double p_max) {
  energy::EdgeCostFamily f;
  f.kind = energy::cost_kind_from_string(kind);
  f.seed = seed;
  f.p_min = p_min;
  f.p_max = p_max;
  return f;
}

measures::AtomicMeasure make_measure(const std::vector<std::pair<Vec, Vec>>& atoms, int space_dim,
                                     const Vec& reference) {
  measures::AtomicMeasure m;
  m.space_dim = space_dim;
  m.value_dim = atoms.empty() ? 1 : static_cast<int>(atoms.front().second.size());
  m.reference_point = reference.empty() ? Vec(space_dim, 0.0) : reference;
  for (const auto& [p, v] : atoms) m.add(p, v);
  return m;
}

Box centered_box(const Vec& center, double side) { return Box::cube(center, side); }

}  // namespace

PYBIND11_MODULE(_homflow, m) {
  m.doc() = "discrete-to-continuum machinery for nonlinear minimum-cost flow homogenization";

  py::register_exception<Error>(m, "HomflowError");

  m.def(
      "generate_graph",
      [](const std::string& kind, int dim, double jitter, std::uint64_t seed, int period_hint,
         int cert_samples) {
        auto spec = make_spec(kind, dim, jitter, seed, period_hint);
        auto g = graph::generate(spec);
        Box box;
        box.lo.assign(dim, -2.0);
        box.hi.assign(dim, 2.0);
        auto cert = graph::certify_geometry(g, box, cert_samples, seed + 17);
        py::dict d;
        d["vertices"] = g.vertices;
        d["edges"] = g.edges;
        d["r1"] = cert.r1;
        d["r2"] = cert.r2;
        d["r3"] = cert.r3;
        return d;
      },
      py::arg("kind"), py::arg("dim") = 2, py::arg("jitter_amplitude") = 0.0, py::arg("seed") = 0,
      py::arg("period_hint") = 4, py::arg("cert_samples") = 60,
      "Generate an embedded graph and numerically certify its geometry.");

  m.def(
      "total_variation",
      [](const std::vector<std::pair<Vec, Vec>>& atoms, int space_dim) {
        return measures::total_variation(make_measure(atoms, space_dim, {}));
      },
      py::arg("atoms"), py::arg("space_dim") = 2);

  m.def(
      "kr",
      [](const std::vector<std::pair<Vec, Vec>>& atoms, int space_dim) {
        return measures::kr(make_measure(atoms, space_dim, {})).value;
      },
      py::arg("atoms"), py::arg("space_dim") = 2,
      "Kantorovich-Rubinstein norm (sup-norm and Lipschitz constrained dual).");

  m.def(
      "kr_tilde",
      [](const std::vector<std::pair<Vec, Vec>>& atoms, int space_dim, const Vec& reference) {
        return measures::kr_tilde(make_measure(atoms, space_dim, reference)).value;
      },
      py::arg("atoms"), py::arg("space_dim") = 2, py::arg("reference_point") = Vec{},
      "Tilde-KR norm; equals the T1 transport cost for zero-mass measures.");

  m.def(
      "t1_cost",
      [](const std::vector<std::pair<Vec, Vec>>& atoms, int space_dim) {
        return measures::t1_flow(make_measure(atoms, space_dim, {})).total_cost;
      },
      py::arg("atoms"), py::arg("space_dim") = 2,
      "Componentwise optimal W1 transport cost of a zero-mass measure.");

  m.def(
      "w1_value",
      [](const std::string& graph_kind, double jitter, std::uint64_t graph_seed,
         const std::string& cost_kind, std::uint64_t cost_seed, double p_min, double p_max,
         const std::vector<std::pair<Vec, Vec>>& plus, const std::vector<std::pair<Vec, Vec>>& minus,
         double eps, const Vec& region_center, double region_side) {
        hx::ExperimentConfig cfg;
        cfg.experiment = "w1_convergence";
        cfg.graph_spec = make_spec(graph_kind, 2, jitter, graph_seed, 4);
        cfg.costs = make_family(cost_kind, cost_seed, p_min, p_max);
        cfg.eps_list = {eps};
        cfg.region = centered_box(region_center, region_side);
        cfg.m_plus = make_measure(plus, 2, {});
        cfg.m_minus = make_measure(minus, 2, {});
        auto res = hx::run_w1_convergence(cfg);
        return res.rows.front().metrics.at("value");
      },
      py::arg("graph_kind"), py::arg("jitter_amplitude"), py::arg("graph_seed"),
      py::arg("cost_kind"), py::arg("cost_seed"), py::arg("p_min"), py::arg("p_max"),
      py::arg("plus"), py::arg("minus"), py::arg("eps"), py::arg("region_center") = Vec{0.5, 0.5},
      py::arg("region_side") = 1.0,
      "Discrete W1 value between two projected measures at one eps.");

  m.def(
      "fhom_estimate",
      [](const std::string& graph_kind, double jitter, std::uint64_t graph_seed,
         const std::string& cost_kind, std::uint64_t cost_seed, double p_min, double p_max,
         const Vec& j, const std::vector<double>& eps_list) {
        auto spec = make_spec(graph_kind, 2, jitter, graph_seed, 4);
        auto fam = make_family(cost_kind, cost_seed, p_min, p_max);
        Box region = centered_box(Vec(2, 0.0), 1.0);
        auto prep = hx::prepare_environment(spec, fam, region, eps_list.back());
        auto est = cell::estimate_fhom(prep->env, Tensor::row(j), eps_list, region);
        py::dict d;
        d["values"] = est.values;
        d["fhom"] = est.fhom;
        d["residual"] = est.fit_residual;
        d["certified"] = est.certified;
        return d;
      },
      py::arg("graph_kind"), py::arg("jitter_amplitude"), py::arg("graph_seed"),
      py::arg("cost_kind"), py::arg("cost_seed"), py::arg("p_min"), py::arg("p_max"), py::arg("j"),
      py::arg("eps_list"),
      "Estimate the homogenized energy density in direction j on the unit cube.");

  m.def(
      "corrector_report",
      [](const std::string& graph_kind, double jitter, std::uint64_t graph_seed, double eps,
         const std::vector<std::pair<Vec, Vec>>& atoms) {
        auto spec = make_spec(graph_kind, 2, jitter, graph_seed, 4);
        Box region = centered_box(Vec(2, 0.0), 1.0);
        auto prep = hx::prepare_environment(spec, energy::EdgeCostFamily{}, region, eps);
        auto rg = graph::restrict_rescale(prep->base, eps, Region::box(region.inflated(2 * eps)));
        auto plus = make_measure(atoms, 2, {});
        measures::AtomicMeasure none;
        none.space_dim = 2;
        none.value_dim = plus.value_dim;
        auto mv = hx::project_measure(rg, plus, none);
        correctors::PathConstants pc{prep->cert.r1, prep->cert.r2};
        auto corr = correctors::build_corrector(rg, mv, pc);
        py::dict d;
        d["tv"] = corr.tv;
        d["kr_tilde"] = corr.kr_of_m;
        d["bound_ratio"] = corr.bound_ratio;
        d["support_radius"] = corr.support_radius;
        return d;
      },
      py::arg("graph_kind"), py::arg("jitter_amplitude"), py::arg("graph_seed"), py::arg("eps"),
      py::arg("atoms"),
      "Solve DIVE J = m with localized paths and report the TV/KR bound ratio.");

  m.def(
      "property_suite",
      [](std::uint64_t seed) {
        hx::ExperimentConfig cfg;
        cfg.experiment = "property_suite";
        cfg.graph_spec = make_spec("lattice_zd", 2, 0.0, 0, 8);
        cfg.region = centered_box(Vec(2, 0.0), 1.0);
        cfg.seeds = {seed};
        std::vector<py::dict> out;
        for (const auto& c : hx::property_checks(cfg)) {
          py::dict d;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["metric"] = c.metric;
          out.push_back(std::move(d));
        }
        return out;
      },
      py::arg("seed") = 1, "Run the registered invariant checks.");
}
