// homflow command line: graph generation, flow solves, uniform-flow checks,
// correctors, f_hom sweeps, W1 convergence and the invariant suite.
#include <iostream>

#include <CLI11.hpp>

#include "homflow/experiments.hpp"

namespace hf = homflow;
using hf::Box;
using hf::Region;
using hf::Vec;

namespace {

hf::graph::GraphSpec load_graph_spec(const std::string& arg) {
  // Either a path to a JSON spec or an inline JSON document.
  if (!arg.empty() && arg.front() == '{')
    return hf::io::graph_spec_from_json(hf::io::json::parse(arg));
  return hf::io::graph_spec_from_json(hf::io::load_file(arg));
}

hf::experiments::ExperimentConfig config_from_file(const std::string& path,
                                                   const std::string& experiment) {
  auto j = hf::io::load_file(path);
  if (!experiment.empty()) j["experiment"] = experiment;
  return hf::experiments::ExperimentConfig::from_json(j);
}

int run_and_emit(const hf::experiments::ExperimentConfig& cfg, const std::string& out_dir) {
  auto result = hf::experiments::run(cfg);
  std::string dir = !out_dir.empty() ? out_dir : (!cfg.out_dir.empty() ? cfg.out_dir : "out");
  hf::experiments::emit_outputs(result, dir);
  std::cout << result.summary.dump(2) << "\n";
  std::cout << (result.pass ? "PASS" : "FAIL") << "\n";
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlinear minimum-cost flow homogenization toolbox"};
  app.require_subcommand(1);

  std::string graph_arg, out_path = "graph.json", config_path, out_dir, engine = "convex";
  std::string problem_path, measure_path, j_arg = "1,0";
  std::string eps_arg;
  int samples = 100;

  auto* gen = app.add_subcommand("gen-graph", "generate a graph and its geometry certificate");
  gen->add_option("--graph", graph_arg, "graph spec JSON (file or inline)")->required();
  gen->add_option("--out", out_path, "output file");
  gen->add_option("--samples", samples, "certificate path samples");

  auto* solve = app.add_subcommand("solve", "minimize F(J,A) subject to DIVE J = m");
  solve->add_option("--problem", problem_path, "problem JSON")->required();
  solve->add_option("--engine", engine, "convex|nonconvex|oracle");
  solve->add_option("--out", out_path, "solution output file");

  auto* uf = app.add_subcommand("uniform-flow", "build and check a uniform-flow operator");
  uf->add_option("--config", config_path, "experiment config JSON")->required();
  uf->add_option("--out", out_dir, "output directory");

  auto* corr = app.add_subcommand("corrector", "corrector bound sweep");
  corr->add_option("--config", config_path, "experiment config JSON")->required();
  corr->add_option("--out", out_dir, "output directory");

  auto* fhom = app.add_subcommand("fhom", "estimate the homogenized energy density");
  fhom->add_option("--config", config_path, "experiment config JSON");
  fhom->add_option("--graph", graph_arg, "graph spec JSON (file or inline)");
  fhom->add_option("--j", j_arg, "tensor direction, comma separated");
  fhom->add_option("--eps", eps_arg, "comma separated eps list");
  fhom->add_option("--out", out_dir, "output directory");

  auto* w1 = app.add_subcommand("w1", "discrete W1 convergence experiment");
  w1->add_option("--config", config_path, "experiment config JSON")->required();
  w1->add_option("--out", out_dir, "output directory");

  auto* suite = app.add_subcommand("suite", "run the registered invariant suite");
  suite->add_option("--config", config_path, "experiment config JSON");
  suite->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto spec = load_graph_spec(graph_arg);
      auto g = hf::graph::generate(spec);
      Box box;
      box.lo.assign(spec.dim, -2.0);
      box.hi.assign(spec.dim, 2.0);
      auto cert = hf::graph::certify_geometry(g, box, samples, spec.seed + 17);
      auto j = hf::io::to_json(g);
      j["certificate"] = hf::io::to_json(cert);
      j["spec"] = hf::io::to_json(spec);
      hf::io::save_file(out_path, j);
      std::cout << "vertices=" << g.num_vertices() << " edges=" << g.num_edges()
                << " r1=" << cert.r1 << " r2=" << cert.r2 << " r3=" << cert.r3 << "\n";
      return 0;
    }
    if (solve->parsed()) {
      auto pj = hf::io::load_file(problem_path);
      auto spec = hf::io::graph_spec_from_json(pj.at("graph"));
      double eps = pj.value("eps", 1.0);
      auto base = hf::graph::generate(spec);
      Region domain = pj.contains("domain")
                          ? Region::box(hf::io::box_from_json(pj["domain"]))
                          : Region::whole_space();
      auto rg = hf::graph::restrict_rescale(base, eps, domain);
      auto fam = hf::io::cost_family_from_json(pj.at("costs"));
      hf::energy::LocalizedEnergy en(&rg, fam, 0.0);
      auto mp = hf::io::measure_from_json(pj.at("m"));
      hf::measures::AtomicMeasure none;
      none.space_dim = mp.space_dim;
      none.value_dim = mp.value_dim;
      hf::solver::FlowProblem p;
      p.graph = &rg;
      p.energy = &en;
      p.region = domain;
      p.m = hf::experiments::project_measure(rg, mp, none);
      p.value_dim = mp.value_dim;
      hf::solver::FlowSolution sol;
      if (engine == "convex")
        sol = hf::solver::solve_convex(p);
      else if (engine == "nonconvex")
        sol = hf::solver::solve_nonconvex(p, 4, 80);
      else if (engine == "oracle")
        sol = hf::solver::brute_force(p, pj.value("oracle_step", 0.05),
                                      pj.value("oracle_radius", 3.0));
      else
        throw hf::Error("unknown engine " + engine);
      hf::io::json out;
      out["objective"] = sol.objective;
      out["status"] = sol.status == hf::solver::SolveStatus::optimal      ? "optimal"
                      : sol.status == hf::solver::SolveStatus::heuristic ? "heuristic"
                                                                         : "infeasible";
      hf::io::json flows = hf::io::json::array();
      for (int e = 0; e < rg.num_edges(); ++e) {
        auto [u, v] = rg.edges[e];
        flows.push_back(hf::io::json{{"edge", hf::io::json::array({u, v})}, {"value", sol.J.canonical(e)}});
      }
      out["flows"] = flows;
      hf::io::save_file(out_path, out);
      std::cout << "objective=" << sol.objective << " status=" << out["status"].dump() << "\n";
      return sol.status == hf::solver::SolveStatus::infeasible ? 1 : 0;
    }
    if (uf->parsed()) return run_and_emit(config_from_file(config_path, "operator_check"), out_dir);
    if (corr->parsed())
      return run_and_emit(config_from_file(config_path, "corrector_bounds"), out_dir);
    if (w1->parsed()) return run_and_emit(config_from_file(config_path, "w1_convergence"), out_dir);
    if (suite->parsed()) {
      hf::experiments::ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = config_from_file(config_path, "property_suite");
      } else {
        cfg.experiment = "property_suite";
        cfg.graph_spec.kind = hf::graph::GraphKind::lattice_zd;
        cfg.graph_spec.dim = 2;
        cfg.graph_spec.period_hint = 8;
        cfg.region = Box::cube(Vec(2, 0.0), 1.0);
      }
      return run_and_emit(cfg, out_dir);
    }
    if (fhom->parsed()) {
      hf::experiments::ExperimentConfig cfg;
      if (!config_path.empty()) {
        cfg = config_from_file(config_path, "fhom_sweep");
      } else {
        cfg.experiment = "fhom_sweep";
        if (graph_arg.empty()) throw hf::Error("fhom needs --config or --graph");
        cfg.graph_spec = load_graph_spec(graph_arg);
        cfg.region = Box::cube(Vec(cfg.graph_spec.dim, 0.0), 1.0);
        Vec jdir;
        std::stringstream js(j_arg);
        for (std::string tok; std::getline(js, tok, ',');) jdir.push_back(std::stod(tok));
        cfg.j_list = {jdir};
        std::stringstream es(eps_arg.empty() ? std::string("0.25,0.125,0.0625") : eps_arg);
        for (std::string tok; std::getline(es, tok, ',');) cfg.eps_list.push_back(std::stod(tok));
      }
      return run_and_emit(cfg, out_dir);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 2;
}
