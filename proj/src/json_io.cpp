#include "homflow/json_io.hpp"

#include <fstream>

namespace homflow::io {

json to_json(const graph::EmbeddedGraph& g) {
  json j;
  j["dim"] = g.dim;
  j["vertices"] = g.vertices;
  j["edges"] = g.edges;
  return j;
}

graph::EmbeddedGraph graph_from_json(const json& j) {
  graph::EmbeddedGraph g;
  g.dim = j.at("dim").get<int>();
  g.vertices = j.at("vertices").get<std::vector<Vec>>();
  g.adj.resize(g.vertices.size());
  for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  g.finalize();
  return g;
}

json box_to_json(const Box& b) { return json{{"lo", b.lo}, {"hi", b.hi}}; }

Box box_from_json(const json& j) {
  Box b;
  b.lo = j.at("lo").get<Vec>();
  b.hi = j.at("hi").get<Vec>();
  return b;
}

json to_json(const graph::GeometryCertificate& c) {
  return json{{"r1", c.r1},
              {"r2", c.r2},
              {"r3", c.r3},
              {"verified_box", box_to_json(c.verified_box)},
              {"grid_pitch", c.grid_pitch}};
}

graph::GeometryCertificate certificate_from_json(const json& j) {
  graph::GeometryCertificate c;
  c.r1 = j.at("r1").get<double>();
  c.r2 = j.at("r2").get<double>();
  c.r3 = j.at("r3").get<double>();
  c.verified_box = box_from_json(j.at("verified_box"));
  c.grid_pitch = j.value("grid_pitch", 0.0);
  return c;
}

namespace {

std::string kind_name(graph::GraphKind k) {
  switch (k) {
    case graph::GraphKind::lattice_zd: return "lattice_zd";
    case graph::GraphKind::jittered_lattice: return "jittered_lattice";
    case graph::GraphKind::voronoi_points: return "voronoi_points";
  }
  return "?";
}

graph::GraphKind kind_from_name(const std::string& s) {
  if (s == "lattice_zd") return graph::GraphKind::lattice_zd;
  if (s == "jittered_lattice") return graph::GraphKind::jittered_lattice;
  if (s == "voronoi_points") return graph::GraphKind::voronoi_points;
  throw IOError("unknown graph kind: " + s);
}

}  // namespace

json to_json(const graph::GraphSpec& s) {
  json j{{"kind", kind_name(s.kind)},
         {"dim", s.dim},
         {"jitter_amplitude", s.jitter_amplitude},
         {"seed", s.seed},
         {"period_hint", s.period_hint}};
  if (s.window) j["window"] = json{{"lo", s.window->lo}, {"hi", s.window->hi}};
  return j;
}

graph::GraphSpec graph_spec_from_json(const json& j) {
  graph::GraphSpec s;
  s.kind = kind_from_name(j.at("kind").get<std::string>());
  s.dim = j.value("dim", 2);
  s.jitter_amplitude = j.value("jitter_amplitude", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.period_hint = j.value("period_hint", 4);
  if (j.contains("window")) {
    graph::IntBox w;
    w.lo = j["window"].at("lo").get<std::vector<long long>>();
    w.hi = j["window"].at("hi").get<std::vector<long long>>();
    s.window = w;
  }
  return s;
}

json to_json(const energy::EdgeCostFamily& f) {
  return json{{"kind", energy::to_string(f.kind)},
              {"seed", f.seed},
              {"p_min", f.p_min},
              {"p_max", f.p_max},
              {"L", f.lipschitz_L()},
              {"c2", f.growth_c2()}};
}

energy::EdgeCostFamily cost_family_from_json(const json& j) {
  energy::EdgeCostFamily f;
  f.kind = energy::cost_kind_from_string(j.at("kind").get<std::string>());
  f.seed = j.value("seed", std::uint64_t{0});
  f.p_min = j.value("p_min", 1.0);
  f.p_max = j.value("p_max", 1.0);
  return f;
}

json to_json(const measures::AtomicMeasure& m) {
  json atoms = json::array();
  for (const auto& [p, v] : m.atoms) atoms.push_back(json{{"point", p}, {"value", v}});
  return json{{"space_dim", m.space_dim},
              {"value_dim", m.value_dim},
              {"reference_point", m.reference_point},
              {"atoms", atoms}};
}

measures::AtomicMeasure measure_from_json(const json& j) {
  measures::AtomicMeasure m;
  m.space_dim = j.value("space_dim", 2);
  m.value_dim = j.value("value_dim", 1);
  if (j.contains("reference_point")) m.reference_point = j["reference_point"].get<Vec>();
  for (const auto& a : j.at("atoms")) m.add(a.at("point").get<Vec>(), a.at("value").get<Vec>());
  if (m.reference_point.empty()) m.reference_point.assign(m.space_dim, 0.0);
  return m;
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

std::uint64_t fingerprint(const json& j) {
  std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace homflow::io
