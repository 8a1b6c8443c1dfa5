/// JSON (de)serialization for graphs, certificates, cost families, atomic
/// measures and experiment configs. Graph files store each undirected edge
/// once with u < v.
#pragma once

#include <string>

#include <json.hpp>

#include "homflow/energy.hpp"
#include "homflow/graph.hpp"
#include "homflow/measures.hpp"

namespace homflow::io {

using nlohmann::json;

json to_json(const graph::EmbeddedGraph& g);
graph::EmbeddedGraph graph_from_json(const json& j);

json to_json(const graph::GeometryCertificate& c);
graph::GeometryCertificate certificate_from_json(const json& j);

json to_json(const graph::GraphSpec& s);
graph::GraphSpec graph_spec_from_json(const json& j);

json to_json(const energy::EdgeCostFamily& f);
energy::EdgeCostFamily cost_family_from_json(const json& j);

json to_json(const measures::AtomicMeasure& m);
measures::AtomicMeasure measure_from_json(const json& j);

json box_to_json(const Box& b);
Box box_from_json(const json& j);

json load_file(const std::string& path);
void save_file(const std::string& path, const json& j);

/// 64-bit FNV-1a of the canonical JSON serialization; used to fingerprint
/// graph and cost specs in result tables.
std::uint64_t fingerprint(const json& j);

}  // namespace homflow::io
