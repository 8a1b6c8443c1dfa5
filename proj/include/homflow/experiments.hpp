/// Config-driven experiment runner: f_hom sweeps, W1 convergence of dipole
/// problems, corrector-bound sweeps, uniform-flow operator checks and the
/// registered invariant suite. Outputs are reproducible CSV/JSON tables.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "homflow/cell.hpp"
#include "homflow/json_io.hpp"

namespace homflow::experiments {

struct ExperimentConfig {
  std::string experiment;  // fhom_sweep | w1_convergence | corrector_bounds | operator_check | property_suite
  graph::GraphSpec graph_spec;
  energy::EdgeCostFamily costs;
  std::vector<double> eps_list;        // strictly decreasing
  std::vector<Vec> j_list;             // scalar-species tensors as row vectors
  measures::AtomicMeasure m_plus, m_minus;
  std::vector<std::uint64_t> seeds{1};
  Box region;                          // cell cube / W1 domain
  std::string out_dir;

  static ExperimentConfig from_json(const io::json& j);
  io::json to_json() const;
  void validate() const;
};

struct ResultRow {
  std::string experiment;
  std::string label;  // e.g. the j direction or measure tag
  double eps = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;  // ordered keys keep output bit-stable
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  io::json summary;
  bool pass = true;
  std::uint64_t graph_fingerprint = 0;
  std::uint64_t cost_fingerprint = 0;
};

/// Base graph + certificate + uniform-flow operator sized so that every cell
/// problem over `region` down to `eps_min` has a valid working window.
struct PreparedEnvironment {
  graph::EmbeddedGraph base;
  graph::GeometryCertificate cert;
  uflow::UniformFlowOperator op;
  cell::Environment env;  // pointers into the members above
};

std::unique_ptr<PreparedEnvironment> prepare_environment(const graph::GraphSpec& spec,
                                                         const energy::EdgeCostFamily& costs,
                                                         const Box& region, double eps_min,
                                                         std::uint64_t seed_shift = 0,
                                                         std::uint64_t op_path_noise = 0);

ExperimentResult run(const ExperimentConfig& cfg);
ExperimentResult run_fhom_sweep(const ExperimentConfig& cfg);
ExperimentResult run_w1_convergence(const ExperimentConfig& cfg);
ExperimentResult run_corrector_bounds(const ExperimentConfig& cfg);
ExperimentResult run_operator_check(const ExperimentConfig& cfg);
ExperimentResult run_property_suite(const ExperimentConfig& cfg);

/// CSV (one row per (experiment, eps, seed)) plus a JSON summary; ordering
/// and formatting are deterministic.
void emit_outputs(const ExperimentResult& result, const std::string& out_dir);

/// Nearest-vertex projection of continuum atoms (ties: lowest index),
/// restricted to the largest connected component.
calculus::VertexMeasure project_measure(const graph::RestrictedGraph& g,
                                        const measures::AtomicMeasure& plus,
                                        const measures::AtomicMeasure& minus);

/// Single registered invariant of the property suite.
struct PropertyCheck {
  std::string name;
  bool pass = false;
  double metric = 0;  // residual or ratio, check-specific
};

/// The antisymmetry check on an explicit directed-value table; exposed so
/// the suite's sensitivity can be exercised with a corrupted fixture.
bool antisymmetric_table_ok(const std::vector<std::pair<std::pair<int, int>, double>>& directed,
                            double tol);

std::vector<PropertyCheck> property_checks(const ExperimentConfig& cfg);

}  // namespace homflow::experiments
