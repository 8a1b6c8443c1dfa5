/// Uniform-flow operators: for each lattice cell z an anchor vertex and a
/// catalogue path to the anchor of z + e_i; the induced linear map sends a
/// constant tensor j to a divergence-free field whose embeddings converge
/// to j * Lebesgue with uniform mass bounds on orthotopes.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "homflow/calculus.hpp"
#include "homflow/graph.hpp"

namespace homflow::uflow {

struct UniformFlowOperator {
  const graph::EmbeddedGraph* base = nullptr;
  int dim = 0;
  graph::IntBox window;
  std::map<std::vector<long long>, int> anchors;  // z -> vertex index

  struct CatalogueEntry {
    std::vector<long long> z;
    int axis;
    std::vector<int> path;
    double length = 0;
    bool too_long = false;
  };
  std::vector<CatalogueEntry> catalogue;

  /// Integer path-multiplicity coefficients: R j = sum_i coeff_i * (j e_i),
  /// stored per base edge in canonical orientation. Integer exactness makes
  /// the interior divergence-free property checkable without float error.
  std::vector<std::vector<long long>> coeff;  // [axis][base edge]

  double ell = 0;               // path length budget R2 (2 R1 + 1) + 1
  double interior_margin = 0;   // depth from the window box within which DIVE may be nonzero
  int num_too_long = 0;
  std::uint64_t fingerprint = 0;
  double bound_constant = 0;    // filled by verify_boundedness

  /// Net integer divergence per basis direction at a base vertex.
  long long integer_divergence(int axis, int vertex) const;
  /// Geometric window box (real coordinates of the integer window).
  Box window_box() const;
};

/// Build per the constructive existence proof: anchors are nearest vertices
/// to lattice points (ties: lowest index), catalogue paths are shortest
/// paths between neighboring anchors. `path_noise_seed != 0` perturbs the
/// path search weights to produce a distinct valid catalogue (used for
/// operator-independence tests); paths longer than ell are flagged, not fatal.
UniformFlowOperator build(const graph::EmbeddedGraph& g, const graph::GeometryCertificate& cert,
                          const graph::IntBox& window, std::uint64_t path_noise_seed = 0);

/// R j as a field on `rg` (a restriction of the operator's base graph, any
/// epsilon): R_eps j(eps x, eps y) = eps^{d-1} R j(x, y).
calculus::DiscreteField apply_rescaled(const UniformFlowOperator& op, const Tensor& j,
                                       const graph::RestrictedGraph& rg);

/// apply at unit scale (rg must have epsilon = 1).
calculus::DiscreteField apply(const UniformFlowOperator& op, const Tensor& j,
                              const graph::RestrictedGraph& rg);

struct ConvergenceRow {
  double eps;
  double pairing_error;  // | <iota_eps R_eps j, phi> - j * integral(phi) |_F
};

/// Pairs iota_eps R_eps j against a C^1_c test function across eps levels.
/// `phi_integral` is the reference value of integral(phi dx).
std::vector<ConvergenceRow> verify_convergence(const UniformFlowOperator& op, const Tensor& j,
                                               const std::function<double(const Vec&)>& phi,
                                               double phi_integral,
                                               const std::vector<double>& eps_list);

struct BoundednessReport {
  double constant = 0;  // max over orthotopes of |iota R j|(Q) / (|j| vol(Q))
  std::vector<double> per_box;
};

BoundednessReport verify_boundedness(const UniformFlowOperator& op, const Tensor& j,
                                     const std::vector<Box>& orthotopes, double eps);

}  // namespace homflow::uflow
