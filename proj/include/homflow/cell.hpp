/// Cell problems for the homogenized energy density: representative classes
/// with Dirichlet-type boundary pins, the constrained minimization
/// f_{eps,R}(j, A), scaling identities, the f_hom estimator, and the
/// two-step procedure that turns an arbitrary field into a representative
/// (boundary value correction + divergence correction).
#pragma once

#include <map>
#include <memory>
#include <vector>

#include "homflow/correctors.hpp"
#include "homflow/energy.hpp"
#include "homflow/flow_solver.hpp"
#include "homflow/uniform_flow.hpp"

namespace homflow::cell {

/// Everything needed to set up cell problems on one random environment.
struct Environment {
  const graph::EmbeddedGraph* base = nullptr;
  const uflow::UniformFlowOperator* op = nullptr;
  graph::GeometryCertificate cert;
  energy::EdgeCostFamily family;
  double r_lip = 0;  // defaults to cert.r3 when <= 0
  double effective_r_lip() const { return r_lip > 0 ? r_lip : cert.r3; }
  double r_partial() const { return std::max(effective_r_lip(), cert.r3); }
};

struct RepresentativeSet {
  std::shared_ptr<graph::RestrictedGraph> graph;   // working window around A
  std::shared_ptr<energy::LocalizedEnergy> energy;
  const uflow::UniformFlowOperator* op = nullptr;
  Tensor j;
  Region localization;  // A as a region (one box for the standard variant)
  Box region;           // bounding box of A
  double eps = 1;
  double r_partial = 0;
  calculus::DiscreteField canonical;  // R_eps j, always a member
  std::map<int, Vec> pins;            // edges within eps * R_partial of A^c
  std::vector<bool> constrained;      // vertices with complete stars
  int num_free_edges = 0;

  bool is_member(const calculus::DiscreteField& J, double div_tol = 1e-10,
                 double pin_tol = 1e-12) const;
  solver::FlowProblem flow_problem() const;
};

RepresentativeSet make_representative_set(const Environment& env, const Tensor& j, const Box& A,
                                          double eps);

/// Variant for a disjoint union of boxes (used by the subadditivity check);
/// boxes must be separated by more than 2 eps R_partial so that the
/// per-box distance-to-complement matches the union's.
RepresentativeSet make_representative_set_union(const Environment& env, const Tensor& j,
                                                const std::vector<Box>& boxes, double eps);

struct CellValue {
  Tensor j;
  Box region;
  double eps = 1;
  double value = 0;
  solver::SolveStatus status = solver::SolveStatus::infeasible;
  calculus::DiscreteField minimizer;
};

/// f_{eps,R}(j, A): delegates to the convex engine when the family is
/// convex (certified optimum), otherwise to the heuristic (upper value).
CellValue cell_value(const RepresentativeSet& rs, std::uint64_t seed = 1);

/// Integral of a representative over A; identical across all members.
std::vector<double> representative_mass(const RepresentativeSet& rs,
                                        const calculus::DiscreteField& J);

/// Both sides of f_{eps,R}(j, A) = eps^d f_{1,R}(j, A/eps).
std::pair<double, double> scaling_check(const Environment& env, const Tensor& j, const Box& A,
                                        double eps);

struct HomEstimate {
  Tensor j;
  std::vector<double> eps_list;
  std::vector<double> values;  // per-volume cell values
  double fhom = 0;             // affine-in-eps extrapolation at eps = 0
  double slope = 0;
  double fit_residual = 0;     // max |fit - value|
  bool certified = true;       // false when any level used the heuristic engine
  std::uint64_t operator_fingerprint = 0;
};

HomEstimate estimate_fhom(const Environment& env, const Tensor& j,
                          const std::vector<double>& eps_list, const Box& A,
                          std::uint64_t seed = 1);

struct FhomProperties {
  double min_growth_slack = 0;      // min over grid of fhom(j) - c2 |j|
  double max_lipschitz_ratio = 0;   // max |f(j)-f(j')| / |j-j'|
  double max_triangle_excess = 0;   // 1-homogeneous families
  double max_midpoint_excess = 0;   // convexity along sampled segments
  double max_symmetry_gap = 0;
  bool pass = false;
};

/// Sanity properties of a grid of estimates (growth, Lipschitz, and for
/// scalar 1-homogeneous costs the norm axioms). Pairwise checks use
/// whatever sums/midpoints/negations exist in the grid.
FhomProperties fhom_properties_check(const std::vector<HomEstimate>& grid, double c2,
                                     double lipschitz_bound, double tol);

struct EnforceReport {
  calculus::DiscreteField result;  // a member of Rep_{eps,R}(j; A)
  double energy_before = 0;
  double energy_after = 0;
  double energy_increase = 0;
  double err_divergence = 0;   // (1/eta)   ||dive iota J||_KR~(A)
  double err_boundary = 0;     // (1/eta^2) ||iota (J - R_eps j)||_KR~(A)
  double err_cutoff = 0;       // sqrt(eta) ((1+|j|) vol + |iota J|(A))
  double err_scale = 0;        // eps (|j| vol + |dive iota J|(A) + |iota J|(A)/eta)
  double err_total = 0;
  double eta = 0;
};

/// Boundary value correction (cutoff blend with the canonical uniform flow)
/// followed by divergence correction (corrector for -DIVE of the blend).
/// `eta` is the relative cutoff width; must satisfy the admissible window
/// or EtaOutOfRange is thrown.
EnforceReport enforce_representative(const Environment& env, const RepresentativeSet& rs,
                                     const calculus::DiscreteField& J, double eta);

}  // namespace homflow::cell
