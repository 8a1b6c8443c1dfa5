/// Self-contained dense two-phase primal simplex. Used for the measures
/// dual LPs and as the independent LP oracle in the acceptance suite.
#pragma once

#include <vector>

#include "homflow/common.hpp"

namespace homflow::simplex {

enum class Relation { le, ge, eq };

struct Constraint {
  std::vector<double> coeffs;  // dense over variables
  Relation rel;
  double rhs;
};

struct LinearProgram {
  int num_vars = 0;
  bool maximize = false;
  std::vector<double> objective;  // length num_vars
  std::vector<Constraint> constraints;
  // Variables are nonnegative by default; list indices here to make them free
  // (internally split into positive and negative parts).
  std::vector<int> free_vars;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0;
  std::vector<double> x;
};

/// Two-phase simplex with Bland's rule fallback for anti-cycling.
LpResult solve(const LinearProgram& lp);

}  // namespace homflow::simplex
