// Barrier construction for the competitive family: the four auxiliary
// scalar problems
//   ubar:   -lap u + lambda u - f = 0
//   vunder: -lap v + lambda v + beta  max(ubar, v) - g = 0
//   vbar:   -lap v + lambda v - g = 0
//   uunder: -lap u + lambda u + alpha max(u, vbar) - f = 0
// assembled into a verified pair z = (ubar, vunder) (super-sub) and
// w = (uunder, vbar) (sub-super) with z1 >= w1 and z2 <= w2.
#pragma once

#include <vector>

#include "bqm/classify.hpp"
#include "bqm/discrete.hpp"
#include "bqm/grid.hpp"

namespace bqm {

/// Solves the positive-type system (-lap + lambda) u = data with constant
/// Dirichlet datum on the grid boundary. Direct sparse solve plus
/// iterative refinement; final interior residual is required to be
/// <= 1e-12 in the max norm. `data` holds one value per grid node.
std::vector<double> solve_scalar_linear(const Grid& grid, double lambda,
                                        const std::vector<double>& data,
                                        double datum = 0.0);

struct SemilinearResult {
  std::vector<double> field;
  int policies = 0;        // policy-improvement steps used
  double residual = 0.0;   // final max-norm nodal residual
};

/// Solves (-lap + lambda) v + weight * max(frozen, v) = data by policy
/// iteration over the active set of the max term. Each policy fixes, per
/// node, whether the max picks the unknown or the frozen value; each step
/// is one sparse M-matrix solve; iteration stops when the policy repeats.
SemilinearResult solve_scalar_semilinear(const Grid& grid, double lambda,
                                         double weight,
                                         const std::vector<double>& frozen,
                                         const std::vector<double>& data,
                                         double datum = 0.0,
                                         int max_policy_iterations = 100);

struct BarrierPair {
  VectorGridFunction z;  // super-sub candidate (ubar, vunder)
  VectorGridFunction w;  // sub-super candidate (uunder, vbar)
  Classification z_class;
  Classification w_class;
  bool ordering_verified = false;
  int policies_z2 = 0;  // policy steps used for the z group-2 field
  int policies_w1 = 0;  // policy steps used for the w group-1 field
};

/// Runs the four-solve recipe on a discretized competitive operator and
/// verifies classifications and orderings. Throws with a detailed report
/// if any verification fails.
BarrierPair build_barriers(const DiscreteSystem& system, double tol = 1e-8);

/// Convenience overload discretizing first.
BarrierPair build_barriers(const OperatorSpec& spec, GridPtr grid,
                           double tol = 1e-8);

/// Validates externally supplied barrier fields (classification plus
/// orderings); used for user-defined operators where no recipe exists.
BarrierPair verify_barriers(const DiscreteSystem& system, VectorGridFunction z,
                            VectorGridFunction w, double tol = 1e-8);

}  // namespace bqm
