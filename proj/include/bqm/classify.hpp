// Discrete solution notions via residual signs. On a positive-type scheme
// the nodal residual sign conditions are the grid analogue of the
// touching-test-function definitions:
//   super-sub: residual >= -tol on group 1, residual <= tol on group 2;
//   sub-super: mirrored; solution: both, i.e. max |residual| <= tol.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bqm/discrete.hpp"

namespace bqm {

enum class Verdict { super_sub, sub_super, solution, neither };

std::string verdict_name(Verdict v);

struct Classification {
  Verdict verdict = Verdict::neither;
  double tol = 0.0;
  // Worst signed residuals per component (minimum and maximum over
  // interior nodes).
  std::vector<double> min_residual;
  std::vector<double> max_residual;

  bool is(Verdict v) const { return verdict == v; }
  /// A solution satisfies both one-sided sign systems.
  bool admits(Verdict v) const {
    if (verdict == v) return true;
    return verdict == Verdict::solution &&
           (v == Verdict::super_sub || v == Verdict::sub_super);
  }
};

Classification classify(const DiscreteSystem& system,
                        const VectorGridFunction& U, double tol);

/// Nodewise (min over group 1, max over group 2); preserves super-sub
/// verdicts under balanced quasi-monotone coupling.
VectorGridFunction lattice_combine_super_sub(const VectorGridFunction& U,
                                             const VectorGridFunction& V);

/// Nodewise (max over group 1, min over group 2); preserves sub-super.
VectorGridFunction lattice_combine_sub_super(const VectorGridFunction& U,
                                             const VectorGridFunction& V);

/// Nodewise infimum over group-1 fields and supremum over group-2 fields
/// of a nonempty family.
VectorGridFunction family_inf_sup(const std::vector<VectorGridFunction>& family);

struct ComparisonReport {
  bool holds = false;
  double tol = 0.0;
  // Worst violation of the expected ordering, one entry per group:
  // group 1 expects u1 <= v1 + tol, group 2 expects v2 <= u2 + tol.
  double worst_group1 = 0.0;  // max over nodes of u1 - v1
  double worst_group2 = 0.0;  // max over nodes of v2 - u2
  int worst_node_group1 = -1;
  int worst_node_group2 = -1;
};

struct MisclassifiedError : Error {
  MisclassifiedError(const std::string& msg, Classification got)
      : Error(msg), classification(std::move(got)) {}
  Classification classification;
};

/// Ordering check of a sub-super function U against a super-sub function V:
/// u1 <= v1 + tol and v2 <= u2 + tol at every node. Inputs are classified
/// first and rejected (MisclassifiedError) if they do not admit the
/// expected verdicts.
ComparisonReport compare_orderings(const DiscreteSystem& system,
                                   const VectorGridFunction& U_sub_super,
                                   const VectorGridFunction& V_super_sub,
                                   double tol);

}  // namespace bqm
