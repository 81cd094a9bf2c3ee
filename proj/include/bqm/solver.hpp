// Constructive sandwich iteration between the two barriers: nodal
// Gauss-Seidel relaxation that solves each component's scalar nodal
// equation with everything else frozen, clamped into the barrier sandwich
// with group orientation. The primal run descends from the super-sub
// barrier (group 1 non-increasing, group 2 non-decreasing); the dual run
// ascends from the sub-super barrier. A whole-field explicit pseudo-time
// iteration serves as an independent oracle.
#pragma once

#include <utility>
#include <vector>

#include "bqm/barrier.hpp"
#include "bqm/classify.hpp"
#include "bqm/discrete.hpp"

namespace bqm {

struct SolveConfig {
  double tol = 1e-8;              // residual max-norm convergence target
  int max_sweeps = 10000;
  double monotonicity_slack = 1e-12;
  int snapshot_interval = 0;      // record the iterate every k sweeps (0 = off)
  int nodal_max_iterations = 60;  // safeguarded bisection cap per nodal solve

  void validate() const {
    detail::require(tol > 0.0, "SolveConfig: tol must be > 0");
    detail::require(max_sweeps >= 1, "SolveConfig: max_sweeps must be >= 1");
    detail::require(monotonicity_slack >= 0.0,
                    "SolveConfig: monotonicity_slack must be >= 0");
    detail::require(nodal_max_iterations >= 8,
                    "SolveConfig: nodal_max_iterations must be >= 8");
  }
};

struct SolveReport {
  bool converged = false;
  int sweeps = 0;
  std::vector<double> residual_history;  // max-norm after each sweep
  long monotonicity_violations = 0;  // group-oriented moves against the flow
  long sandwich_violations = 0;      // nodal roots escaping the sandwich
  double wall_seconds = 0.0;
  std::vector<std::pair<int, VectorGridFunction>> snapshots;
};

/// Descends from barriers.z toward the solution. The converged iterate
/// classifies as a solution at cfg.tol and stays inside the sandwich at
/// every sweep.
std::pair<VectorGridFunction, SolveReport> perron_solve(
    const DiscreteSystem& system, const BarrierPair& barriers,
    const SolveConfig& cfg);

/// Mirrored run ascending from barriers.w; agreement with the primal run
/// is uniqueness evidence when the comparison conditions hold.
std::pair<VectorGridFunction, SolveReport> perron_solve_dual(
    const DiscreteSystem& system, const BarrierPair& barriers,
    const SolveConfig& cfg);

/// Thrown when the pseudo-time iteration drifts away from the solution.
struct OracleDivergence : Error {
  OracleDivergence(const std::string& msg, std::vector<double> hist)
      : Error(msg), history(std::move(hist)) {}
  std::vector<double> history;
};

/// Explicit whole-field iteration U <- U - step * residual(U); entirely
/// independent of the sweep machinery. `step` must satisfy
/// step * max_nodal_slope <= 1.
std::pair<VectorGridFunction, SolveReport> pseudo_time_oracle(
    const DiscreteSystem& system, const VectorGridFunction& U0, double step,
    double tol, int max_steps);

}  // namespace bqm
