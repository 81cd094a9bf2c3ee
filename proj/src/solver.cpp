#include "bqm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace bqm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct NodalCounters {
  long sandwich = 0;
};

// Root of the nodal residual t -> F_c(..., t, ...) on [lo, hi]. The
// residual is increasing in t on positive-type systems. Built-in
// couplings yield an affine equation with at most one kink, whose root
// each branch gives directly; generic couplings are solved by bisection
// accelerated with Illinois-damped secant steps. Either way the sandwich
// endpoints act as safeguards and escapes beyond the slack are counted.
double solve_nodal(const DiscreteSystem& sys, const VectorGridFunction& U,
                   int comp, int node, double lo, double hi, double slack,
                   int max_iter, NodalCounters& counters) {
  if (hi <= lo) return lo;

  const double diag_scale =
      sys.spatial_diag(comp)[static_cast<std::size_t>(node)] +
      sys.own_slope_max(comp);
  const double mag =
      diag_scale * std::max(std::abs(lo), std::abs(hi)) +
      std::abs(sys.data(comp)[static_cast<std::size_t>(node)]);
  const double f_tol = 4.0 * kEps * mag;

  const auto eq = sys.nodal_equation(U, comp, node);

  // Fast path: the current value may already solve its equation.
  const double cur = U.value(comp, node);
  const double fcur = eq(cur);
  if (std::abs(fcur) <= f_tol) return cur;

  const auto structural_failure = [&]() -> Error {
    std::ostringstream os;
    os << "perron solve: nodal equation for component " << comp << " at node "
       << node << " is not increasing over the sandwich interval [" << lo
       << ", " << hi << "]; run the structural condition checks";
    return Error(os.str());
  };

  if (eq.sys == nullptr) {
    if (!(eq.lin > 0.0) || (eq.has_kink && !(eq.lin + eq.gain > 0.0)))
      throw structural_failure();
    double root;
    if (!eq.has_kink) {
      root = -eq.cst / eq.lin;
    } else {
      const double at_kink = (eq.lin + eq.gain) * eq.partner + eq.cst;
      root = at_kink > 0.0 ? -(eq.cst + eq.gain * eq.partner) / eq.lin
                           : -eq.cst / (eq.lin + eq.gain);
    }
    const double vslack = slack * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (root < lo - vslack || root > hi + vslack) ++counters.sandwich;
    return std::min(std::max(root, lo), hi);
  }

  double a = lo;
  double b = hi;
  double fa = (cur == lo) ? fcur : eq(lo);
  double fb = (cur == hi) ? fcur : eq(hi);

  if (fa > 0.0 && fb < 0.0) throw structural_failure();
  const double escape_tol = slack * std::max(diag_scale, 1.0);
  if (fa >= 0.0) {
    // Root at or below the lower barrier.
    if (fa > escape_tol) ++counters.sandwich;
    return a;
  }
  if (fb <= 0.0) {
    if (-fb > escape_tol) ++counters.sandwich;
    return b;
  }

  // fa < 0 < fb: Illinois iteration.
  int side = 0;
  double t = cur;
  for (int it = 0; it < max_iter; ++it) {
    t = (a * fb - b * fa) / (fb - fa);
    if (!(t > a && t < b)) t = 0.5 * (a + b);
    const double ft = eq(t);
    if (std::abs(ft) <= f_tol) return t;
    if (ft > 0.0) {
      b = t;
      fb = ft;
      if (side == +1) fa *= 0.5;
      side = +1;
    } else {
      a = t;
      fa = ft;
      if (side == -1) fb *= 0.5;
      side = -1;
    }
    if (b - a <= 2.0 * kEps * std::max({std::abs(a), std::abs(b), 1e-300}))
      return t;
  }
  return t;
}

std::pair<VectorGridFunction, SolveReport> sandwich_sweep_solve(
    const DiscreteSystem& system, const BarrierPair& barriers,
    const SolveConfig& cfg, bool primal) {
  cfg.validate();
  detail::require(barriers.ordering_verified,
                  "perron solve: barriers must be ordering-verified");
  detail::require(barriers.z.grid_ptr().get() == &system.grid() &&
                      barriers.z.partition() == system.partition(),
                  "perron solve: barriers do not match the system");

  const auto t0 = std::chrono::steady_clock::now();
  const Partition& part = system.partition();
  const auto& interior = system.grid().interior();

  VectorGridFunction U = primal ? barriers.z : barriers.w;
  SolveReport rep;
  NodalCounters counters;

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (int node : interior) {
      for (int c = 0; c < part.m(); ++c) {
        // Sandwich interval with group orientation: group-1 values live in
        // [w1, z1], group-2 values in [z2, w2].
        const bool g1 = part.is_group1(c);
        const double lo =
            g1 ? barriers.w.value(c, node) : barriers.z.value(c, node);
        const double hi =
            g1 ? barriers.z.value(c, node) : barriers.w.value(c, node);
        const double old = U.value(c, node);
        const double t =
            solve_nodal(system, U, c, node, std::min(lo, hi), std::max(lo, hi),
                        cfg.monotonicity_slack, cfg.nodal_max_iterations,
                        counters);
        // Primal flow: group 1 descends, group 2 ascends. Dual mirrored.
        const bool against_flow = (g1 == primal) ? (t > old + cfg.monotonicity_slack)
                                                 : (t < old - cfg.monotonicity_slack);
        if (against_flow) ++rep.monotonicity_violations;
        U.value(c, node) = t;
      }
    }
    const double norm = system.residual(U).max_abs();
    rep.residual_history.push_back(norm);
    rep.sweeps = sweep;
    if (cfg.snapshot_interval > 0 && sweep % cfg.snapshot_interval == 0)
      rep.snapshots.emplace_back(sweep, U);
    if (norm <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }

  rep.sandwich_violations = counters.sandwich;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(U), std::move(rep)};
}

}  // namespace

std::pair<VectorGridFunction, SolveReport> perron_solve(
    const DiscreteSystem& system, const BarrierPair& barriers,
    const SolveConfig& cfg) {
  return sandwich_sweep_solve(system, barriers, cfg, /*primal=*/true);
}

std::pair<VectorGridFunction, SolveReport> perron_solve_dual(
    const DiscreteSystem& system, const BarrierPair& barriers,
    const SolveConfig& cfg) {
  return sandwich_sweep_solve(system, barriers, cfg, /*primal=*/false);
}

std::pair<VectorGridFunction, SolveReport> pseudo_time_oracle(
    const DiscreteSystem& system, const VectorGridFunction& U0, double step,
    double tol, int max_steps) {
  detail::require(step > 0.0, "pseudo_time_oracle: step must be > 0");
  detail::require(tol > 0.0, "pseudo_time_oracle: tol must be > 0");
  detail::require(max_steps >= 0, "pseudo_time_oracle: max_steps must be >= 0");
  const double bound = step * system.max_nodal_slope();
  if (bound > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "pseudo_time_oracle: step " << step
       << " violates the stability bound (step * max diagonal weight = "
       << bound << " > 1)";
    throw Error(os.str());
  }

  const auto t0 = std::chrono::steady_clock::now();
  const Partition& part = system.partition();
  const auto& interior = system.grid().interior();

  VectorGridFunction U = U0;
  SolveReport rep;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= max_steps; ++k) {
    const ResidualField res = system.residual(U);
    const double norm = res.max_abs();
    rep.residual_history.push_back(norm);
    rep.sweeps = k;
    if (norm <= tol) {
      rep.converged = true;
      break;
    }
    if (norm > 10.0 * best) {
      std::ostringstream os;
      os << "pseudo_time_oracle: diverging after " << k
         << " steps (residual " << norm << " vs best " << best << ")";
      throw OracleDivergence(os.str(), rep.residual_history);
    }
    best = std::min(best, norm);
    if (k == max_steps) break;

    // Whole-field explicit update. Group-1 values move against their
    // residual sign; so do group-2 values, whose monotone orientation
    // flips both the value direction and the residual sign, leaving the
    // plain descent formula for every component.
    for (int c = 0; c < part.m(); ++c)
      for (std::size_t i = 0; i < interior.size(); ++i)
        U.value(c, interior[i]) -= step * res.value(c, static_cast<int>(i));
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(U), std::move(rep)};
}

}  // namespace bqm
