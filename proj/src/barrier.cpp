#include "bqm/barrier.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bqm {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct InteriorMap {
  std::vector<int> index;  // node -> interior index or -1
  explicit InteriorMap(const Grid& grid)
      : index(static_cast<std::size_t>(grid.total_nodes()), -1) {
    const auto& ids = grid.interior();
    for (std::size_t k = 0; k < ids.size(); ++k)
      index[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);
  }
};

// Assembles (-lap + lambda + extra_diag) over interior unknowns.
// Boundary neighbors contribute datum * (1/h^2) to the right-hand side.
// Rows are scaled to unit diagonal: the raw stencil scale 1/h^2 would put
// an absolute 1e-12 residual target at the rounding noise floor already
// for a few hundred nodes per axis.
struct HelmholtzSystem {
  SpMat A;
  Vec rhs;                    // data part + boundary lift, scaled
  std::vector<double> scale;  // per-row factor applied to the equation

  HelmholtzSystem(const Grid& grid, const InteriorMap& map, double lambda,
                  const std::vector<double>& data, double datum) {
    const int n = static_cast<int>(grid.interior().size());
    const int dim = grid.dim();
    std::array<double, 2> w{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      const double inv = 1.0 / grid.spacing(a);
      w[static_cast<std::size_t>(a)] = inv * inv;
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n * (1 + 2 * dim)));
    rhs = Vec::Zero(n);
    scale.assign(static_cast<std::size_t>(n), 1.0);
    for (int row = 0; row < n; ++row) {
      const int node = grid.interior()[static_cast<std::size_t>(row)];
      double diag = lambda;
      for (int a = 0; a < dim; ++a) diag += 2.0 * w[static_cast<std::size_t>(a)];
      const double sc = 1.0 / diag;
      scale[static_cast<std::size_t>(row)] = sc;
      for (int a = 0; a < dim; ++a) {
        const double wa = w[static_cast<std::size_t>(a)];
        for (int dir : {-1, +1}) {
          const int nbr = grid.neighbor(node, a, dir);
          const int col = map.index[static_cast<std::size_t>(nbr)];
          if (col >= 0)
            trips.emplace_back(row, col, -wa * sc);
          else
            rhs[row] += wa * sc * datum;
        }
      }
      trips.emplace_back(row, row, 1.0);
      rhs[row] += data[static_cast<std::size_t>(node)] * sc;
    }
    A.resize(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
  }
};

// Direct solve with iterative refinement down to ~1e-13 absolute residual.
Vec refined_solve(const SpMat& A, const Eigen::SparseLU<SpMat>& lu,
                  const Vec& b) {
  Vec x = lu.solve(b);
  for (int pass = 0; pass < 4; ++pass) {
    const Vec r = b - A * x;
    if (r.lpNorm<Eigen::Infinity>() <= 5e-13) break;
    x += lu.solve(r);
  }
  return x;
}

std::vector<double> scatter(const Grid& grid, const Vec& interior_values,
                            double datum) {
  std::vector<double> out(static_cast<std::size_t>(grid.total_nodes()), datum);
  const auto& ids = grid.interior();
  for (std::size_t k = 0; k < ids.size(); ++k)
    out[static_cast<std::size_t>(ids[k])] =
        interior_values[static_cast<Eigen::Index>(k)];
  return out;
}

}  // namespace

std::vector<double> solve_scalar_linear(const Grid& grid, double lambda,
                                        const std::vector<double>& data,
                                        double datum) {
  detail::require(lambda > 0.0, "solve_scalar_linear: lambda must be > 0");
  detail::require(data.size() == static_cast<std::size_t>(grid.total_nodes()),
                  "solve_scalar_linear: data must hold one value per node");
  const InteriorMap map(grid);
  const HelmholtzSystem sys(grid, map, lambda, data, datum);

  Eigen::SparseLU<SpMat> lu;
  lu.compute(sys.A);
  detail::require(lu.info() == Eigen::Success,
                  "solve_scalar_linear: factorization failed");
  const Vec x = refined_solve(sys.A, lu, sys.rhs);
  const double res = (sys.rhs - sys.A * x).lpNorm<Eigen::Infinity>();
  if (!(res <= 1e-12)) {
    std::ostringstream os;
    os << "solve_scalar_linear: residual " << res << " above 1e-12";
    throw Error(os.str());
  }
  return scatter(grid, x, datum);
}

SemilinearResult solve_scalar_semilinear(const Grid& grid, double lambda,
                                         double weight,
                                         const std::vector<double>& frozen,
                                         const std::vector<double>& data,
                                         double datum,
                                         int max_policy_iterations) {
  detail::require(lambda > 0.0, "solve_scalar_semilinear: lambda must be > 0");
  detail::require(weight >= 0.0,
                  "solve_scalar_semilinear: coupling weight must be >= 0");
  detail::require(frozen.size() == static_cast<std::size_t>(grid.total_nodes()),
                  "solve_scalar_semilinear: frozen field size mismatch");
  detail::require(data.size() == static_cast<std::size_t>(grid.total_nodes()),
                  "solve_scalar_semilinear: data size mismatch");

  const InteriorMap map(grid);
  const HelmholtzSystem base(grid, map, lambda, data, datum);
  const int n = static_cast<int>(grid.interior().size());

  // Policy: per interior node, 1 if the max picks the unknown, 0 if it
  // picks the frozen value. Each policy yields one M-matrix solve.
  std::vector<std::uint8_t> policy(static_cast<std::size_t>(n), 1);
  std::vector<std::uint8_t> previous;
  Vec x = Vec::Zero(n);

  int steps = 0;
  for (; steps < max_policy_iterations; ++steps) {
    SpMat A = base.A;
    Vec rhs = base.rhs;
    for (int row = 0; row < n; ++row) {
      const double sc = base.scale[static_cast<std::size_t>(row)];
      if (policy[static_cast<std::size_t>(row)]) {
        A.coeffRef(row, row) += weight * sc;
      } else {
        const int node = grid.interior()[static_cast<std::size_t>(row)];
        rhs[row] -= weight * sc * frozen[static_cast<std::size_t>(node)];
      }
    }
    A.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    detail::require(lu.info() == Eigen::Success,
                    "solve_scalar_semilinear: factorization failed");
    x = refined_solve(A, lu, rhs);

    std::vector<std::uint8_t> next(static_cast<std::size_t>(n));
    for (int row = 0; row < n; ++row) {
      const int node = grid.interior()[static_cast<std::size_t>(row)];
      next[static_cast<std::size_t>(row)] =
          x[row] >= frozen[static_cast<std::size_t>(node)] ? 1 : 0;
    }
    if (next == policy) {
      ++steps;
      break;
    }
    previous = policy;
    policy = next;
    if (steps + 1 == max_policy_iterations) {
      std::ostringstream os;
      os << "solve_scalar_semilinear: no stable policy after "
         << max_policy_iterations << " iterations; last two policies: [";
      for (auto b : previous) os << int(b);
      os << "] -> [";
      for (auto b : policy) os << int(b);
      os << "]";
      throw Error(os.str());
    }
  }

  SemilinearResult out;
  out.field = scatter(grid, x, datum);
  out.policies = steps;

  // Verify the semilinear residual directly (max term, not the policy).
  double worst = 0.0;
  std::array<double, 2> w2{0.0, 0.0};
  for (int a = 0; a < grid.dim(); ++a) {
    const double inv = 1.0 / grid.spacing(a);
    w2[static_cast<std::size_t>(a)] = inv * inv;
  }
  for (int node : grid.interior()) {
    const auto nn = static_cast<std::size_t>(node);
    double acc = lambda * out.field[nn] +
                 weight * std::max(frozen[nn], out.field[nn]) - data[nn];
    for (int a = 0; a < grid.dim(); ++a) {
      const double ul =
          out.field[static_cast<std::size_t>(grid.neighbor(node, a, -1))];
      const double ur =
          out.field[static_cast<std::size_t>(grid.neighbor(node, a, +1))];
      acc += w2[static_cast<std::size_t>(a)] * (2.0 * out.field[nn] - ul - ur);
    }
    worst = std::max(worst, std::abs(acc));
  }
  out.residual = worst;
  if (!(worst <= 1e-10)) {
    std::ostringstream os;
    os << "solve_scalar_semilinear: final nodal residual " << worst
       << " above 1e-10";
    throw Error(os.str());
  }
  return out;
}

namespace {

std::string classification_message(const char* which, const Classification& cl) {
  std::ostringstream os;
  os << which << " classified as " << verdict_name(cl.verdict) << " at tol "
     << cl.tol << "; per-component residual ranges:";
  for (std::size_t c = 0; c < cl.min_residual.size(); ++c)
    os << " [" << cl.min_residual[c] << ", " << cl.max_residual[c] << "]";
  return os.str();
}

}  // namespace

BarrierPair build_barriers(const DiscreteSystem& system, double tol) {
  const OperatorSpec& spec = system.spec();
  detail::require(spec.name() == "competitive",
                  "build_barriers: recipe exists only for the competitive "
                  "family; supply explicit barriers otherwise");
  detail::require(system.dirichlet() >= 0.0,
                  "build_barriers: Dirichlet datum must be >= 0");
  const double lambda = spec.param("lambda");
  const double alpha = spec.param("alpha");
  const double beta = spec.param("beta");
  const Grid& grid = system.grid();

  const std::vector<double> f(system.data(0).begin(), system.data(0).end());
  const std::vector<double> g(system.data(1).begin(), system.data(1).end());
  for (int node : grid.interior()) {
    const auto nn = static_cast<std::size_t>(node);
    detail::require(f[nn] >= 0.0 && g[nn] >= 0.0,
                    "build_barriers: data must be nonnegative at grid nodes");
  }
  const double datum = system.dirichlet();

  const std::vector<double> ubar = solve_scalar_linear(grid, lambda, f, datum);
  const std::vector<double> vbar = solve_scalar_linear(grid, lambda, g, datum);
  const SemilinearResult vunder =
      solve_scalar_semilinear(grid, lambda, beta, ubar, g, datum);
  const SemilinearResult uunder =
      solve_scalar_semilinear(grid, lambda, alpha, vbar, f, datum);

  BarrierPair pair{
      VectorGridFunction(system.grid_ptr(), spec.partition(), datum),
      VectorGridFunction(system.grid_ptr(), spec.partition(), datum),
      {},
      {},
      false,
      vunder.policies,
      uunder.policies};
  for (int node = 0; node < grid.total_nodes(); ++node) {
    const auto nn = static_cast<std::size_t>(node);
    pair.z.value(0, node) = ubar[nn];
    pair.z.value(1, node) = vunder.field[nn];
    pair.w.value(0, node) = uunder.field[nn];
    pair.w.value(1, node) = vbar[nn];
  }

  pair.z_class = classify(system, pair.z, tol);
  if (!pair.z_class.admits(Verdict::super_sub))
    throw Error("build_barriers: " +
                classification_message("(ubar, vunder)", pair.z_class));
  pair.w_class = classify(system, pair.w, tol);
  if (!pair.w_class.admits(Verdict::sub_super))
    throw Error("build_barriers: " +
                classification_message("(uunder, vbar)", pair.w_class));

  const double slack = 1e-12;
  for (int node = 0; node < grid.total_nodes(); ++node) {
    const auto nn = static_cast<std::size_t>(node);
    if (ubar[nn] < uunder.field[nn] - slack ||
        vbar[nn] < vunder.field[nn] - slack) {
      std::ostringstream os;
      os << "build_barriers: ordering violated at node " << node << ": ubar="
         << ubar[nn] << " uunder=" << uunder.field[nn] << " vbar=" << vbar[nn]
         << " vunder=" << vunder.field[nn];
      throw Error(os.str());
    }
  }
  pair.ordering_verified = true;
  return pair;
}

BarrierPair build_barriers(const OperatorSpec& spec, GridPtr grid, double tol) {
  return build_barriers(DiscreteSystem::build(spec, std::move(grid)), tol);
}

BarrierPair verify_barriers(const DiscreteSystem& system, VectorGridFunction z,
                            VectorGridFunction w, double tol) {
  detail::require(z.same_shape(w), "verify_barriers: shape mismatch");
  detail::require(z.grid_ptr().get() == &system.grid(),
                  "verify_barriers: fields live on a different grid");

  BarrierPair pair{std::move(z), std::move(w), {}, {}, false, 0, 0};
  pair.z_class = classify(system, pair.z, tol);
  if (!pair.z_class.admits(Verdict::super_sub))
    throw Error("verify_barriers: " +
                classification_message("supplied z", pair.z_class));
  pair.w_class = classify(system, pair.w, tol);
  if (!pair.w_class.admits(Verdict::sub_super))
    throw Error("verify_barriers: " +
                classification_message("supplied w", pair.w_class));

  const Partition& part = system.partition();
  const double slack = 1e-12;
  for (int c = 0; c < part.m(); ++c) {
    for (int node = 0; node < system.grid().total_nodes(); ++node) {
      const double zz = pair.z.value(c, node);
      const double ww = pair.w.value(c, node);
      const bool ok = part.is_group1(c) ? zz >= ww - slack : zz <= ww + slack;
      if (!ok) {
        std::ostringstream os;
        os << "verify_barriers: sandwich ordering violated for component " << c
           << " at node " << node << " (z=" << zz << ", w=" << ww << ")";
        throw Error(os.str());
      }
    }
  }
  pair.ordering_verified = true;
  return pair;
}

}  // namespace bqm
