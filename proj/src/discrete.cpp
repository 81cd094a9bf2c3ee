#include "bqm/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bqm {

ResidualField::ResidualField(GridPtr grid, Partition part)
    : grid_(std::move(grid)), part_(part) {
  vals_.assign(static_cast<std::size_t>(part_.m()),
               std::vector<double>(grid_->interior().size(), 0.0));
}

double ResidualField::max_abs() const {
  double worst = 0.0;
  for (const auto& v : vals_)
    for (double r : v) worst = std::max(worst, std::abs(r));
  return worst;
}

double ResidualField::component_min(int comp) const {
  const auto& v = vals_[static_cast<std::size_t>(comp)];
  return *std::min_element(v.begin(), v.end());
}

double ResidualField::component_max(int comp) const {
  const auto& v = vals_[static_cast<std::size_t>(comp)];
  return *std::max_element(v.begin(), v.end());
}

DiscreteSystem::DiscreteSystem(const OperatorSpec& spec, GridPtr grid,
                               double dirichlet)
    : spec_(spec), grid_(std::move(grid)), dirichlet_(dirichlet) {}

DiscreteSystem DiscreteSystem::build(const OperatorSpec& spec, GridPtr grid,
                                     double dirichlet) {
  detail::require(static_cast<bool>(grid), "discretize: null grid");
  detail::require(spec.dim() == grid->dim(), "discretize: dimension mismatch");
  detail::require(spec.has_structural_form(),
                  "discretize: every component needs a declared structural form");
  detail::require(spec.partition().m() <= kMaxComponents,
                  "discretize: too many components");
  const Box& gb = grid->box();
  const Box& sb = spec.box();
  for (int a = 0; a < spec.dim(); ++a)
    detail::require(std::abs(gb.lo[static_cast<std::size_t>(a)] -
                             sb.lo[static_cast<std::size_t>(a)]) == 0.0 &&
                        std::abs(gb.hi[static_cast<std::size_t>(a)] -
                                 sb.hi[static_cast<std::size_t>(a)]) == 0.0,
                    "discretize: grid box differs from the operator's box");

  DiscreteSystem sys(spec, grid, dirichlet);
  const int dim = grid->dim();
  const int m = spec.partition().m();
  const auto total = static_cast<std::size_t>(grid->total_nodes());

  sys.stride_[0] = dim == 1 ? 1 : grid->nodes(1);
  sys.stride_[1] = 1;
  for (int a = 0; a < dim; ++a)
    sys.inv_h_[static_cast<std::size_t>(a)] = 1.0 / grid->spacing(a);

  sys.diff_.resize(static_cast<std::size_t>(m));
  sys.drift_.resize(static_cast<std::size_t>(m));
  sys.data_.assign(static_cast<std::size_t>(m), std::vector<double>(total, 0.0));
  sys.sdiag_.assign(static_cast<std::size_t>(m), std::vector<double>(total, 0.0));
  sys.coupling_.resize(static_cast<std::size_t>(m));
  sys.slope_min_.resize(static_cast<std::size_t>(m));
  sys.slope_max_.resize(static_cast<std::size_t>(m));

  for (int c = 0; c < m; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const StructuralForm& sf = *spec.component(c).form;
    sys.coupling_[cc] = sf.coupling;
    sys.slope_min_[cc] = sf.own_slope_min;
    sys.slope_max_[cc] = sf.own_slope_max;
    for (int a = 0; a < dim; ++a) {
      sys.diff_[cc][static_cast<std::size_t>(a)].assign(total, 0.0);
      sys.drift_[cc][static_cast<std::size_t>(a)].assign(total, 0.0);
    }
    if (sf.drift)
      detail::require(sf.drift_bound > 0.0,
                      "discretize: drift present but no Lipschitz bound declared");

    for (int node = 0; node < grid->total_nodes(); ++node) {
      const auto nn = static_cast<std::size_t>(node);
      const Point x = grid->coord(node);
      if (sf.data) sys.data_[cc][nn] = sf.data(x);
      if (!grid->is_interior(node)) continue;

      double diag = 0.0;
      if (sf.diffusion) {
        const auto aval = sf.diffusion(x);
        for (int a = 0; a < dim; ++a) {
          const auto ax = static_cast<std::size_t>(a);
          if (!(aval[ax] >= 0.0)) {
            std::ostringstream os;
            os << "discretize: negative diffusion coefficient " << aval[ax]
               << " for component " << c << " at node " << node;
            throw Error(os.str());
          }
          const double w = aval[ax] * sys.inv_h_[ax] * sys.inv_h_[ax];
          sys.diff_[cc][ax][nn] = w;
          diag += 2.0 * w;
        }
      }
      if (sf.drift) {
        const auto bval = sf.drift(x);
        for (int a = 0; a < dim; ++a) {
          const auto ax = static_cast<std::size_t>(a);
          if (std::abs(bval[ax]) > sf.drift_bound + 1e-12 * sf.drift_bound) {
            std::ostringstream os;
            os << "discretize: drift magnitude " << std::abs(bval[ax])
               << " exceeds the declared bound " << sf.drift_bound
               << " for component " << c << " at node " << node;
            throw Error(os.str());
          }
          sys.drift_[cc][ax][nn] = bval[ax];
          diag += std::abs(bval[ax]) * sys.inv_h_[ax];
        }
      }
      sys.sdiag_[cc][nn] = diag;

      // Positive-type check: the upwind/central weights put nonpositive
      // coefficients on all neighbors by construction, so only the nodal
      // diagonal needs verifying.
      if (!(diag + sf.own_slope_min > 0.0)) {
        std::ostringstream os;
        os << "discretize: nonpositive nodal diagonal for component " << c
           << " at node " << node << " (spatial " << diag << ", own slope >= "
           << sf.own_slope_min
           << "); refine the mesh or strengthen the zeroth-order term";
        throw Error(os.str());
      }
    }
  }

  double worst = 0.0;
  for (int c = 0; c < m; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    for (int node : grid->interior())
      worst = std::max(worst, sys.sdiag_[cc][static_cast<std::size_t>(node)] +
                                  sys.slope_max_[cc]);
  }
  sys.max_nodal_slope_ = worst;
  sys.rebuild_flat();
  return sys;
}

void DiscreteSystem::rebuild_flat() {
  const int m = spec_.partition().m();
  flat_.assign(static_cast<std::size_t>(m), FlatComp{});
  for (int c = 0; c < m; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    FlatComp& fc = flat_[cc];
    for (int a = 0; a < grid_->dim(); ++a) {
      fc.diff[a] = diff_[cc][static_cast<std::size_t>(a)].data();
      fc.drift[a] = drift_[cc][static_cast<std::size_t>(a)].data();
    }
    fc.data = data_[cc].data();
    fc.sdiag = sdiag_[cc].data();
    fc.kind = coupling_[cc].kind;
    fc.own_lambda = coupling_[cc].own_lambda;
    fc.gain = coupling_[cc].gain;
  }
}

ResidualField DiscreteSystem::residual(const VectorGridFunction& U) const {
  detail::require(U.grid_ptr().get() == grid_.get() &&
                      U.partition() == spec_.partition(),
                  "residual: grid function does not match the system");
  detail::require(U.all_finite(), "residual: non-finite value in grid function");
  detail::require(U.boundary_equals(dirichlet_),
                  "residual: boundary values do not match the Dirichlet datum");

  ResidualField res(grid_, spec_.partition());
  const auto& interior = grid_->interior();
  for (int c = 0; c < spec_.partition().m(); ++c)
    for (std::size_t k = 0; k < interior.size(); ++k)
      res.value(c, static_cast<int>(k)) = nodal_residual(U, c, interior[k]);
  return res;
}

}  // namespace bqm
