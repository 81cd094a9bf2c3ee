// Monotone finite-difference discretization of weakly coupled operators in
// declared structural form. Central second differences for the diagonal
// diffusion, first-order upwind differences for the drift, pointwise
// zeroth-order coupling. The resulting scheme is of positive type: all
// off-diagonal stencil weights are nonpositive and every nodal equation has
// a positive diagonal, which is verified at build time.
#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "bqm/grid.hpp"
#include "bqm/operator.hpp"

namespace bqm {

/// Discrete residual values, one per component per interior node
/// (interior ordering follows Grid::interior()).
class ResidualField {
 public:
  ResidualField(GridPtr grid, Partition part);

  const Partition& partition() const { return part_; }
  const Grid& grid() const { return *grid_; }
  int interior_count() const {
    return static_cast<int>(grid_->interior().size());
  }

  double value(int comp, int interior_idx) const {
    return vals_[static_cast<std::size_t>(comp)]
                [static_cast<std::size_t>(interior_idx)];
  }
  double& value(int comp, int interior_idx) {
    return vals_[static_cast<std::size_t>(comp)]
                [static_cast<std::size_t>(interior_idx)];
  }
  std::span<const double> component(int comp) const {
    return vals_[static_cast<std::size_t>(comp)];
  }

  double max_abs() const;
  double component_min(int comp) const;
  double component_max(int comp) const;

 private:
  GridPtr grid_;
  Partition part_;
  std::vector<std::vector<double>> vals_;
};

/// Frozen stencil data for one operator on one grid.
class DiscreteSystem {
 public:
  /// Builds the discretization; requires a declared structural form on
  /// every component. Throws on sign-pattern violations.
  static DiscreteSystem build(const OperatorSpec& spec, GridPtr grid,
                              double dirichlet = 0.0);

  const OperatorSpec& spec() const { return spec_; }
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Partition& partition() const { return spec_.partition(); }
  double dirichlet() const { return dirichlet_; }

  int stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }
  double inv_h(int axis) const { return inv_h_[static_cast<std::size_t>(axis)]; }

  std::span<const double> diffusion_over_h2(int comp, int axis) const {
    return diff_[static_cast<std::size_t>(comp)][static_cast<std::size_t>(axis)];
  }
  std::span<const double> drift(int comp, int axis) const {
    return drift_[static_cast<std::size_t>(comp)][static_cast<std::size_t>(axis)];
  }
  std::span<const double> data(int comp) const {
    return data_[static_cast<std::size_t>(comp)];
  }
  std::span<const double> spatial_diag(int comp) const {
    return sdiag_[static_cast<std::size_t>(comp)];
  }
  const CouplingTerm& coupling(int comp) const {
    return coupling_[static_cast<std::size_t>(comp)];
  }
  double own_slope_min(int comp) const {
    return slope_min_[static_cast<std::size_t>(comp)];
  }
  double own_slope_max(int comp) const {
    return slope_max_[static_cast<std::size_t>(comp)];
  }

  /// Largest nodal slope of any nodal equation in its own unknown
  /// (spatial diagonal + declared own coupling slope bound).
  double max_nodal_slope() const { return max_nodal_slope_; }

  // Movable but not copyable: the flat views point into the owned arrays.
  DiscreteSystem(const DiscreteSystem&) = delete;
  DiscreteSystem& operator=(const DiscreteSystem&) = delete;
  DiscreteSystem(DiscreteSystem&&) = default;
  DiscreteSystem& operator=(DiscreteSystem&&) = default;

  /// One nodal equation with frozen neighbors and other components:
  /// phi(t) = lin * t + cst (+ gain * max(t, partner) for the competitive
  /// coupling). Gathering the frozen contributions once keeps repeated
  /// trial evaluations inside a nodal root solve cheap. Generic couplings
  /// fall back to a full re-evaluation per trial.
  struct NodalEquation {
    double lin = 0.0;
    double cst = 0.0;
    double gain = 0.0;
    double partner = 0.0;
    bool has_kink = false;
    // Fallback state for generic couplings.
    const DiscreteSystem* sys = nullptr;
    const VectorGridFunction* U = nullptr;
    int comp = 0;
    int node = 0;

    double operator()(double t) const {
      if (sys != nullptr) return sys->generic_residual_trial(*U, comp, node, t);
      double acc = lin * t + cst;
      if (has_kink) acc += gain * (t > partner ? t : partner);
      return acc;
    }
  };

  NodalEquation nodal_equation(const VectorGridFunction& U, int comp,
                               int node) const {
    const auto c = static_cast<std::size_t>(comp);
    const auto nn = static_cast<std::size_t>(node);
    const FlatComp& fc = flat_[c];
    if (fc.kind == CouplingTerm::Kind::generic) {
      NodalEquation eq;
      eq.sys = this;
      eq.U = &U;
      eq.comp = comp;
      eq.node = node;
      return eq;
    }
    NodalEquation eq;
    eq.lin = fc.sdiag[nn];
    double cst = 0.0;
    const double* own = field(U, comp).data();
    const int dim = grid_->dim();
    for (int a = 0; a < dim; ++a) {
      const auto ax = static_cast<std::size_t>(a);
      const int st = stride_[ax];
      const double ul = own[static_cast<std::size_t>(node - st)];
      const double ur = own[static_cast<std::size_t>(node + st)];
      cst -= fc.diff[ax][nn] * (ul + ur);
      const double b = fc.drift[ax][nn];
      if (b > 0.0)
        cst -= b * ul * inv_h_[ax];
      else if (b < 0.0)
        cst += b * ur * inv_h_[ax];
    }
    switch (fc.kind) {
      case CouplingTerm::Kind::zero:
        break;
      case CouplingTerm::Kind::diagonal:
        eq.lin += fc.own_lambda;
        break;
      case CouplingTerm::Kind::competitive_max:
        eq.lin += fc.own_lambda;
        eq.gain = fc.gain;
        eq.partner = field(U, 1 - comp).data()[nn];
        eq.has_kink = true;
        break;
      case CouplingTerm::Kind::generic:
        break;
    }
    eq.cst = cst - fc.data[nn];
    return eq;
  }

  /// Discrete F_comp at `node` with the component's own nodal value
  /// replaced by `trial`; all other values read from U.
  double nodal_residual_trial(const VectorGridFunction& U, int comp, int node,
                              double trial) const {
    return nodal_equation(U, comp, node)(trial);
  }

  double nodal_residual(const VectorGridFunction& U, int comp, int node) const {
    return nodal_residual_trial(U, comp, node, U.value(comp, node));
  }

  double generic_residual_trial(const VectorGridFunction& U, int comp, int node,
                                double trial) const {
    const auto c = static_cast<std::size_t>(comp);
    const int dim = grid_->dim();
    double acc = 0.0;
    const std::vector<double>& own = field(U, comp);
    for (int a = 0; a < dim; ++a) {
      const auto ax = static_cast<std::size_t>(a);
      const int st = stride_[ax];
      const double ul = own[static_cast<std::size_t>(node - st)];
      const double ur = own[static_cast<std::size_t>(node + st)];
      acc += diff_[c][ax][static_cast<std::size_t>(node)] *
             (2.0 * trial - ul - ur);
      const double b = drift_[c][ax][static_cast<std::size_t>(node)];
      if (b > 0.0)
        acc += b * (trial - ul) * inv_h_[ax];
      else if (b < 0.0)
        acc += b * (ur - trial) * inv_h_[ax];
    }
    acc += coupling_value(U, comp, node, trial);
    acc -= data_[c][static_cast<std::size_t>(node)];
    return acc;
  }

  ResidualField residual(const VectorGridFunction& U) const;

 private:
  DiscreteSystem(const OperatorSpec& spec, GridPtr grid, double dirichlet);

  static const std::vector<double>& field(const VectorGridFunction& U,
                                          int comp) {
    return const_cast<VectorGridFunction&>(U).component_mut(comp);
  }

  double coupling_value(const VectorGridFunction& U, int comp, int node,
                        double trial) const {
    const CouplingTerm& ct = coupling_[static_cast<std::size_t>(comp)];
    switch (ct.kind) {
      case CouplingTerm::Kind::zero:
        return 0.0;
      case CouplingTerm::Kind::diagonal:
        return ct.own_lambda * trial;
      case CouplingTerm::Kind::competitive_max: {
        const double other = U.value(1 - comp, node);
        const double mx = trial > other ? trial : other;
        return ct.own_lambda * trial + ct.gain * mx;
      }
      case CouplingTerm::Kind::generic: {
        const Partition& part = spec_.partition();
        std::array<double, kMaxComponents> buf{};
        for (int k = 0; k < part.m(); ++k)
          buf[static_cast<std::size_t>(k)] = U.value(k, node);
        buf[static_cast<std::size_t>(comp)] = trial;
        return ct.generic(
            std::span<const double>(buf.data(), static_cast<std::size_t>(part.m1)),
            std::span<const double>(buf.data() + part.m1,
                                    static_cast<std::size_t>(part.m2)));
      }
    }
    return 0.0;
  }

  static constexpr int kMaxComponents = 16;

  // Raw views over the per-component arrays; rebuilt whenever the owning
  // vectors change (only during build).
  struct FlatComp {
    const double* diff[2] = {nullptr, nullptr};
    const double* drift[2] = {nullptr, nullptr};
    const double* data = nullptr;
    const double* sdiag = nullptr;
    CouplingTerm::Kind kind = CouplingTerm::Kind::zero;
    double own_lambda = 0.0;
    double gain = 0.0;
  };

  void rebuild_flat();

  OperatorSpec spec_;
  GridPtr grid_;
  double dirichlet_;
  std::array<int, 2> stride_{1, 1};
  std::array<double, 2> inv_h_{0.0, 0.0};
  // [comp][axis][node] and [comp][node] arrays
  std::vector<std::array<std::vector<double>, 2>> diff_;
  std::vector<std::array<std::vector<double>, 2>> drift_;
  std::vector<std::vector<double>> data_;
  std::vector<std::vector<double>> sdiag_;
  std::vector<CouplingTerm> coupling_;
  std::vector<double> slope_min_, slope_max_;
  std::vector<FlatComp> flat_;
  double max_nodal_slope_ = 0.0;
};

inline DiscreteSystem discretize(const OperatorSpec& spec, GridPtr grid,
                                 double dirichlet = 0.0) {
  return DiscreteSystem::build(spec, std::move(grid), dirichlet);
}

}  // namespace bqm
