#include "bqm/grid.hpp"

#include <algorithm>
#include <cmath>

namespace bqm {

std::shared_ptr<const Grid> Grid::make(const Box& box,
                                       const std::vector<int>& nodes_per_axis) {
  detail::require(static_cast<int>(nodes_per_axis.size()) == box.dim,
                  "Grid: need one node count per axis");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->box_ = box;
  g->total_ = 1;
  for (int a = 0; a < box.dim; ++a) {
    const int n = nodes_per_axis[static_cast<std::size_t>(a)];
    detail::require(n >= 3, "Grid: need at least 3 nodes per axis");
    const auto ax = static_cast<std::size_t>(a);
    g->n_[ax] = n;
    g->h_[ax] = (box.hi[ax] - box.lo[ax]) / (n - 1);
    g->total_ *= n;
  }
  g->interior_.reserve(static_cast<std::size_t>(g->total_));
  for (int node = 0; node < g->total_; ++node)
    if (g->is_interior(node)) g->interior_.push_back(node);
  return g;
}

GridPtr build_grid(int dim, const std::vector<std::array<double, 2>>& bounds,
                   const std::vector<int>& nodes_per_axis) {
  detail::require(static_cast<int>(bounds.size()) == dim,
                  "build_grid: need one bounds pair per axis");
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  for (int a = 0; a < dim; ++a) {
    lo[static_cast<std::size_t>(a)] = bounds[static_cast<std::size_t>(a)][0];
    hi[static_cast<std::size_t>(a)] = bounds[static_cast<std::size_t>(a)][1];
  }
  return Grid::make(Box::make(dim, lo, hi), nodes_per_axis);
}

VectorGridFunction::VectorGridFunction(GridPtr grid, Partition part, double fill)
    : grid_(std::move(grid)), part_(part) {
  detail::require(static_cast<bool>(grid_), "VectorGridFunction: null grid");
  comp_.assign(static_cast<std::size_t>(part_.m()),
               std::vector<double>(static_cast<std::size_t>(grid_->total_nodes()),
                                   fill));
}

VectorGridFunction VectorGridFunction::constant_interior(
    GridPtr grid, Partition part, std::span<const double> values,
    double boundary) {
  detail::require(static_cast<int>(values.size()) == part.m(),
                  "constant_interior: need one value per component");
  VectorGridFunction u(std::move(grid), part, boundary);
  for (int c = 0; c < part.m(); ++c)
    for (int node : u.grid().interior())
      u.value(c, node) = values[static_cast<std::size_t>(c)];
  return u;
}

bool VectorGridFunction::all_finite() const {
  for (const auto& field : comp_)
    for (double v : field)
      if (!finite(v)) return false;
  return true;
}

bool VectorGridFunction::boundary_equals(double datum) const {
  for (const auto& field : comp_)
    for (int node = 0; node < grid_->total_nodes(); ++node)
      if (!grid_->is_interior(node) &&
          field[static_cast<std::size_t>(node)] != datum)
        return false;
  return true;
}

void VectorGridFunction::set_boundary(double datum) {
  for (auto& field : comp_)
    for (int node = 0; node < grid_->total_nodes(); ++node)
      if (!grid_->is_interior(node)) field[static_cast<std::size_t>(node)] = datum;
}

double VectorGridFunction::max_distance(const VectorGridFunction& other) const {
  detail::require(same_shape(other), "max_distance: shape mismatch");
  double worst = 0.0;
  for (int c = 0; c < part_.m(); ++c)
    for (int node = 0; node < grid_->total_nodes(); ++node)
      worst = std::max(worst, std::abs(value(c, node) - other.value(c, node)));
  return worst;
}

}  // namespace bqm
