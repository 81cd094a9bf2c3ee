// Uniform rectangular grids over box domains and per-node vector fields.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "bqm/common.hpp"
#include "bqm/operator.hpp"

namespace bqm {

/// Uniform grid over a box. Node ordering is lexicographic in the axis
/// index tuple (i0, i1): i0 major, i1 minor. Interior nodes are exactly
/// those with no index at an axis extreme.
class Grid {
 public:
  static std::shared_ptr<const Grid> make(const Box& box,
                                          const std::vector<int>& nodes_per_axis);

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  int nodes(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  int total_nodes() const { return total_; }
  const std::vector<int>& interior() const { return interior_; }

  int id(int i0, int i1 = 0) const { return dim() == 1 ? i0 : i1 + n_[1] * i0; }

  int axis_index(int node, int axis) const {
    if (dim() == 1) return node;
    return axis == 0 ? node / n_[1] : node % n_[1];
  }

  bool is_interior(int node) const {
    for (int a = 0; a < dim(); ++a) {
      const int i = axis_index(node, a);
      if (i == 0 || i == n_[static_cast<std::size_t>(a)] - 1) return false;
    }
    return true;
  }

  /// Neighbor node id along `axis` (dir = -1 or +1); interior callers only.
  int neighbor(int node, int axis, int dir) const {
    return axis == 0 ? node + dir * (dim() == 1 ? 1 : n_[1]) : node + dir;
  }

  Point coord(int node) const {
    Point x{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) {
      const int i = axis_index(node, a);
      const auto ax = static_cast<std::size_t>(a);
      // Exact bounds at the extremes.
      x[ax] = (i == n_[ax] - 1) ? box_.hi[ax] : box_.lo[ax] + h_[ax] * i;
    }
    return x;
  }

  /// Same dimension, bounds and node counts (not necessarily the same
  /// object).
  bool same_layout(const Grid& other) const {
    return dim() == other.dim() && n_ == other.n_ && box_.lo == other.box_.lo &&
           box_.hi == other.box_.hi;
  }

 private:
  Grid() = default;

  Box box_;
  std::array<int, 2> n_{1, 1};
  std::array<double, 2> h_{0.0, 0.0};
  int total_ = 0;
  std::vector<int> interior_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Convenience forms mirroring the CLI surface.
GridPtr build_grid(int dim, const std::vector<std::array<double, 2>>& bounds,
                   const std::vector<int>& nodes_per_axis);

/// Per-node values for all m components of a partitioned system. Group-1
/// components are 0..m1-1, group-2 components m1..m-1.
class VectorGridFunction {
 public:
  VectorGridFunction(GridPtr grid, Partition part, double fill = 0.0);

  static VectorGridFunction constant_interior(GridPtr grid, Partition part,
                                              std::span<const double> values,
                                              double boundary);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Partition& partition() const { return part_; }
  int num_components() const { return part_.m(); }

  double value(int comp, int node) const {
    return comp_[static_cast<std::size_t>(comp)][static_cast<std::size_t>(node)];
  }
  double& value(int comp, int node) {
    return comp_[static_cast<std::size_t>(comp)][static_cast<std::size_t>(node)];
  }

  std::span<const double> component(int comp) const {
    return comp_[static_cast<std::size_t>(comp)];
  }
  std::vector<double>& component_mut(int comp) {
    return comp_[static_cast<std::size_t>(comp)];
  }

  bool all_finite() const;
  bool boundary_equals(double datum) const;
  void set_boundary(double datum);

  /// Max-norm distance to another function on the same grid/partition.
  double max_distance(const VectorGridFunction& other) const;

  bool same_shape(const VectorGridFunction& other) const {
    return (grid_ == other.grid_ || grid_->same_layout(*other.grid_)) &&
           part_ == other.part_;
  }

 private:
  GridPtr grid_;
  Partition part_;
  std::vector<std::vector<double>> comp_;
};

}  // namespace bqm
