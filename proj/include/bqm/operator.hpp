// Weakly coupled operator abstraction: an m-component operator
// F_j(x, r, s, p, X) with the two-group partition (r = group-1 values,
// s = group-2 values), plus built-in families. Components may declare a
// structural decomposition
//
//   F_j = -trace(A_j(x) X) + b_j(x).p + c_j(x, r, s),
//   c_j(x, r, s) = coupling_j(r, s) - data_j(x),
//
// with A_j diagonal nonnegative. The decomposition is what the grid
// discretization consumes; plain evaluation never needs it.
#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bqm/common.hpp"

namespace bqm {

/// Two-group component partition: m1 group-1 components, m2 group-2
/// components, m = m1 + m2. m2 = 0 means group 2 is empty.
struct Partition {
  int m1 = 1;
  int m2 = 0;

  Partition() = default;
  Partition(int m1_, int m2_) : m1(m1_), m2(m2_) {
    detail::require(m1 >= 1, "Partition: m1 must be >= 1");
    detail::require(m2 >= 0, "Partition: m2 must be >= 0");
  }

  int m() const { return m1 + m2; }
  bool is_group1(int comp) const { return comp < m1; }

  bool operator==(const Partition&) const = default;
};

/// Symmetric dim x dim matrix, dim in {1, 2}. Symmetry holds exactly by
/// construction: there is a single storage slot per unordered index pair.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(int dim = 1) : dim_(dim) {
    detail::require(dim == 1 || dim == 2, "SymmetricMatrix: dim must be 1 or 2");
  }

  static SymmetricMatrix zero(int dim) { return SymmetricMatrix(dim); }

  static SymmetricMatrix diagonal(int dim, double d0, double d1 = 0.0) {
    SymmetricMatrix x(dim);
    x.set(0, 0, d0);
    if (dim == 2) x.set(1, 1, d1);
    return x;
  }

  /// Rotation-conjugated diagonal: R(angle) diag(e0, e1) R(angle)^T.
  static SymmetricMatrix from_eigen(int dim, double e0, double e1, double angle);

  int dim() const { return dim_; }

  double operator()(int i, int j) const { return a_[slot(i, j)]; }

  void set(int i, int j, double v) { a_[slot(i, j)] = v; }

  double trace() const { return dim_ == 1 ? a_[0] : a_[0] + a_[2]; }

  SymmetricMatrix operator+(const SymmetricMatrix& o) const {
    SymmetricMatrix r(dim_);
    for (int k = 0; k < 3; ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
  }

  SymmetricMatrix operator-() const {
    SymmetricMatrix r(dim_);
    for (int k = 0; k < 3; ++k) r.a_[k] = -a_[k];
    return r;
  }

  bool operator==(const SymmetricMatrix&) const = default;

 private:
  // a_[0] = (0,0), a_[1] = (0,1) = (1,0), a_[2] = (1,1)
  int slot(int i, int j) const {
    detail::require(i >= 0 && i < dim_ && j >= 0 && j < dim_,
                    "SymmetricMatrix: index out of range");
    return i + j;
  }

  int dim_;
  std::array<double, 3> a_{0.0, 0.0, 0.0};
};

/// Scalar function of position (data term, diffusion entry, ...).
using ScalarFn = std::function<double(const Point&)>;
/// Vector function of position (diagonal diffusion entries, drift).
using VectorFn = std::function<std::array<double, 2>(const Point&)>;

/// Direct component evaluator F_j(x, r, s, p, X).
using Evaluator = std::function<double(
    const Point& x, std::span<const double> r, std::span<const double> s,
    std::span<const double> p, const SymmetricMatrix& X)>;

/// Zeroth-order coupling c_j less its data part. Built-in kinds are
/// dispatched inline on solver hot paths; `generic` is the escape hatch
/// for user-supplied couplings.
struct CouplingTerm {
  enum class Kind {
    zero,             // no zeroth-order term
    diagonal,         // own_lambda * (own component value)
    competitive_max,  // own_lambda * own + gain * max(r[0], s[0]); needs m1 = m2 = 1
    generic,          // arbitrary callable
  };

  Kind kind = Kind::zero;
  double own_lambda = 0.0;
  double gain = 0.0;
  std::function<double(std::span<const double> r, std::span<const double> s)>
      generic;

  double eval(int comp, const Partition& part, std::span<const double> r,
              std::span<const double> s) const {
    switch (kind) {
      case Kind::zero:
        return 0.0;
      case Kind::diagonal:
        return own_lambda *
               (comp < part.m1 ? r[static_cast<std::size_t>(comp)]
                               : s[static_cast<std::size_t>(comp - part.m1)]);
      case Kind::competitive_max: {
        const double own = comp < part.m1 ? r[0] : s[0];
        return own_lambda * own + gain * (r[0] > s[0] ? r[0] : s[0]);
      }
      case Kind::generic:
        return generic(r, s);
    }
    return 0.0;
  }
};

/// Declared decomposition of one component. `own_slope_min/max` bound the
/// slope of coupling in the component's own value; the minimum feeds the
/// positive-diagonal check of the discretization, the maximum feeds
/// explicit-step stability bounds.
struct StructuralForm {
  VectorFn diffusion;              // null => zero diffusion
  bool constant_diffusion = true;  // constant A required by the ii) check
  VectorFn drift;                  // null => no first-order term
  double drift_bound = 0.0;        // declared sup-norm bound on b(x)
  CouplingTerm coupling;
  ScalarFn data;                   // null => zero data
  double own_slope_min = 0.0;
  double own_slope_max = 0.0;
};

struct Component {
  Evaluator evaluate;
  std::optional<StructuralForm> form;
};

/// Immutable specification of a weakly coupled operator on a box domain.
class OperatorSpec {
 public:
  OperatorSpec(Partition part, int dim, Box box, std::string name,
               std::map<std::string, double> params,
               std::vector<Component> comps);

  const Partition& partition() const { return part_; }
  int dim() const { return dim_; }
  int num_components() const { return part_.m(); }
  const Box& box() const { return box_; }
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& key) const;

  const Component& component(int j) const;
  bool has_structural_form() const;

  /// Direct evaluation of F_j with full argument validation.
  double evaluate(int j, const Point& x, std::span<const double> r,
                  std::span<const double> s, std::span<const double> p,
                  const SymmetricMatrix& X) const;

  /// Evaluation through the declared decomposition (throws without one).
  double evaluate_decomposed(int j, const Point& x, std::span<const double> r,
                             std::span<const double> s,
                             std::span<const double> p,
                             const SymmetricMatrix& X) const;

 private:
  Partition part_;
  int dim_;
  Box box_;
  std::string name_;
  std::map<std::string, double> params_;
  std::vector<Component> comps_;
};

/// Two-component competitive family
///   F_1 = -trace(X) + lambda r + alpha max(r, s) - f(x)
///   F_2 = -trace(X) + lambda s + beta  max(r, s) - g(x)
/// with partition (1, 1). lambda, alpha, beta must be positive; f, g must
/// be nonnegative on the box (checked on a sample lattice).
OperatorSpec make_competitive(double lambda, double alpha, double beta,
                              ScalarFn f, ScalarFn g, int dim,
                              std::optional<Box> box = std::nullopt);

/// Uncoupled reference family F_j = -trace(X) + lambda_j u_j - data_j(x).
OperatorSpec make_diagonal_linear(std::vector<double> lambdas,
                                  std::vector<ScalarFn> data, Partition part,
                                  int dim, std::optional<Box> box = std::nullopt);

}  // namespace bqm
