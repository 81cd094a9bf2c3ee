// Sampled verification of the structural hypotheses on a weakly coupled
// operator: degenerate ellipticity, balanced quasi-monotonicity (the
// two-group conditions), the classical one-group quasi-monotonicity, and
// the comparison/uniqueness conditions i), i'), ii). Universal statements
// are probed on a deterministic pseudo-random stream; every failure
// carries a witness that reproduces the violated inequality on
// re-evaluation.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bqm/operator.hpp"
#include "bqm/rng.hpp"

namespace bqm {

struct SamplerConfig {
  long sample_count = 10000;
  std::array<double, 2> value_range{-5.0, 5.0};
  std::array<double, 2> gradient_range{-5.0, 5.0};
  double matrix_scale = 5.0;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(sample_count >= 1, "SamplerConfig: sample_count must be >= 1");
    detail::require(value_range[0] < value_range[1],
                    "SamplerConfig: empty value range");
    detail::require(gradient_range[0] < gradient_range[1],
                    "SamplerConfig: empty gradient range");
    detail::require(matrix_scale > 0.0, "SamplerConfig: matrix_scale must be > 0");
  }
};

enum class Condition {
  ellipticity,
  mon1,
  mon2,
  monorig,
  cond_i,
  cond_i_prime,
  cond_ii,
};

std::string condition_name(Condition c);

/// One full evaluation tuple of a component.
struct EvalArgs {
  Point x{0.0, 0.0};
  std::vector<double> r;
  std::vector<double> s;
  std::vector<double> p;
  SymmetricMatrix X{1};
};

/// Violation evidence: two argument tuples and the two evaluated values
/// that break the checked inequality.
struct Witness {
  int component = 0;
  EvalArgs lhs;
  EvalArgs rhs;
  double value_lhs = 0.0;
  double value_rhs = 0.0;
  std::string relation;
  std::map<std::string, double> aux;
};

struct CheckReport {
  Condition condition = Condition::ellipticity;
  bool passed = false;
  long samples_tested = 0;
  std::optional<double> empirical_constant;
  std::optional<Witness> witness;
  std::map<std::string, double> details;
};

/// Re-evaluates one side of a witness; bitwise-reproduces the stored value.
double reevaluate(const OperatorSpec& spec, int component, const EvalArgs& args);

/// F_j(x, r, p, X) >= F_j(x, r, p, Y) whenever X <= Y (Y = X + PSD draw).
CheckReport check_ellipticity(const OperatorSpec& spec, const SamplerConfig& cfg);

/// The two-group monotonicity conditions; first report covers the group-1
/// inequalities, second the group-2 ones (vacuous when m2 = 0).
std::pair<CheckReport, CheckReport> check_balanced_qm(const OperatorSpec& spec,
                                                      const SamplerConfig& cfg);

/// Classical quasi-monotonicity: F_j non-increasing in every off-diagonal
/// unknown, all components treated as one group.
CheckReport check_quasi_monotone(const OperatorSpec& spec,
                                 const SamplerConfig& cfg);

/// Uniqueness condition i): margin of F_j in its own unknown where that
/// unknown attains the sup-norm gap. empirical_constant is the smallest
/// sampled margin ratio.
CheckReport check_condition_i(const OperatorSpec& spec, const SamplerConfig& cfg);

/// Comparison condition i'): group-oriented margin at the attaining index.
CheckReport check_condition_i_prime(const OperatorSpec& spec,
                                    const SamplerConfig& cfg);

/// Regularity condition ii) over the negative-semidefinite matrix family,
/// against the linear modulus candidate estimated from sampled data and
/// drift Lipschitz constants. empirical_constant is the largest excess
/// over the candidate bound.
CheckReport check_condition_ii(const OperatorSpec& spec,
                               const SamplerConfig& cfg);

}  // namespace bqm
