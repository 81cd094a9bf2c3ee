#include <doctest.h>

#include <cmath>

#include "bqm/pipeline.hpp"
#include "bqm/structure.hpp"

using namespace bqm;

namespace {

ScalarFn constant(double v) {
  return [v](const Point&) { return v; };
}

SamplerConfig sampler(long count, std::uint64_t seed = 0) {
  SamplerConfig cfg;
  cfg.sample_count = count;
  cfg.seed = seed;
  return cfg;
}

OperatorSpec competitive(double lam, double alpha, double beta) {
  return make_competitive(lam, alpha, beta, constant(1.0), constant(1.0), 1);
}

// Hand-built two-component spec F_j = -tr X + lam*own + gain_j*max(r, s)
// without positivity screening, for tampered-coefficient tests.
OperatorSpec raw_two_component(double lam, double gain1, double gain2) {
  std::vector<Component> comps(2);
  comps[0].evaluate = [lam, gain1](const Point&, std::span<const double> r,
                                   std::span<const double> s,
                                   std::span<const double>,
                                   const SymmetricMatrix& X) {
    return -X.trace() + lam * r[0] + gain1 * std::max(r[0], s[0]);
  };
  comps[1].evaluate = [lam, gain2](const Point&, std::span<const double> r,
                                   std::span<const double> s,
                                   std::span<const double>,
                                   const SymmetricMatrix& X) {
    return -X.trace() + lam * s[0] + gain2 * std::max(r[0], s[0]);
  };
  return OperatorSpec(Partition(1, 1), 1, Box::unit(1), "raw", {},
                      std::move(comps));
}

void check_witness_reproduces(const OperatorSpec& spec, const CheckReport& rep) {
  REQUIRE(rep.witness.has_value());
  const Witness& w = *rep.witness;
  CHECK(reevaluate(spec, w.component, w.lhs) == w.value_lhs);
  CHECK(reevaluate(spec, w.component, w.rhs) == w.value_rhs);
}

}  // namespace

TEST_CASE("ellipticity holds for the competitive family") {
  const auto rep = check_ellipticity(competitive(1.0, 1.0, 1.0), sampler(10000));
  CHECK(rep.passed);
  CHECK(rep.samples_tested == 10000);
  CHECK_FALSE(rep.witness.has_value());
}

TEST_CASE("ellipticity fails for a +trace operator with a sound witness") {
  std::vector<Component> comps(1);
  comps[0].evaluate = [](const Point&, std::span<const double> r,
                         std::span<const double>, std::span<const double>,
                         const SymmetricMatrix& X) { return X.trace() + r[0]; };
  OperatorSpec bad(Partition(1, 0), 2, Box::unit(2), "antielliptic", {},
                   std::move(comps));
  const auto rep = check_ellipticity(bad, sampler(500));
  CHECK_FALSE(rep.passed);
  check_witness_reproduces(bad, rep);
  // The witness inequality is genuinely violated: F(X) < F(Y).
  CHECK(rep.witness->value_lhs < rep.witness->value_rhs);
}

TEST_CASE("operators independent of X never trip ellipticity") {
  // Every draw gives exact equality F(X) = F(Y); the X = Y sub-case is
  // the whole behavior here.
  std::vector<Component> comps(1);
  comps[0].evaluate = [](const Point&, std::span<const double> r,
                         std::span<const double>, std::span<const double>,
                         const SymmetricMatrix&) { return 2.0 * r[0]; };
  OperatorSpec spec(Partition(1, 0), 1, Box::unit(1), "coupling_only", {},
                    std::move(comps));
  CHECK(check_ellipticity(spec, sampler(2000)).passed);
}

TEST_CASE("balanced quasi-monotonicity of the competitive family") {
  const auto [mon1, mon2] = check_balanced_qm(competitive(1.0, 2.0, 0.5),
                                              sampler(10000));
  CHECK(mon1.passed);
  CHECK(mon2.passed);
  CHECK(mon1.samples_tested == 10000);
  CHECK(mon2.samples_tested == 10000);
}

TEST_CASE("negative coupling gain breaks the group-1 condition") {
  const auto spec = raw_two_component(1.0, -1.0, 1.0);
  const auto [mon1, mon2] = check_balanced_qm(spec, sampler(2000));
  CHECK_FALSE(mon1.passed);
  CHECK(mon2.passed);
  check_witness_reproduces(spec, mon1);
  // Raising s lowered F_1.
  CHECK(mon1.witness->value_lhs > mon1.witness->value_rhs);
}

TEST_CASE("group-2 condition is vacuous when m1 = m") {
  auto spec = make_diagonal_linear({1.0, 2.0}, {}, Partition(2, 0), 1);
  const auto [mon1, mon2] = check_balanced_qm(spec, sampler(500));
  CHECK(mon1.passed);
  CHECK(mon2.passed);
  CHECK(mon2.samples_tested == 0);
}

TEST_CASE("classical quasi-monotonicity") {
  SUBCASE("diagonal families pass") {
    auto spec = make_diagonal_linear({1.0, 2.0, 0.5}, {}, Partition(3, 0), 1);
    CHECK(check_quasi_monotone(spec, sampler(3000)).passed);
  }
  SUBCASE("the competitive family fails") {
    const auto spec = competitive(1.0, 1.0, 1.0);
    const auto rep = check_quasi_monotone(spec, sampler(3000));
    CHECK_FALSE(rep.passed);
    check_witness_reproduces(spec, rep);
  }
  SUBCASE("scalar operators pass vacuously") {
    auto spec = make_diagonal_linear({1.0}, {}, Partition(1, 0), 1);
    CHECK(check_quasi_monotone(spec, sampler(100)).passed);
  }
}

TEST_CASE("coincidence with the group-1 condition when m1 = m") {
  // Both checks draw the same stream, so a spec violating the shared
  // inequality produces identical first witnesses.
  std::vector<Component> comps(2);
  for (int j = 0; j < 2; ++j) {
    const int other = 1 - j;
    comps[static_cast<std::size_t>(j)].evaluate =
        [j, other](const Point&, std::span<const double> r,
                   std::span<const double>, std::span<const double>,
                   const SymmetricMatrix&) {
          return r[static_cast<std::size_t>(j)] +
                 0.5 * r[static_cast<std::size_t>(other)];
        };
  }
  OperatorSpec bad(Partition(2, 0), 1, Box::unit(1), "cross_raising", {},
                   std::move(comps));
  const auto qm = check_quasi_monotone(bad, sampler(1000, 3));
  const auto [mon1, mon2] = check_balanced_qm(bad, sampler(1000, 3));
  CHECK_FALSE(qm.passed);
  CHECK_FALSE(mon1.passed);
  CHECK(mon2.passed);
  REQUIRE(qm.witness.has_value());
  REQUIRE(mon1.witness.has_value());
  CHECK(qm.witness->component == mon1.witness->component);
  CHECK(qm.witness->lhs.r == mon1.witness->rhs.r);
  CHECK(qm.witness->lhs.x == mon1.witness->rhs.x);

  // Passing case: diagonal family agreeing on the same stream.
  auto good = make_diagonal_linear({1.0, 2.0}, {}, Partition(2, 0), 1);
  CHECK(check_quasi_monotone(good, sampler(1000, 3)).passed ==
        check_balanced_qm(good, sampler(1000, 3)).first.passed);
}

TEST_CASE("condition i margins") {
  SUBCASE("diagonal family margin equals the smallest lambda") {
    auto spec = make_diagonal_linear({1.0, 3.0}, {}, Partition(2, 0), 1);
    const auto rep = check_condition_i(spec, sampler(10000));
    CHECK(rep.passed);
    REQUIRE(rep.empirical_constant.has_value());
    CHECK(*rep.empirical_constant >= 1.0 - 1e-8);
    CHECK(*rep.empirical_constant <= 1.0 + 1e-6);
  }
  SUBCASE("competitive margin approaches lambda - max(alpha, beta)") {
    const auto rep = check_condition_i(competitive(2.0, 0.5, 0.5),
                                       sampler(20000));
    CHECK(rep.passed);
    REQUIRE(rep.empirical_constant.has_value());
    CHECK(*rep.empirical_constant >= 1.5 - 1e-9);
    CHECK(*rep.empirical_constant <= 1.6);
  }
  SUBCASE("dominant coupling breaks the margin") {
    const auto spec = competitive(0.5, 2.0, 2.0);
    const auto rep = check_condition_i(spec, sampler(20000));
    CHECK_FALSE(rep.passed);
    REQUIRE(rep.empirical_constant.has_value());
    CHECK(*rep.empirical_constant < 0.0);
    check_witness_reproduces(spec, rep);
  }
}

TEST_CASE("condition i' margins") {
  SUBCASE("diagonal family") {
    auto spec = make_diagonal_linear({2.0, 3.0}, {}, Partition(1, 1), 1);
    const auto rep = check_condition_i_prime(spec, sampler(10000));
    CHECK(rep.passed);
    CHECK(*rep.empirical_constant >= 2.0 - 1e-8);
    CHECK(*rep.empirical_constant <= 2.0 + 1e-6);
  }
  SUBCASE("competitive with lambda = 2, alpha = beta = 0.5") {
    const auto rep = check_condition_i_prime(competitive(2.0, 0.5, 0.5),
                                             sampler(20000));
    CHECK(rep.passed);
    CHECK(*rep.empirical_constant >= 1.5 - 1e-9);
    CHECK(*rep.empirical_constant <= 1.6);
  }
  SUBCASE("competitive with lambda = 1, alpha = beta = 2 fails") {
    const auto spec = competitive(1.0, 2.0, 2.0);
    const auto rep = check_condition_i_prime(spec, sampler(20000));
    CHECK_FALSE(rep.passed);
    check_witness_reproduces(spec, rep);
    REQUIRE(rep.witness->aux.contains("theta"));
    CHECK(rep.witness->aux.at("theta") > 0.0);
  }
}

TEST_CASE("condition ii over the negative-semidefinite family") {
  SUBCASE("constant data reduces to a trace inequality") {
    const auto rep = check_condition_ii(competitive(1.0, 1.0, 1.0),
                                        sampler(5000));
    CHECK(rep.passed);
    REQUIRE(rep.empirical_constant.has_value());
    CHECK(*rep.empirical_constant <= 0.0);
    CHECK(rep.details.at("omega_slope") == 0.0);
  }
  SUBCASE("Lipschitz data is absorbed by the linear modulus") {
    auto spec = make_competitive(
        1.0, 1.0, 1.0, [](const Point& x) { return 1.0 + 2.0 * x[0]; },
        constant(1.0), 1);
    const auto rep = check_condition_ii(spec, sampler(5000));
    CHECK(rep.passed);
    CHECK(rep.details.at("data_lipschitz") > 1.0);
  }
  SUBCASE("identity sub-case: x = y, X = Y = 0 gives a zero difference") {
    const auto spec = competitive(1.0, 1.0, 1.0);
    const Point x{0.5, 0.0};
    const std::vector<double> xi{1.0};
    const std::vector<double> eta{2.0};
    const std::vector<double> p{0.0};
    const SymmetricMatrix zero(1);
    CHECK(spec.evaluate(0, x, xi, eta, p, zero) -
              spec.evaluate(0, x, xi, eta, p, zero) ==
          0.0);
  }
  SUBCASE("rejected without a structural form") {
    const auto raw = raw_two_component(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(check_condition_ii(raw, sampler(10)), Error);
  }
}

TEST_CASE("reports are seed-deterministic") {
  const auto spec = competitive(0.5, 2.0, 2.0);
  const auto a = check_condition_i_prime(spec, sampler(4000, 17));
  const auto b = check_condition_i_prime(spec, sampler(4000, 17));
  CHECK(to_json(a).dump() == to_json(b).dump());
  const auto c = check_condition_i_prime(spec, sampler(4000, 18));
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("enlarging the sample count never flips fail to pass") {
  const auto spec = competitive(0.5, 2.0, 2.0);
  const auto small = check_condition_i(spec, sampler(2000, 5));
  const auto large = check_condition_i(spec, sampler(8000, 5));
  REQUIRE_FALSE(small.passed);
  CHECK_FALSE(large.passed);
  // Prefix stability: the first witness is identical.
  CHECK(small.witness->value_lhs == large.witness->value_lhs);
  CHECK(small.witness->value_rhs == large.witness->value_rhs);
  CHECK(small.witness->lhs.r == large.witness->lhs.r);
  // And the empirical minimum only gets worse with more samples.
  CHECK(*large.empirical_constant <= *small.empirical_constant);
}
