#include <doctest.h>

#include <cmath>
#include <vector>

#include "bqm/data_functions.hpp"
#include "bqm/operator.hpp"
#include "bqm/rng.hpp"

using namespace bqm;

namespace {

ScalarFn constant(double v) {
  return [v](const Point&) { return v; };
}

std::vector<double> vec(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("competitive evaluation matches hand substitution") {
  const Point x{0.25, 0.0};
  const SymmetricMatrix zero(1);

  SUBCASE("all-zero arguments with zero data") {
    auto spec = make_competitive(1.0, 1.0, 1.0, constant(0.0), constant(0.0), 1);
    CHECK(spec.evaluate(0, x, vec({0.0}), vec({0.0}), vec({0.0}), zero) == 0.0);
    CHECK(spec.evaluate(1, x, vec({0.0}), vec({0.0}), vec({0.0}), zero) == 0.0);
  }

  SUBCASE("coupling picks the larger component") {
    auto spec = make_competitive(1.0, 2.0, 1.0, constant(0.0), constant(0.0), 1);
    // lambda r + alpha max(r, s) = 1*1 + 2*max(1,3) = 7
    CHECK(spec.evaluate(0, x, vec({1.0}), vec({3.0}), vec({0.0}), zero) == 7.0);
  }

  SUBCASE("second-order term is minus the trace") {
    auto spec = make_competitive(1.0, 1.0, 1.0, constant(0.0), constant(0.0), 1);
    const SymmetricMatrix X = SymmetricMatrix::diagonal(1, 2.0);
    CHECK(spec.evaluate(0, x, vec({0.0}), vec({0.0}), vec({0.0}), X) == -2.0);
  }

  SUBCASE("direct substitution with data") {
    auto spec = make_competitive(2.0, 0.5, 0.5, constant(1.0), constant(2.0), 1);
    // F_2 = lambda s + beta max(r, s) - g = 2*0 + 0.5*1 - 2
    CHECK(spec.evaluate(1, x, vec({1.0}), vec({0.0}), vec({0.0}), zero) ==
          doctest::Approx(-1.5).epsilon(1e-15));
  }
}

TEST_CASE("competitive construction and partition") {
  auto spec = make_competitive(1.0, 1.0, 1.0, constant(1.0), constant(1.0), 1);
  CHECK(spec.partition().m1 == 1);
  CHECK(spec.partition().m2 == 1);
  CHECK(spec.partition().m() == 2);
  CHECK(spec.name() == "competitive");
  CHECK(spec.has_structural_form());
}

TEST_CASE("competitive rejects bad parameters") {
  CHECK_THROWS_AS(
      make_competitive(-1.0, 1.0, 1.0, constant(0.0), constant(0.0), 1), Error);
  CHECK_THROWS_AS(
      make_competitive(1.0, 0.0, 1.0, constant(0.0), constant(0.0), 1), Error);
  CHECK_THROWS_AS(
      make_competitive(1.0, 1.0, -0.5, constant(0.0), constant(0.0), 1), Error);
  // Negative data is caught on the sampling lattice.
  CHECK_THROWS_AS(
      make_competitive(1.0, 1.0, 1.0, constant(-1.0), constant(0.0), 1), Error);
  CHECK_THROWS_AS(make_competitive(1.0, 1.0, 1.0,
                                   [](const Point& x) { return x[0] - 0.5; },
                                   constant(0.0), 1),
                  Error);
}

TEST_CASE("evaluate validates its arguments") {
  auto spec = make_competitive(1.0, 1.0, 1.0, constant(0.0), constant(0.0), 1);
  const Point x{0.5, 0.0};
  const SymmetricMatrix zero(1);

  CHECK_THROWS_WITH_AS(
      spec.evaluate(2, x, vec({0.0}), vec({0.0}), vec({0.0}), zero),
      doctest::Contains("component index"), Error);
  CHECK_THROWS_WITH_AS(
      spec.evaluate(0, x, vec({0.0, 1.0}), vec({0.0}), vec({0.0}), zero),
      doctest::Contains("'r'"), Error);
  CHECK_THROWS_WITH_AS(
      spec.evaluate(0, x, vec({0.0}), vec({0.0}), vec({0.0, 0.0}), zero),
      doctest::Contains("'p'"), Error);
  const double nan = std::nan("");
  CHECK_THROWS_WITH_AS(
      spec.evaluate(0, x, vec({nan}), vec({0.0}), vec({0.0}), zero),
      doctest::Contains("'r'"), Error);
  const Point outside{2.0, 0.0};
  CHECK_THROWS_WITH_AS(
      spec.evaluate(0, outside, vec({0.0}), vec({0.0}), vec({0.0}), zero),
      doctest::Contains("'x'"), Error);
}

TEST_CASE("diagonal linear family") {
  auto spec = make_diagonal_linear({1.0, 3.0}, {}, Partition(2, 0), 1);
  const Point x{0.5, 0.0};
  const SymmetricMatrix zero(1);
  CHECK(spec.evaluate(0, x, vec({0.0, 0.0}), {}, vec({0.0}), zero) == 0.0);
  // F_2 at own value 2 with lambda_2 = 3.
  CHECK(spec.evaluate(1, x, vec({0.0, 2.0}), {}, vec({0.0}), zero) == 6.0);
  CHECK_THROWS_AS(make_diagonal_linear({1.0, 0.0}, {}, Partition(2, 0), 1),
                  Error);
}

TEST_CASE("declared decomposition agrees with direct evaluation") {
  const auto agree = [](const OperatorSpec& spec, std::uint64_t seed) {
    SampleRng rng(seed);
    const Partition& part = spec.partition();
    for (int k = 0; k < 10000; ++k) {
      const Point x{rng.uniform(0.0, 1.0), 0.0};
      std::vector<double> r(static_cast<std::size_t>(part.m1));
      std::vector<double> s(static_cast<std::size_t>(part.m2));
      for (auto& v : r) v = rng.uniform(-5.0, 5.0);
      for (auto& v : s) v = rng.uniform(-5.0, 5.0);
      const std::vector<double> p{rng.uniform(-5.0, 5.0)};
      const SymmetricMatrix X =
          SymmetricMatrix::diagonal(1, rng.uniform(-5.0, 5.0));
      for (int j = 0; j < part.m(); ++j) {
        const double direct = spec.evaluate(j, x, r, s, p, X);
        const double decomposed = spec.evaluate_decomposed(j, x, r, s, p, X);
        REQUIRE(std::abs(direct - decomposed) <= 1e-12);
      }
    }
  };
  agree(make_competitive(1.5, 0.7, 1.2,
                         [](const Point& x) { return 1.0 + x[0]; },
                         [](const Point& x) { return 2.0 - x[0]; }, 1),
        7);
  agree(make_diagonal_linear({1.0, 2.5, 0.3},
                             {constant(1.0), constant(0.5), constant(2.0)},
                             Partition(2, 1), 1),
        8);
}

TEST_CASE("evaluation is pure: repeated calls are bit-identical") {
  auto spec = make_competitive(1.0, 2.0, 3.0, constant(0.5), constant(0.25), 2,
                               Box::unit(2));
  const Point x{0.3, 0.7};
  const std::vector<double> r{1.25};
  const std::vector<double> s{-0.5};
  const std::vector<double> p{0.1, -0.2};
  const SymmetricMatrix X = SymmetricMatrix::from_eigen(2, -1.0, 2.0, 0.33);
  const double first = spec.evaluate(0, x, r, s, p, X);
  for (int k = 0; k < 100; ++k)
    REQUIRE(spec.evaluate(0, x, r, s, p, X) == first);
}

TEST_CASE("competitive F_1 is nondecreasing in the group-2 value") {
  auto spec = make_competitive(1.0, 0.8, 1.3, constant(1.0), constant(1.0), 1);
  SampleRng rng(11);
  for (int k = 0; k < 2000; ++k) {
    const Point x{rng.uniform(0.0, 1.0), 0.0};
    const std::vector<double> r{rng.uniform(-5.0, 5.0)};
    const double s0 = rng.uniform(-5.0, 5.0);
    const double s1 = s0 + rng.uniform(0.0, 5.0);
    const std::vector<double> p{rng.uniform(-5.0, 5.0)};
    const SymmetricMatrix X = SymmetricMatrix::diagonal(1, rng.uniform(-5.0, 5.0));
    const std::vector<double> vs0{s0};
    const std::vector<double> vs1{s1};
    const double lo = spec.evaluate(0, x, r, vs0, p, X);
    const double hi = spec.evaluate(0, x, r, vs1, p, X);
    REQUIRE(lo <= hi + 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)}));
  }
}

TEST_CASE("data function catalog") {
  const Box box1 = Box::unit(1);
  const Box box2 = Box::unit(2);

  auto c = DataFunction::constant(2.5);
  CHECK(c(Point{0.3, 0.0}) == 2.5);

  auto a = DataFunction::affine(1.0, {2.0, 0.0});
  CHECK(a(Point{0.25, 0.0}) == doctest::Approx(1.5).epsilon(1e-15));

  auto s = DataFunction::sin_product(3.0, box2);
  CHECK(s(Point{0.5, 0.5}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s(Point{0.0, 0.5}) == doctest::Approx(0.0).epsilon(1e-14));

  auto g = DataFunction::gaussian(2.0, {0.5, 0.5}, 0.25);
  g.box = box1;
  // In 1D only the first coordinate contributes to the distance.
  CHECK(g(Point{0.5, 0.0}) == 2.0);
  CHECK(g(Point{0.75, 0.0}) ==
        doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
  g.box = box2;
  CHECK(g(Point{0.5, 0.5}) == 2.0);

  CHECK_THROWS_AS(DataFunction::gaussian(1.0, {0.5, 0.5}, 0.0), Error);
}

TEST_CASE("symmetric matrix stays symmetric and rotates eigenvalues") {
  SymmetricMatrix x(2);
  x.set(0, 1, 3.5);
  CHECK(x(1, 0) == 3.5);
  const SymmetricMatrix y = SymmetricMatrix::from_eigen(2, 2.0, -1.0, 0.7);
  CHECK(y(0, 1) == y(1, 0));
  CHECK(y.trace() == doctest::Approx(1.0).epsilon(1e-14));
}
