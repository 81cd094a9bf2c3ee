#include "bqm/operator.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace bqm {

namespace {

void check_vector_finite(std::span<const double> v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!finite(v[i])) {
      std::ostringstream os;
      os << "evaluate: non-finite entry " << v[i] << " in argument '" << name
         << "' at index " << i;
      throw Error(os.str());
    }
  }
}

// Samples a callable on a coarse lattice over the box; rejects negative
// values. Used to validate competitive data functions, which the barrier
// construction requires to be nonnegative.
void check_nonnegative_on_box(const ScalarFn& fn, const Box& box,
                              const char* name) {
  const int n = 17;
  const int ny = box.dim == 2 ? n : 1;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < ny; ++k) {
      Point x{0.0, 0.0};
      x[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * i / (n - 1);
      if (box.dim == 2) x[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * k / (n - 1);
      const double v = fn(x);
      if (!(v >= 0.0)) {
        std::ostringstream os;
        os << "data function '" << name << "' is negative (" << v << ") at x = ("
           << x[0];
        if (box.dim == 2) os << ", " << x[1];
        os << ")";
        throw Error(os.str());
      }
    }
  }
}

}  // namespace

SymmetricMatrix SymmetricMatrix::from_eigen(int dim, double e0, double e1,
                                            double angle) {
  SymmetricMatrix x(dim);
  if (dim == 1) {
    x.set(0, 0, e0);
    return x;
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  x.set(0, 0, c * c * e0 + s * s * e1);
  x.set(1, 1, s * s * e0 + c * c * e1);
  x.set(0, 1, c * s * (e0 - e1));
  return x;
}

OperatorSpec::OperatorSpec(Partition part, int dim, Box box, std::string name,
                           std::map<std::string, double> params,
                           std::vector<Component> comps)
    : part_(part),
      dim_(dim),
      box_(box),
      name_(std::move(name)),
      params_(std::move(params)),
      comps_(std::move(comps)) {
  detail::require(dim_ == 1 || dim_ == 2, "OperatorSpec: dim must be 1 or 2");
  detail::require(box_.dim == dim_, "OperatorSpec: box dimension mismatch");
  detail::require(static_cast<int>(comps_.size()) == part_.m(),
                  "OperatorSpec: need one component per partition slot");
  for (const auto& c : comps_)
    detail::require(static_cast<bool>(c.evaluate),
                    "OperatorSpec: every component needs an evaluator");
}

double OperatorSpec::param(const std::string& key) const {
  auto it = params_.find(key);
  detail::require(it != params_.end(), "OperatorSpec: unknown parameter " + key);
  return it->second;
}

const Component& OperatorSpec::component(int j) const {
  detail::require(j >= 0 && j < part_.m(),
                  "OperatorSpec: component index out of range");
  return comps_[static_cast<std::size_t>(j)];
}

bool OperatorSpec::has_structural_form() const {
  for (const auto& c : comps_)
    if (!c.form.has_value()) return false;
  return true;
}

double OperatorSpec::evaluate(int j, const Point& x, std::span<const double> r,
                              std::span<const double> s,
                              std::span<const double> p,
                              const SymmetricMatrix& X) const {
  if (j < 0 || j >= part_.m()) {
    std::ostringstream os;
    os << "evaluate: component index " << j << " out of range [0, " << part_.m()
       << ")";
    throw Error(os.str());
  }
  if (static_cast<int>(r.size()) != part_.m1)
    throw Error("evaluate: argument 'r' has wrong length");
  if (static_cast<int>(s.size()) != part_.m2)
    throw Error("evaluate: argument 's' has wrong length");
  if (static_cast<int>(p.size()) != dim_)
    throw Error("evaluate: argument 'p' has wrong length");
  if (X.dim() != dim_) throw Error("evaluate: argument 'X' has wrong dimension");
  for (int a = 0; a < dim_; ++a)
    if (!finite(x[a])) throw Error("evaluate: non-finite entry in argument 'x'");
  check_vector_finite(r, "r");
  check_vector_finite(s, "s");
  check_vector_finite(p, "p");
  for (int a = 0; a < dim_; ++a)
    for (int b = a; b < dim_; ++b)
      if (!finite(X(a, b)))
        throw Error("evaluate: non-finite entry in argument 'X'");
  if (!box_.contains(x, 1e-12 * box_.diameter()))
    throw Error("evaluate: argument 'x' lies outside the domain box");

  return comps_[static_cast<std::size_t>(j)].evaluate(x, r, s, p, X);
}

double OperatorSpec::evaluate_decomposed(int j, const Point& x,
                                         std::span<const double> r,
                                         std::span<const double> s,
                                         std::span<const double> p,
                                         const SymmetricMatrix& X) const {
  const Component& c = component(j);
  detail::require(c.form.has_value(),
                  "evaluate_decomposed: component has no structural form");
  const StructuralForm& sf = *c.form;
  double acc = 0.0;
  if (sf.diffusion) {
    const auto a = sf.diffusion(x);
    for (int ax = 0; ax < dim_; ++ax) acc -= a[ax] * X(ax, ax);
  }
  if (sf.drift) {
    const auto b = sf.drift(x);
    for (int ax = 0; ax < dim_; ++ax) acc += b[ax] * p[ax];
  }
  acc += sf.coupling.eval(j, part_, r, s);
  if (sf.data) acc -= sf.data(x);
  return acc;
}

OperatorSpec make_competitive(double lambda, double alpha, double beta,
                              ScalarFn f, ScalarFn g, int dim,
                              std::optional<Box> box) {
  detail::require(lambda > 0.0, "make_competitive: lambda must be > 0");
  detail::require(alpha > 0.0, "make_competitive: alpha must be > 0");
  detail::require(beta > 0.0, "make_competitive: beta must be > 0");
  detail::require(static_cast<bool>(f), "make_competitive: f must be callable");
  detail::require(static_cast<bool>(g), "make_competitive: g must be callable");
  const Box b = box.value_or(Box::unit(dim));
  check_nonnegative_on_box(f, b, "f");
  check_nonnegative_on_box(g, b, "g");

  const Partition part(1, 1);
  std::vector<Component> comps(2);
  // Direct evaluators are written out literally, independent of the
  // structural form, so the decomposition agreement check is meaningful.
  comps[0].evaluate = [lambda, alpha, f](const Point& x,
                                         std::span<const double> r,
                                         std::span<const double> s,
                                         std::span<const double>,
                                         const SymmetricMatrix& X) {
    return -X.trace() + lambda * r[0] + alpha * std::max(r[0], s[0]) - f(x);
  };
  comps[1].evaluate = [lambda, beta, g](const Point& x,
                                        std::span<const double> r,
                                        std::span<const double> s,
                                        std::span<const double>,
                                        const SymmetricMatrix& X) {
    return -X.trace() + lambda * s[0] + beta * std::max(r[0], s[0]) - g(x);
  };

  const auto identity_diffusion = [](const Point&) {
    return std::array<double, 2>{1.0, 1.0};
  };
  for (int j = 0; j < 2; ++j) {
    StructuralForm sf;
    sf.diffusion = identity_diffusion;
    sf.constant_diffusion = true;
    const double gain = j == 0 ? alpha : beta;
    sf.coupling.kind = CouplingTerm::Kind::competitive_max;
    sf.coupling.own_lambda = lambda;
    sf.coupling.gain = gain;
    sf.coupling.generic = [lambda, gain, j](std::span<const double> r,
                                            std::span<const double> s) {
      const double own = j == 0 ? r[0] : s[0];
      return lambda * own + gain * std::max(r[0], s[0]);
    };
    sf.data = j == 0 ? f : g;
    sf.own_slope_min = lambda;
    sf.own_slope_max = lambda + gain;
    comps[static_cast<std::size_t>(j)].form = std::move(sf);
  }

  std::map<std::string, double> params{
      {"lambda", lambda}, {"alpha", alpha}, {"beta", beta}};
  return OperatorSpec(part, dim, b, "competitive", std::move(params),
                      std::move(comps));
}

OperatorSpec make_diagonal_linear(std::vector<double> lambdas,
                                  std::vector<ScalarFn> data, Partition part,
                                  int dim, std::optional<Box> box) {
  const int m = part.m();
  detail::require(static_cast<int>(lambdas.size()) == m,
                  "make_diagonal_linear: need one lambda per component");
  detail::require(data.empty() || static_cast<int>(data.size()) == m,
                  "make_diagonal_linear: need zero or m data functions");
  for (double l : lambdas)
    detail::require(l > 0.0, "make_diagonal_linear: lambda must be > 0");
  const Box b = box.value_or(Box::unit(dim));

  std::vector<Component> comps(static_cast<std::size_t>(m));
  std::map<std::string, double> params;
  for (int j = 0; j < m; ++j) {
    const double lam = lambdas[static_cast<std::size_t>(j)];
    params["lambda_" + std::to_string(j)] = lam;
    ScalarFn dj = data.empty() ? ScalarFn{} : data[static_cast<std::size_t>(j)];
    const bool g1 = part.is_group1(j);
    const int local = g1 ? j : j - part.m1;

    comps[static_cast<std::size_t>(j)].evaluate =
        [lam, dj, g1, local](const Point& x, std::span<const double> r,
                             std::span<const double> s, std::span<const double>,
                             const SymmetricMatrix& X) {
          const double own = g1 ? r[static_cast<std::size_t>(local)]
                                : s[static_cast<std::size_t>(local)];
          return -X.trace() + lam * own - (dj ? dj(x) : 0.0);
        };

    StructuralForm sf;
    sf.diffusion = [](const Point&) { return std::array<double, 2>{1.0, 1.0}; };
    sf.constant_diffusion = true;
    sf.coupling.kind = CouplingTerm::Kind::diagonal;
    sf.coupling.own_lambda = lam;
    sf.coupling.generic = [lam, g1, local](std::span<const double> r,
                                           std::span<const double> s) {
      return lam * (g1 ? r[static_cast<std::size_t>(local)]
                       : s[static_cast<std::size_t>(local)]);
    };
    sf.data = dj;
    sf.own_slope_min = lam;
    sf.own_slope_max = lam;
    comps[static_cast<std::size_t>(j)].form = std::move(sf);
  }
  return OperatorSpec(part, dim, b, "diagonal_linear", std::move(params),
                      std::move(comps));
}

}  // namespace bqm
