#include "bqm/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bqm {

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::ellipticity: return "ellipticity";
    case Condition::mon1: return "mon1";
    case Condition::mon2: return "mon2";
    case Condition::monorig: return "monorig";
    case Condition::cond_i: return "cond_i";
    case Condition::cond_i_prime: return "cond_i_prime";
    case Condition::cond_ii: return "cond_ii";
  }
  return "?";
}

double reevaluate(const OperatorSpec& spec, int component, const EvalArgs& a) {
  return spec.evaluate(component, a.x, a.r, a.s, a.p, a.X);
}

namespace {

// Floating-point slack for "exact" inequality checks: two independently
// rounded evaluations of equal real values may differ by a few ulps.
double slack_for(double v1, double v2) {
  return 1e-12 * std::max({1.0, std::abs(v1), std::abs(v2)});
}

Point draw_point(SampleRng& rng, const Box& box) {
  Point x{0.0, 0.0};
  for (int a = 0; a < box.dim; ++a)
    x[static_cast<std::size_t>(a)] =
        rng.uniform(box.lo[static_cast<std::size_t>(a)],
                    box.hi[static_cast<std::size_t>(a)]);
  return x;
}

std::vector<double> draw_vector(SampleRng& rng, int n,
                                const std::array<double, 2>& range) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& e : v) e = rng.uniform(range[0], range[1]);
  return v;
}

SymmetricMatrix draw_symmetric(SampleRng& rng, int dim, double lo, double hi) {
  const double e0 = rng.uniform(lo, hi);
  if (dim == 1) return SymmetricMatrix::from_eigen(1, e0, 0.0, 0.0);
  const double e1 = rng.uniform(lo, hi);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  return SymmetricMatrix::from_eigen(2, e0, e1, angle);
}

struct SplitView {
  std::vector<double> full;
  int m1;
  std::span<const double> r() const {
    return {full.data(), static_cast<std::size_t>(m1)};
  }
  std::span<const double> s() const {
    return {full.data() + m1, full.size() - static_cast<std::size_t>(m1)};
  }
};

EvalArgs make_args(const Point& x, const SplitView& v,
                   const std::vector<double>& p, const SymmetricMatrix& X) {
  EvalArgs a;
  a.x = x;
  a.r.assign(v.r().begin(), v.r().end());
  a.s.assign(v.s().begin(), v.s().end());
  a.p = p;
  a.X = X;
  return a;
}

double eval_split(const OperatorSpec& spec, int j, const Point& x,
                  const SplitView& v, const std::vector<double>& p,
                  const SymmetricMatrix& X) {
  return spec.evaluate(j, x, v.r(), v.s(), p, X);
}

// Common draw shared by the balanced and classical monotonicity checks,
// so their sample streams coincide and the m1 = m consistency property
// holds by construction: position, gradient, matrix, base vector, and a
// nonnegative bump per component.
struct PairDraw {
  Point x;
  std::vector<double> p;
  SymmetricMatrix X{1};
  std::vector<double> xi;
  std::vector<double> bump;
};

PairDraw draw_pair(SampleRng& rng, const OperatorSpec& spec,
                   const SamplerConfig& cfg) {
  PairDraw d;
  d.x = draw_point(rng, spec.box());
  d.p = draw_vector(rng, spec.dim(), cfg.gradient_range);
  d.X = draw_symmetric(rng, spec.dim(), -cfg.matrix_scale, cfg.matrix_scale);
  d.xi = draw_vector(rng, spec.partition().m(), cfg.value_range);
  const double halfwidth = 0.5 * (cfg.value_range[1] - cfg.value_range[0]);
  d.bump.resize(d.xi.size());
  for (auto& b : d.bump) b = rng.uniform(0.0, halfwidth);
  return d;
}

struct ViolationTracker {
  bool failed = false;
  std::optional<Witness> witness;

  // Keeps the first violation in stream order.
  void record(int component, EvalArgs lhs, EvalArgs rhs, double vl, double vr,
              std::string relation,
              std::map<std::string, double> aux = {}) {
    failed = true;
    if (witness.has_value()) return;
    Witness w;
    w.component = component;
    w.lhs = std::move(lhs);
    w.rhs = std::move(rhs);
    w.value_lhs = vl;
    w.value_rhs = vr;
    w.relation = std::move(relation);
    w.aux = std::move(aux);
    witness = std::move(w);
  }
};

}  // namespace

CheckReport check_ellipticity(const OperatorSpec& spec,
                              const SamplerConfig& cfg) {
  cfg.validate();
  SampleRng rng(cfg.seed);
  const Partition& part = spec.partition();
  ViolationTracker tracker;

  for (long k = 0; k < cfg.sample_count; ++k) {
    PairDraw d = draw_pair(rng, spec, cfg);
    const SymmetricMatrix P =
        draw_symmetric(rng, spec.dim(), 0.0, cfg.matrix_scale);
    const SymmetricMatrix Y = d.X + P;
    const SplitView v{d.xi, part.m1};
    for (int j = 0; j < part.m() && !tracker.failed; ++j) {
      const double fx = eval_split(spec, j, d.x, v, d.p, d.X);
      const double fy = eval_split(spec, j, d.x, v, d.p, Y);
      if (fy - fx > slack_for(fx, fy)) {
        EvalArgs lhs = make_args(d.x, v, d.p, d.X);
        EvalArgs rhs = make_args(d.x, v, d.p, Y);
        tracker.record(j, std::move(lhs), std::move(rhs), fx, fy,
                       "expected F(X) >= F(Y) for X <= Y");
      }
    }
    if (tracker.failed) break;
  }

  CheckReport rep;
  rep.condition = Condition::ellipticity;
  rep.samples_tested = cfg.sample_count;
  rep.passed = !tracker.failed;
  rep.witness = std::move(tracker.witness);
  return rep;
}

std::pair<CheckReport, CheckReport> check_balanced_qm(const OperatorSpec& spec,
                                                      const SamplerConfig& cfg) {
  cfg.validate();
  SampleRng rng(cfg.seed);
  const Partition& part = spec.partition();
  ViolationTracker t1, t2;

  for (long k = 0; k < cfg.sample_count; ++k) {
    const PairDraw d = draw_pair(rng, spec, cfg);
    const SplitView base{d.xi, part.m1};

    // Group-1 inequalities.
    for (int j = 0; j < part.m1; ++j) {
      const double f_base = eval_split(spec, j, d.x, base, d.p, d.X);
      {
        // Raising group-2 values must not lower F_j.
        SplitView up{d.xi, part.m1};
        for (int i = part.m1; i < part.m(); ++i)
          up.full[static_cast<std::size_t>(i)] +=
              d.bump[static_cast<std::size_t>(i)];
        const double f_up = eval_split(spec, j, d.x, up, d.p, d.X);
        if (f_base - f_up > slack_for(f_base, f_up) && !t1.failed)
          t1.record(j, make_args(d.x, base, d.p, d.X),
                    make_args(d.x, up, d.p, d.X), f_base, f_up,
                    "expected F_j(x, r, s, p, X) <= F_j(x, r, sigma, p, X) "
                    "for s <= sigma");
      }
      {
        // Raising the other group-1 values must not raise F_j.
        SplitView up{d.xi, part.m1};
        for (int i = 0; i < part.m1; ++i)
          if (i != j)
            up.full[static_cast<std::size_t>(i)] +=
                d.bump[static_cast<std::size_t>(i)];
        const double f_up = eval_split(spec, j, d.x, up, d.p, d.X);
        if (f_up - f_base > slack_for(f_base, f_up) && !t1.failed)
          t1.record(j, make_args(d.x, base, d.p, d.X),
                    make_args(d.x, up, d.p, d.X), f_base, f_up,
                    "expected F_j(x, r, s, p, X) >= F_j(x, rho, s, p, X) "
                    "for r <= rho with r_j = rho_j");
      }
    }

    // Group-2 inequalities (vacuous when m2 = 0).
    for (int j = 0; j < part.m2; ++j) {
      const int comp = part.m1 + j;
      const double f_base = eval_split(spec, comp, d.x, base, d.p, d.X);
      {
        SplitView up{d.xi, part.m1};
        for (int i = 0; i < part.m1; ++i)
          up.full[static_cast<std::size_t>(i)] +=
              d.bump[static_cast<std::size_t>(i)];
        const double f_up = eval_split(spec, comp, d.x, up, d.p, d.X);
        if (f_base - f_up > slack_for(f_base, f_up) && !t2.failed)
          t2.record(comp, make_args(d.x, base, d.p, d.X),
                    make_args(d.x, up, d.p, d.X), f_base, f_up,
                    "expected F_{m1+j}(x, r, s, p, X) <= F_{m1+j}(x, rho, s, "
                    "p, X) for r <= rho");
      }
      {
        SplitView up{d.xi, part.m1};
        for (int i = part.m1; i < part.m(); ++i)
          if (i != comp)
            up.full[static_cast<std::size_t>(i)] +=
                d.bump[static_cast<std::size_t>(i)];
        const double f_up = eval_split(spec, comp, d.x, up, d.p, d.X);
        if (f_up - f_base > slack_for(f_base, f_up) && !t2.failed)
          t2.record(comp, make_args(d.x, base, d.p, d.X),
                    make_args(d.x, up, d.p, d.X), f_base, f_up,
                    "expected F_{m1+j}(x, r, s, p, X) >= F_{m1+j}(x, r, "
                    "sigma, p, X) for s <= sigma with s_j = sigma_j");
      }
    }
    if (t1.failed && t2.failed) break;
  }

  CheckReport r1, r2;
  r1.condition = Condition::mon1;
  r1.samples_tested = cfg.sample_count;
  r1.passed = !t1.failed;
  r1.witness = std::move(t1.witness);
  r2.condition = Condition::mon2;
  r2.samples_tested = part.m2 == 0 ? 0 : cfg.sample_count;
  r2.passed = !t2.failed;
  r2.witness = std::move(t2.witness);
  return {std::move(r1), std::move(r2)};
}

CheckReport check_quasi_monotone(const OperatorSpec& spec,
                                 const SamplerConfig& cfg) {
  cfg.validate();
  SampleRng rng(cfg.seed);
  const Partition& part = spec.partition();
  const int m = part.m();
  ViolationTracker tracker;

  for (long k = 0; k < cfg.sample_count && !tracker.failed; ++k) {
    const PairDraw d = draw_pair(rng, spec, cfg);
    const SplitView base{d.xi, part.m1};
    for (int j = 0; j < m && !tracker.failed; ++j) {
      SplitView up{d.xi, part.m1};
      for (int i = 0; i < m; ++i)
        if (i != j)
          up.full[static_cast<std::size_t>(i)] +=
              d.bump[static_cast<std::size_t>(i)];
      const double f_base = eval_split(spec, j, d.x, base, d.p, d.X);
      const double f_up = eval_split(spec, j, d.x, up, d.p, d.X);
      if (f_up - f_base > slack_for(f_base, f_up))
        tracker.record(j, make_args(d.x, up, d.p, d.X),
                       make_args(d.x, base, d.p, d.X), f_up, f_base,
                       "expected F_j(x, eta, p, X) <= F_j(x, xi, p, X) for "
                       "xi <= eta with xi_j = eta_j");
    }
  }

  CheckReport rep;
  rep.condition = Condition::monorig;
  rep.samples_tested = cfg.sample_count;
  rep.passed = !tracker.failed;
  rep.witness = std::move(tracker.witness);
  return rep;
}

namespace {

// A share of the margin samples probes near-extremal configurations where
// every off-attaining coordinate moves by almost the full gap; uniform
// draws alone approach the worst-case ratio too slowly to report a sharp
// empirical constant.
constexpr int kCornerStride = 4;

}  // namespace

CheckReport check_condition_i(const OperatorSpec& spec,
                              const SamplerConfig& cfg) {
  cfg.validate();
  SampleRng rng(cfg.seed);
  const Partition& part = spec.partition();
  const int m = part.m();
  const double halfwidth = 0.5 * (cfg.value_range[1] - cfg.value_range[0]);

  double min_ratio = std::numeric_limits<double>::infinity();
  ViolationTracker tracker;

  for (long k = 0; k < cfg.sample_count; ++k) {
    const Point x = draw_point(rng, spec.box());
    const std::vector<double> p = draw_vector(rng, spec.dim(), cfg.gradient_range);
    const SymmetricMatrix X =
        draw_symmetric(rng, spec.dim(), -cfg.matrix_scale, cfg.matrix_scale);
    std::vector<double> xi = draw_vector(rng, m, cfg.value_range);
    std::vector<double> eta(xi.size());

    if (k % kCornerStride == kCornerStride - 1) {
      const double delta = rng.uniform(0.1, halfwidth);
      const int j = rng.below(m);
      for (int i = 0; i < m; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (i == j) {
          eta[ii] = xi[ii] - delta;
        } else {
          const double mag = delta * rng.uniform(0.9, 1.0 - 1e-6);
          eta[ii] = xi[ii] + (rng.coin() ? mag : -mag);
        }
      }
    } else {
      for (std::size_t i = 0; i < eta.size(); ++i)
        eta[i] = xi[i] + rng.uniform(-halfwidth, halfwidth);
    }

    int jstar = 0;
    double amax = -1.0;
    for (int i = 0; i < m; ++i) {
      const double gap = std::abs(xi[static_cast<std::size_t>(i)] -
                                  eta[static_cast<std::size_t>(i)]);
      if (gap > amax) {
        amax = gap;
        jstar = i;
      }
    }
    if (!(amax > 0.0)) continue;  // degenerate xi = eta draw
    if (xi[static_cast<std::size_t>(jstar)] <
        eta[static_cast<std::size_t>(jstar)])
      std::swap(xi, eta);
    const double gap = xi[static_cast<std::size_t>(jstar)] -
                       eta[static_cast<std::size_t>(jstar)];

    const SplitView vxi{xi, part.m1};
    const SplitView veta{eta, part.m1};
    const double fxi = eval_split(spec, jstar, x, vxi, p, X);
    const double feta = eval_split(spec, jstar, x, veta, p, X);
    const double ratio = (fxi - feta) / gap;
    if (ratio < min_ratio) min_ratio = ratio;
    if (ratio <= 0.0)
      tracker.record(jstar, make_args(x, vxi, p, X), make_args(x, veta, p, X),
                     fxi, feta,
                     "expected F_j(x, xi, p, X) - F_j(x, eta, p, X) >= "
                     "lambda (xi_j - eta_j) with lambda > 0",
                     {{"gap", gap}, {"ratio", ratio}});
  }

  CheckReport rep;
  rep.condition = Condition::cond_i;
  rep.samples_tested = cfg.sample_count;
  rep.passed = !tracker.failed;
  rep.witness = std::move(tracker.witness);
  if (std::isfinite(min_ratio)) rep.empirical_constant = min_ratio;
  return rep;
}

CheckReport check_condition_i_prime(const OperatorSpec& spec,
                                    const SamplerConfig& cfg) {
  cfg.validate();
  SampleRng rng(cfg.seed);
  const Partition& part = spec.partition();
  const int m = part.m();
  const double halfwidth = 0.5 * (cfg.value_range[1] - cfg.value_range[0]);

  double min_ratio = std::numeric_limits<double>::infinity();
  ViolationTracker tracker;
  long retries_left = 64 * cfg.sample_count;

  for (long k = 0; k < cfg.sample_count; ++k) {
    Point x;
    std::vector<double> p;
    SymmetricMatrix X{spec.dim()};
    std::vector<double> xi, partner;
    int attain = -1;
    double theta = 0.0;

    // theta <= 0 draws carry no information for the one-sided margin;
    // they are discarded and redrawn from the same stream.
    while (true) {
      detail::require(--retries_left > 0,
                      "check_condition_i_prime: too many degenerate draws");
      x = draw_point(rng, spec.box());
      p = draw_vector(rng, spec.dim(), cfg.gradient_range);
      X = draw_symmetric(rng, spec.dim(), -cfg.matrix_scale, cfg.matrix_scale);
      xi = draw_vector(rng, m, cfg.value_range);
      partner.assign(xi.begin(), xi.end());

      if (k % kCornerStride == kCornerStride - 1) {
        const double delta = rng.uniform(0.1, halfwidth);
        const bool g2_corner = part.m2 > 0 && rng.coin();
        const int j = g2_corner ? part.m1 + rng.below(part.m2)
                                : rng.below(part.m1);
        for (int i = 0; i < m; ++i) {
          const auto ii = static_cast<std::size_t>(i);
          const double mag =
              i == j ? delta : delta * rng.uniform(0.9, 1.0 - 1e-6);
          // Group-1 coordinates of the partner move down, group-2 up; the
          // attaining coordinate moves the full gap.
          partner[ii] = xi[ii] + (part.is_group1(i) ? -mag : mag);
        }
      } else {
        for (std::size_t i = 0; i < partner.size(); ++i)
          partner[i] = xi[i] + rng.uniform(-halfwidth, halfwidth);
      }

      theta = 0.0;
      attain = -1;
      for (int i = 0; i < m; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double gap = part.is_group1(i) ? xi[ii] - partner[ii]
                                             : partner[ii] - xi[ii];
        if (gap > theta) {
          theta = gap;
          attain = i;
        }
      }
      if (theta > 0.0) break;
    }

    const SplitView v1{xi, part.m1};
    const SplitView v2{partner, part.m1};
    double lhs, rhs;
    if (part.is_group1(attain)) {
      lhs = eval_split(spec, attain, x, v1, p, X);
      rhs = eval_split(spec, attain, x, v2, p, X);
    } else {
      lhs = eval_split(spec, attain, x, v2, p, X);
      rhs = eval_split(spec, attain, x, v1, p, X);
    }
    const double ratio = (lhs - rhs) / theta;
    if (ratio < min_ratio) min_ratio = ratio;
    if (ratio <= 0.0) {
      const bool g1 = part.is_group1(attain);
      tracker.record(
          attain, make_args(x, g1 ? v1 : v2, p, X),
          make_args(x, g1 ? v2 : v1, p, X), lhs, rhs,
          g1 ? "expected F_j(x, r, s, p, X) - F_j(x, rho, sigma, p, X) >= "
               "lambda theta at a group-1 attaining index"
             : "expected F_{m1+j}(x, rho, sigma, p, X) - F_{m1+j}(x, r, s, "
               "p, X) >= lambda theta at a group-2 attaining index",
          {{"theta", theta}, {"ratio", ratio}});
    }
  }

  CheckReport rep;
  rep.condition = Condition::cond_i_prime;
  rep.samples_tested = cfg.sample_count;
  rep.passed = !tracker.failed;
  rep.witness = std::move(tracker.witness);
  if (std::isfinite(min_ratio)) rep.empirical_constant = min_ratio;
  return rep;
}

CheckReport check_condition_ii(const OperatorSpec& spec,
                               const SamplerConfig& cfg) {
  cfg.validate();
  detail::require(spec.has_structural_form(),
                  "check_condition_ii: requires a declared structural form");
  for (int j = 0; j < spec.num_components(); ++j)
    detail::require(spec.component(j).form->constant_diffusion,
                    "check_condition_ii: requires constant diagonal diffusion");

  SampleRng rng(cfg.seed);
  const Partition& part = spec.partition();
  const int m = part.m();
  const Box& box = spec.box();

  // Linear modulus candidate omega(t) = L t. The data functions enter
  // through |f(x) - f(y)| <= Lip_f |x - y| <= (Lip_f / 2)(a|x-y|^2 + 1/a)
  // and a position-dependent drift through its own Lipschitz constant;
  // the sampled estimates get a 25% headroom.
  double data_lip = 0.0;
  double drift_lip = 0.0;
  for (int j = 0; j < m; ++j) {
    const StructuralForm& sf = *spec.component(j).form;
    for (int t = 0; t < 256; ++t) {
      const Point a = draw_point(rng, box);
      const Point b = draw_point(rng, box);
      double dist2 = 0.0;
      for (int ax = 0; ax < box.dim; ++ax) {
        const double d = a[static_cast<std::size_t>(ax)] -
                         b[static_cast<std::size_t>(ax)];
        dist2 += d * d;
      }
      const double dist = std::sqrt(dist2);
      if (dist < 1e-9) continue;
      if (sf.data)
        data_lip = std::max(data_lip, std::abs(sf.data(a) - sf.data(b)) / dist);
      if (sf.drift) {
        const auto ba = sf.drift(a);
        const auto bb = sf.drift(b);
        double diff = 0.0;
        for (int ax = 0; ax < box.dim; ++ax)
          diff = std::max(diff, std::abs(ba[static_cast<std::size_t>(ax)] -
                                         bb[static_cast<std::size_t>(ax)]));
        drift_lip = std::max(drift_lip, diff / dist);
      }
    }
  }
  const double omega_slope = 1.25 * (0.5 * data_lip + drift_lip);

  double max_excess = -std::numeric_limits<double>::infinity();
  ViolationTracker tracker;

  for (long k = 0; k < cfg.sample_count; ++k) {
    const double alpha = rng.uniform(0.1, 20.0);
    const Point x = draw_point(rng, box);
    const Point y = draw_point(rng, box);
    const std::vector<double> xi = draw_vector(rng, m, cfg.value_range);
    // Both matrices negative semidefinite with eigenvalues in [-3 alpha, 0]:
    // an admissible slice of the doubling matrix inequality, since the
    // coupled quadratic form is then nonpositive.
    const SymmetricMatrix X = draw_symmetric(rng, spec.dim(), -3.0 * alpha, 0.0);
    const SymmetricMatrix Y = draw_symmetric(rng, spec.dim(), -3.0 * alpha, 0.0);

    std::vector<double> p(static_cast<std::size_t>(spec.dim()));
    double dist2 = 0.0;
    for (int ax = 0; ax < spec.dim(); ++ax) {
      const auto ii = static_cast<std::size_t>(ax);
      p[ii] = alpha * (x[ii] - y[ii]);
      dist2 += (x[ii] - y[ii]) * (x[ii] - y[ii]);
    }
    const double bound_arg = alpha * dist2 + 1.0 / alpha;
    const double bound = omega_slope * bound_arg;

    const SplitView v{xi, part.m1};
    for (int j = 0; j < m; ++j) {
      const double lhs = eval_split(spec, j, y, v, p, -Y);
      const double rhs = eval_split(spec, j, x, v, p, X);
      const double excess = (lhs - rhs) - bound;
      if (excess > max_excess) max_excess = excess;
      if (excess > slack_for(lhs, rhs) && !tracker.failed) {
        EvalArgs la = make_args(y, v, p, -Y);
        EvalArgs ra = make_args(x, v, p, X);
        tracker.record(j, std::move(la), std::move(ra), lhs, rhs,
                       "expected F_j(y, xi, alpha(x-y), -Y) - F_j(x, xi, "
                       "alpha(x-y), X) <= omega(alpha |x-y|^2 + 1/alpha)",
                       {{"alpha", alpha},
                        {"bound", bound},
                        {"omega_slope", omega_slope}});
      }
    }
  }

  CheckReport rep;
  rep.condition = Condition::cond_ii;
  rep.samples_tested = cfg.sample_count;
  rep.passed = !tracker.failed;
  rep.witness = std::move(tracker.witness);
  if (std::isfinite(max_excess)) rep.empirical_constant = max_excess;
  rep.details["omega_slope"] = omega_slope;
  rep.details["data_lipschitz"] = data_lip;
  rep.details["drift_lipschitz"] = drift_lip;
  return rep;
}

}  // namespace bqm
