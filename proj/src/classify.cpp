#include "bqm/classify.hpp"

#include <algorithm>

namespace bqm {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::super_sub: return "super_sub";
    case Verdict::sub_super: return "sub_super";
    case Verdict::solution: return "solution";
    case Verdict::neither: return "neither";
  }
  return "?";
}

Classification classify(const DiscreteSystem& system,
                        const VectorGridFunction& U, double tol) {
  detail::require(tol >= 0.0, "classify: tol must be >= 0");
  const ResidualField res = system.residual(U);
  const Partition& part = system.partition();

  Classification cl;
  cl.tol = tol;
  cl.min_residual.resize(static_cast<std::size_t>(part.m()));
  cl.max_residual.resize(static_cast<std::size_t>(part.m()));
  for (int c = 0; c < part.m(); ++c) {
    cl.min_residual[static_cast<std::size_t>(c)] = res.component_min(c);
    cl.max_residual[static_cast<std::size_t>(c)] = res.component_max(c);
  }

  bool super_sub_ok = true;  // group 1 residuals >= -tol, group 2 <= tol
  bool sub_super_ok = true;  // mirrored
  for (int c = 0; c < part.m(); ++c) {
    const double lo = cl.min_residual[static_cast<std::size_t>(c)];
    const double hi = cl.max_residual[static_cast<std::size_t>(c)];
    if (part.is_group1(c)) {
      super_sub_ok = super_sub_ok && lo >= -tol;
      sub_super_ok = sub_super_ok && hi <= tol;
    } else {
      super_sub_ok = super_sub_ok && hi <= tol;
      sub_super_ok = sub_super_ok && lo >= -tol;
    }
  }

  if (super_sub_ok && sub_super_ok)
    cl.verdict = Verdict::solution;
  else if (super_sub_ok)
    cl.verdict = Verdict::super_sub;
  else if (sub_super_ok)
    cl.verdict = Verdict::sub_super;
  else
    cl.verdict = Verdict::neither;
  return cl;
}

namespace {

VectorGridFunction lattice_combine(const VectorGridFunction& U,
                                   const VectorGridFunction& V,
                                   bool min_on_group1) {
  detail::require(U.same_shape(V), "lattice combine: shape mismatch");
  VectorGridFunction W = U;
  const Partition& part = U.partition();
  const int total = U.grid().total_nodes();
  for (int c = 0; c < part.m(); ++c) {
    const bool take_min = part.is_group1(c) == min_on_group1;
    for (int node = 0; node < total; ++node) {
      const double a = U.value(c, node);
      const double b = V.value(c, node);
      W.value(c, node) = take_min ? std::min(a, b) : std::max(a, b);
    }
  }
  return W;
}

}  // namespace

VectorGridFunction lattice_combine_super_sub(const VectorGridFunction& U,
                                             const VectorGridFunction& V) {
  return lattice_combine(U, V, /*min_on_group1=*/true);
}

VectorGridFunction lattice_combine_sub_super(const VectorGridFunction& U,
                                             const VectorGridFunction& V) {
  return lattice_combine(U, V, /*min_on_group1=*/false);
}

VectorGridFunction family_inf_sup(
    const std::vector<VectorGridFunction>& family) {
  detail::require(!family.empty(), "family_inf_sup: family must be nonempty");
  VectorGridFunction out = family.front();
  for (std::size_t k = 1; k < family.size(); ++k)
    out = lattice_combine_super_sub(out, family[k]);
  return out;
}

ComparisonReport compare_orderings(const DiscreteSystem& system,
                                   const VectorGridFunction& U_sub_super,
                                   const VectorGridFunction& V_super_sub,
                                   double tol) {
  detail::require(U_sub_super.same_shape(V_super_sub),
                  "compare_orderings: shape mismatch");
  const Classification cu = classify(system, U_sub_super, tol);
  if (!cu.admits(Verdict::sub_super))
    throw MisclassifiedError(
        "compare_orderings: first argument is not a sub-super function (got " +
            verdict_name(cu.verdict) + ")",
        cu);
  const Classification cv = classify(system, V_super_sub, tol);
  if (!cv.admits(Verdict::super_sub))
    throw MisclassifiedError(
        "compare_orderings: second argument is not a super-sub function (got " +
            verdict_name(cv.verdict) + ")",
        cv);

  const Partition& part = system.partition();
  ComparisonReport rep;
  rep.tol = tol;
  for (int c = 0; c < part.m(); ++c) {
    for (int node = 0; node < system.grid().total_nodes(); ++node) {
      if (part.is_group1(c)) {
        const double gap = U_sub_super.value(c, node) - V_super_sub.value(c, node);
        if (gap > rep.worst_group1) {
          rep.worst_group1 = gap;
          rep.worst_node_group1 = node;
        }
      } else {
        const double gap = V_super_sub.value(c, node) - U_sub_super.value(c, node);
        if (gap > rep.worst_group2) {
          rep.worst_group2 = gap;
          rep.worst_node_group2 = node;
        }
      }
    }
  }
  rep.holds = rep.worst_group1 <= tol && rep.worst_group2 <= tol;
  return rep;
}

}  // namespace bqm
