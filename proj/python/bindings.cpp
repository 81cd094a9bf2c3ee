#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bqm/barrier.hpp"
#include "bqm/classify.hpp"
#include "bqm/data_functions.hpp"
#include "bqm/discrete.hpp"
#include "bqm/grid.hpp"
#include "bqm/operator.hpp"
#include "bqm/pipeline.hpp"
#include "bqm/solver.hpp"
#include "bqm/structure.hpp"

namespace py = pybind11;
using namespace bqm;

namespace {

ScalarFn wrap_scalar(const std::function<double(std::vector<double>)>& f) {
  return [f](const Point& x) {
    return f(std::vector<double>(x.begin(), x.end()));
  };
}

py::dict check_report_dict(const CheckReport& rep) {
  py::dict d;
  d["condition"] = condition_name(rep.condition);
  d["passed"] = rep.passed;
  d["samples_tested"] = rep.samples_tested;
  if (rep.empirical_constant.has_value())
    d["empirical_constant"] = *rep.empirical_constant;
  d["has_witness"] = rep.witness.has_value();
  return d;
}

py::dict solve_report_dict(const SolveReport& rep) {
  py::dict d;
  d["converged"] = rep.converged;
  d["sweeps"] = rep.sweeps;
  d["monotonicity_violations"] = rep.monotonicity_violations;
  d["sandwich_violations"] = rep.sandwich_violations;
  d["residual_final"] =
      rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weakly coupled elliptic systems with two-group competitive "
            "coupling: monotone discretization, barrier construction, "
            "sandwich iteration and structural checks";

  py::register_exception<Error>(m, "BqmError");

  py::class_<Partition>(m, "Partition")
      .def(py::init<int, int>(), py::arg("m1"), py::arg("m2"))
      .def_readonly("m1", &Partition::m1)
      .def_readonly("m2", &Partition::m2)
      .def_property_readonly("m", &Partition::m);

  py::class_<Box>(m, "Box")
      .def_static("unit", &Box::unit, py::arg("dim"))
      .def_static(
          "make",
          [](int dim, std::vector<double> lo, std::vector<double> hi) {
            std::array<double, 2> l{0.0, 0.0}, h{1.0, 1.0};
            for (int a = 0; a < dim; ++a) {
              l[static_cast<std::size_t>(a)] = lo.at(static_cast<std::size_t>(a));
              h[static_cast<std::size_t>(a)] = hi.at(static_cast<std::size_t>(a));
            }
            return Box::make(dim, l, h);
          },
          py::arg("dim"), py::arg("lo"), py::arg("hi"));

  py::class_<OperatorSpec>(m, "OperatorSpec")
      .def_property_readonly("name", &OperatorSpec::name)
      .def_property_readonly("dim", &OperatorSpec::dim)
      .def_property_readonly("partition", &OperatorSpec::partition)
      .def("param", &OperatorSpec::param)
      .def("evaluate",
           [](const OperatorSpec& spec, int j, std::vector<double> x,
              std::vector<double> r, std::vector<double> s,
              std::vector<double> p, std::vector<std::vector<double>> X) {
             Point xx{0.0, 0.0};
             for (std::size_t a = 0; a < x.size() && a < 2; ++a) xx[a] = x[a];
             SymmetricMatrix mat(spec.dim());
             for (int i = 0; i < spec.dim(); ++i)
               for (int k = i; k < spec.dim(); ++k)
                 mat.set(i, k,
                         X.at(static_cast<std::size_t>(i))
                             .at(static_cast<std::size_t>(k)));
             return spec.evaluate(j, xx, r, s, p, mat);
           },
           py::arg("j"), py::arg("x"), py::arg("r"), py::arg("s"), py::arg("p"),
           py::arg("X"));

  m.def(
      "make_competitive",
      [](double lam, double alpha, double beta,
         std::function<double(std::vector<double>)> f,
         std::function<double(std::vector<double>)> g, int dim,
         std::optional<Box> box) {
        return make_competitive(lam, alpha, beta, wrap_scalar(f),
                                wrap_scalar(g), dim, box);
      },
      py::arg("lam"), py::arg("alpha"), py::arg("beta"), py::arg("f"),
      py::arg("g"), py::arg("dim") = 1, py::arg("box") = std::nullopt);

  m.def(
      "make_diagonal_linear",
      [](std::vector<double> lambdas,
         std::vector<std::function<double(std::vector<double>)>> data,
         int m1, int m2, int dim, std::optional<Box> box) {
        std::vector<ScalarFn> fns;
        for (auto& f : data) fns.push_back(wrap_scalar(f));
        return make_diagonal_linear(std::move(lambdas), std::move(fns),
                                    Partition(m1, m2), dim, box);
      },
      py::arg("lambdas"), py::arg("data"), py::arg("m1"), py::arg("m2"),
      py::arg("dim") = 1, py::arg("box") = std::nullopt);

  // Grids are shared immutable objects; expose them through the owning
  // handle rather than the raw class.
  struct PyGrid {
    GridPtr ptr;
  };
  py::class_<PyGrid>(m, "Grid")
      .def_property_readonly("dim",
                             [](const PyGrid& g) { return g.ptr->dim(); })
      .def_property_readonly(
          "total_nodes", [](const PyGrid& g) { return g.ptr->total_nodes(); })
      .def("interior", [](const PyGrid& g) { return g.ptr->interior(); })
      .def("spacing",
           [](const PyGrid& g, int axis) { return g.ptr->spacing(axis); })
      .def("coord", [](const PyGrid& g, int node) {
        const Point x = g.ptr->coord(node);
        return std::vector<double>(x.begin(), x.begin() + g.ptr->dim());
      });

  m.def(
      "build_grid",
      [](int dim, std::vector<std::vector<double>> bounds,
         std::vector<int> nodes) {
        std::vector<std::array<double, 2>> b;
        for (const auto& pair : bounds) b.push_back({pair.at(0), pair.at(1)});
        return PyGrid{build_grid(dim, b, nodes)};
      },
      py::arg("dim"), py::arg("bounds"), py::arg("nodes"));

  py::class_<VectorGridFunction>(m, "VectorGridFunction")
      .def("values",
           [](const VectorGridFunction& u, int comp) {
             const auto span = u.component(comp);
             return std::vector<double>(span.begin(), span.end());
           },
           py::arg("component"))
      .def("max_distance", &VectorGridFunction::max_distance);

  py::class_<DiscreteSystem>(m, "DiscreteSystem")
      .def_property_readonly("max_nodal_slope", &DiscreteSystem::max_nodal_slope)
      .def("residual_max",
           [](const DiscreteSystem& sys, const VectorGridFunction& u) {
             return sys.residual(u).max_abs();
           });

  m.def(
      "discretize",
      [](const OperatorSpec& spec, const PyGrid& grid, double dirichlet) {
        return DiscreteSystem::build(spec, grid.ptr, dirichlet);
      },
      py::arg("spec"), py::arg("grid"), py::arg("dirichlet") = 0.0);

  py::class_<Classification>(m, "Classification")
      .def_property_readonly(
          "verdict", [](const Classification& c) { return verdict_name(c.verdict); })
      .def_readonly("tol", &Classification::tol)
      .def_readonly("min_residual", &Classification::min_residual)
      .def_readonly("max_residual", &Classification::max_residual);

  m.def("classify", &classify, py::arg("system"), py::arg("u"), py::arg("tol"));
  m.def("lattice_combine_super_sub", &lattice_combine_super_sub);
  m.def("lattice_combine_sub_super", &lattice_combine_sub_super);
  m.def("family_inf_sup", &family_inf_sup);

  py::class_<BarrierPair>(m, "BarrierPair")
      .def_readonly("z", &BarrierPair::z)
      .def_readonly("w", &BarrierPair::w)
      .def_readonly("ordering_verified", &BarrierPair::ordering_verified)
      .def_property_readonly(
          "z_verdict",
          [](const BarrierPair& b) { return verdict_name(b.z_class.verdict); })
      .def_property_readonly(
          "w_verdict",
          [](const BarrierPair& b) { return verdict_name(b.w_class.verdict); });

  m.def(
      "build_barriers",
      [](const DiscreteSystem& system, double tol) {
        return build_barriers(system, tol);
      },
      py::arg("system"), py::arg("tol") = 1e-8);

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init([](long count, std::uint64_t seed) {
             SamplerConfig cfg;
             cfg.sample_count = count;
             cfg.seed = seed;
             return cfg;
           }),
           py::arg("sample_count") = 10000, py::arg("seed") = 0)
      .def_readwrite("sample_count", &SamplerConfig::sample_count)
      .def_readwrite("matrix_scale", &SamplerConfig::matrix_scale)
      .def_readwrite("seed", &SamplerConfig::seed);

  m.def("check_ellipticity", [](const OperatorSpec& s, const SamplerConfig& c) {
    return check_report_dict(check_ellipticity(s, c));
  });
  m.def("check_balanced_qm", [](const OperatorSpec& s, const SamplerConfig& c) {
    const auto [mon1, mon2] = check_balanced_qm(s, c);
    return py::make_tuple(check_report_dict(mon1), check_report_dict(mon2));
  });
  m.def("check_quasi_monotone",
        [](const OperatorSpec& s, const SamplerConfig& c) {
          return check_report_dict(check_quasi_monotone(s, c));
        });
  m.def("check_condition_i", [](const OperatorSpec& s, const SamplerConfig& c) {
    return check_report_dict(check_condition_i(s, c));
  });
  m.def("check_condition_i_prime",
        [](const OperatorSpec& s, const SamplerConfig& c) {
          return check_report_dict(check_condition_i_prime(s, c));
        });
  m.def("check_condition_ii",
        [](const OperatorSpec& s, const SamplerConfig& c) {
          return check_report_dict(check_condition_ii(s, c));
        });

  py::class_<SolveConfig>(m, "SolveConfig")
      .def(py::init([](double tol, int max_sweeps) {
             SolveConfig cfg;
             cfg.tol = tol;
             cfg.max_sweeps = max_sweeps;
             return cfg;
           }),
           py::arg("tol") = 1e-8, py::arg("max_sweeps") = 10000)
      .def_readwrite("tol", &SolveConfig::tol)
      .def_readwrite("max_sweeps", &SolveConfig::max_sweeps)
      .def_readwrite("snapshot_interval", &SolveConfig::snapshot_interval);

  m.def("perron_solve",
        [](const DiscreteSystem& sys, const BarrierPair& b,
           const SolveConfig& cfg) {
          auto [u, rep] = perron_solve(sys, b, cfg);
          return py::make_tuple(std::move(u), solve_report_dict(rep));
        });
  m.def("perron_solve_dual",
        [](const DiscreteSystem& sys, const BarrierPair& b,
           const SolveConfig& cfg) {
          auto [u, rep] = perron_solve_dual(sys, b, cfg);
          return py::make_tuple(std::move(u), solve_report_dict(rep));
        });
  m.def("pseudo_time_oracle",
        [](const DiscreteSystem& sys, const VectorGridFunction& u0, double step,
           double tol, int max_steps) {
          auto [u, rep] = pseudo_time_oracle(sys, u0, step, tol, max_steps);
          return py::make_tuple(std::move(u), solve_report_dict(rep));
        },
        py::arg("system"), py::arg("u0"), py::arg("step"), py::arg("tol") = 1e-8,
        py::arg("max_steps") = 200000);

  m.def(
      "run_pipeline",
      [](const std::string& config_json, bool strict) {
        const RunConfig cfg = parse_config(config_json, strict);
        const PipelineResult result = run_pipeline(cfg);
        return py::make_tuple(result.all_assertions_passed,
                              result.report_text());
      },
      py::arg("config_json"), py::arg("strict") = true,
      "Parse a JSON config, run the full pipeline, and return "
      "(all_assertions_passed, report_json_text)");

  m.attr("__version__") = "0.1.0";
}
