#include "bqm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace bqm {

namespace {

using Json = nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw ConfigError("invalid config at " + path + ": " + msg);
}

void check_keys(const Json& obj, const std::string& path,
                const std::set<std::string>& allowed, bool strict) {
  if (!strict || !obj.is_object()) return;
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      config_error(path.empty() ? key : path + "." + key, "unknown key");
}

const Json* find(const Json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const Json& obj, const std::string& path,
                  const std::string& key, double fallback) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) config_error(path + "." + key, "expected a number");
  return v->get<double>();
}

long get_integer(const Json& obj, const std::string& path,
                 const std::string& key, long fallback) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) config_error(path + "." + key, "expected an integer");
  return v->get<long>();
}

bool get_bool(const Json& obj, const std::string& path, const std::string& key,
              bool fallback) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) config_error(path + "." + key, "expected a boolean");
  return v->get<bool>();
}

std::string get_string(const Json& obj, const std::string& path,
                       const std::string& key, const std::string& fallback) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) config_error(path + "." + key, "expected a string");
  return v->get<std::string>();
}

std::array<double, 2> get_range(const Json& obj, const std::string& path,
                                const std::string& key,
                                std::array<double, 2> fallback) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
      !(*v)[1].is_number())
    config_error(path + "." + key, "expected [low, high]");
  return {(*v)[0].get<double>(), (*v)[1].get<double>()};
}

DataFunction parse_data_function(const Json& j, const std::string& path,
                                 const Box& box, bool strict) {
  if (!j.is_object()) config_error(path, "expected an object");
  const std::string kind = get_string(j, path, "kind", "");
  if (kind == "constant") {
    check_keys(j, path, {"kind", "value"}, strict);
    return DataFunction::constant(get_number(j, path, "value", 0.0));
  }
  if (kind == "affine") {
    check_keys(j, path, {"kind", "intercept", "slope"}, strict);
    std::array<double, 2> slope{0.0, 0.0};
    if (const Json* s = find(j, "slope")) {
      if (!s->is_array() || static_cast<int>(s->size()) != box.dim)
        config_error(path + ".slope", "expected one slope per axis");
      for (int a = 0; a < box.dim; ++a)
        slope[static_cast<std::size_t>(a)] =
            (*s)[static_cast<std::size_t>(a)].get<double>();
    }
    return DataFunction::affine(get_number(j, path, "intercept", 0.0), slope);
  }
  if (kind == "sin_product") {
    check_keys(j, path, {"kind", "amplitude"}, strict);
    return DataFunction::sin_product(get_number(j, path, "amplitude", 1.0), box);
  }
  if (kind == "gaussian") {
    check_keys(j, path, {"kind", "amplitude", "center", "width"}, strict);
    std::array<double, 2> center{0.5, 0.5};
    if (const Json* c = find(j, "center")) {
      if (!c->is_array() || static_cast<int>(c->size()) != box.dim)
        config_error(path + ".center", "expected one coordinate per axis");
      for (int a = 0; a < box.dim; ++a)
        center[static_cast<std::size_t>(a)] =
            (*c)[static_cast<std::size_t>(a)].get<double>();
    }
    const double width = get_number(j, path, "width", 0.25);
    if (!(width > 0.0)) config_error(path + ".width", "must be > 0");
    return DataFunction::gaussian(get_number(j, path, "amplitude", 1.0), center,
                                  width);
  }
  config_error(path + ".kind",
               "unknown data function (expected constant, affine, "
               "sin_product or gaussian)");
}

Condition parse_condition(const std::string& name, const std::string& path) {
  for (Condition c :
       {Condition::ellipticity, Condition::mon1, Condition::mon2,
        Condition::monorig, Condition::cond_i, Condition::cond_i_prime,
        Condition::cond_ii})
    if (condition_name(c) == name) return c;
  config_error(path, "unknown check '" + name + "'");
}

const std::set<std::string>& known_assertions() {
  static const std::set<std::string> names{
      "ellipticity",       "mon1",
      "mon2",              "monorig",
      "cond_i",            "cond_i_prime",
      "cond_ii",           "barriers_verified",
      "primal_converged",  "dual_converged",
      "oracle_converged",  "solution_classified",
      "barrier_comparison", "uniqueness_agreement"};
  return names;
}

}  // namespace

OperatorSpec RunConfig::make_operator() const {
  const Box box = make_grid()->box();
  if (op.builtin == "competitive")
    return make_competitive(op.lambda, op.alpha, op.beta, op.f.fn(), op.g.fn(),
                            grid.dim, box);
  std::vector<ScalarFn> fns;
  for (const auto& d : op.data) fns.push_back(d.fn());
  return make_diagonal_linear(op.lambdas, fns, Partition(op.m1, op.m2), grid.dim,
                              box);
}

GridPtr RunConfig::make_grid() const {
  return build_grid(grid.dim, grid.bounds, grid.nodes);
}

RunConfig parse_config(const std::string& text, bool strict) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(root, "",
             {"operator", "grid", "dirichlet", "checks", "sampler", "barriers",
              "solver", "oracle", "verify", "assertions"},
             strict);

  RunConfig cfg;

  // Grid first: data functions may need the box.
  if (const Json* g = find(root, "grid")) {
    check_keys(*g, "grid", {"dim", "bounds", "nodes"}, strict);
    cfg.grid.dim = static_cast<int>(get_integer(*g, "grid", "dim", 1));
    if (cfg.grid.dim != 1 && cfg.grid.dim != 2)
      config_error("grid.dim", "must be 1 or 2");
    cfg.grid.bounds.assign(static_cast<std::size_t>(cfg.grid.dim), {0.0, 1.0});
    if (const Json* b = find(*g, "bounds")) {
      if (!b->is_array() || static_cast<int>(b->size()) != cfg.grid.dim)
        config_error("grid.bounds", "expected one [low, high] pair per axis");
      for (int a = 0; a < cfg.grid.dim; ++a) {
        const Json& pair = (*b)[static_cast<std::size_t>(a)];
        if (!pair.is_array() || pair.size() != 2)
          config_error("grid.bounds", "expected one [low, high] pair per axis");
        cfg.grid.bounds[static_cast<std::size_t>(a)] = {pair[0].get<double>(),
                                                        pair[1].get<double>()};
        if (!(pair[0].get<double>() < pair[1].get<double>()))
          config_error("grid.bounds", "bounds must satisfy low < high");
      }
    }
    cfg.grid.nodes.assign(static_cast<std::size_t>(cfg.grid.dim), 101);
    if (const Json* n = find(*g, "nodes")) {
      if (!n->is_array() || static_cast<int>(n->size()) != cfg.grid.dim)
        config_error("grid.nodes", "expected one node count per axis");
      for (int a = 0; a < cfg.grid.dim; ++a) {
        cfg.grid.nodes[static_cast<std::size_t>(a)] =
            (*n)[static_cast<std::size_t>(a)].get<int>();
        if (cfg.grid.nodes[static_cast<std::size_t>(a)] < 3)
          config_error("grid.nodes", "need at least 3 nodes per axis");
      }
    }
  } else {
    cfg.grid = GridConfig{};
  }
  std::array<double, 2> lo{0.0, 0.0}, hi{1.0, 1.0};
  for (int a = 0; a < cfg.grid.dim; ++a) {
    lo[static_cast<std::size_t>(a)] = cfg.grid.bounds[static_cast<std::size_t>(a)][0];
    hi[static_cast<std::size_t>(a)] = cfg.grid.bounds[static_cast<std::size_t>(a)][1];
  }
  const Box box = Box::make(cfg.grid.dim, lo, hi);

  if (const Json* o = find(root, "operator")) {
    cfg.op.builtin = get_string(*o, "operator", "builtin", "competitive");
    if (cfg.op.builtin == "competitive") {
      check_keys(*o, "operator", {"builtin", "lambda", "alpha", "beta", "f", "g"},
                 strict);
      cfg.op.lambda = get_number(*o, "operator", "lambda", 1.0);
      cfg.op.alpha = get_number(*o, "operator", "alpha", 1.0);
      cfg.op.beta = get_number(*o, "operator", "beta", 1.0);
      if (!(cfg.op.lambda > 0.0)) config_error("operator.lambda", "must be > 0");
      if (!(cfg.op.alpha > 0.0)) config_error("operator.alpha", "must be > 0");
      if (!(cfg.op.beta > 0.0)) config_error("operator.beta", "must be > 0");
      cfg.op.f = DataFunction::constant(1.0);
      cfg.op.g = DataFunction::constant(1.0);
      if (const Json* f = find(*o, "f"))
        cfg.op.f = parse_data_function(*f, "operator.f", box, strict);
      if (const Json* g = find(*o, "g"))
        cfg.op.g = parse_data_function(*g, "operator.g", box, strict);
      cfg.op.f.box = box;
      cfg.op.g.box = box;
      try {
        make_competitive(cfg.op.lambda, cfg.op.alpha, cfg.op.beta, cfg.op.f.fn(),
                         cfg.op.g.fn(), cfg.grid.dim, box);
      } catch (const Error& e) {
        config_error("operator", e.what());
      }
    } else if (cfg.op.builtin == "diagonal_linear") {
      check_keys(*o, "operator", {"builtin", "lambdas", "m1", "m2", "data"},
                 strict);
      const Json* lam = find(*o, "lambdas");
      if (!lam || !lam->is_array() || lam->empty())
        config_error("operator.lambdas", "expected a nonempty array");
      cfg.op.lambdas.clear();
      for (const auto& v : *lam) {
        cfg.op.lambdas.push_back(v.get<double>());
        if (!(cfg.op.lambdas.back() > 0.0))
          config_error("operator.lambdas", "entries must be > 0");
      }
      const int m = static_cast<int>(cfg.op.lambdas.size());
      cfg.op.m1 = static_cast<int>(get_integer(*o, "operator", "m1", m));
      cfg.op.m2 = static_cast<int>(get_integer(*o, "operator", "m2", 0));
      if (cfg.op.m1 < 1 || cfg.op.m2 < 0 || cfg.op.m1 + cfg.op.m2 != m)
        config_error("operator.m1", "partition must satisfy m1 + m2 = #lambdas");
      cfg.op.data.clear();
      if (const Json* d = find(*o, "data")) {
        if (!d->is_array() || static_cast<int>(d->size()) != m)
          config_error("operator.data", "expected one data function per component");
        for (std::size_t i = 0; i < d->size(); ++i)
          cfg.op.data.push_back(parse_data_function(
              (*d)[i], "operator.data[" + std::to_string(i) + "]", box, strict));
        for (auto& df : cfg.op.data) df.box = box;
      }
    } else {
      config_error("operator.builtin",
                   "unknown builtin '" + cfg.op.builtin +
                       "' (expected competitive or diagonal_linear)");
    }
  } else {
    cfg.op = OperatorConfig{};
    cfg.op.f.box = box;
    cfg.op.g.box = box;
  }

  cfg.dirichlet = get_number(root, "", "dirichlet", 0.0);
  if (!finite(cfg.dirichlet)) config_error("dirichlet", "must be finite");

  if (const Json* c = find(root, "checks")) {
    if (!c->is_array()) config_error("checks", "expected an array of names");
    cfg.checks.clear();
    for (std::size_t i = 0; i < c->size(); ++i) {
      const Json& e = (*c)[i];
      const std::string path = "checks[" + std::to_string(i) + "]";
      if (!e.is_string()) config_error(path, "expected a string");
      cfg.checks.push_back(parse_condition(e.get<std::string>(), path));
    }
  }

  if (const Json* s = find(root, "sampler")) {
    check_keys(*s, "sampler",
               {"sample_count", "value_range", "gradient_range", "matrix_scale",
                "seed"},
               strict);
    cfg.sampler.sample_count = get_integer(*s, "sampler", "sample_count", 10000);
    if (cfg.sampler.sample_count < 1)
      config_error("sampler.sample_count", "must be >= 1");
    cfg.sampler.value_range = get_range(*s, "sampler", "value_range", {-5.0, 5.0});
    cfg.sampler.gradient_range =
        get_range(*s, "sampler", "gradient_range", {-5.0, 5.0});
    if (!(cfg.sampler.value_range[0] < cfg.sampler.value_range[1]))
      config_error("sampler.value_range", "must be a nonempty interval");
    if (!(cfg.sampler.gradient_range[0] < cfg.sampler.gradient_range[1]))
      config_error("sampler.gradient_range", "must be a nonempty interval");
    cfg.sampler.matrix_scale = get_number(*s, "sampler", "matrix_scale", 5.0);
    if (!(cfg.sampler.matrix_scale > 0.0))
      config_error("sampler.matrix_scale", "must be > 0");
    const long seed = get_integer(*s, "sampler", "seed", 0);
    if (seed < 0) config_error("sampler.seed", "must be >= 0");
    cfg.sampler.seed = static_cast<std::uint64_t>(seed);
  }

  if (const Json* b = find(root, "barriers")) {
    check_keys(*b, "barriers", {"source", "z", "w", "z_path", "w_path", "tol"},
               strict);
    const std::string source = get_string(*b, "barriers", "source", "recipe");
    if (source == "recipe") {
      cfg.barriers.source = BarrierConfig::Source::recipe;
    } else if (source == "constant") {
      cfg.barriers.source = BarrierConfig::Source::constant;
      const Json* z = find(*b, "z");
      const Json* w = find(*b, "w");
      if (!z || !w || !z->is_array() || !w->is_array())
        config_error("barriers", "constant source needs arrays z and w");
      for (const auto& v : *z) cfg.barriers.z_values.push_back(v.get<double>());
      for (const auto& v : *w) cfg.barriers.w_values.push_back(v.get<double>());
    } else if (source == "csv") {
      cfg.barriers.source = BarrierConfig::Source::csv;
      cfg.barriers.z_path = get_string(*b, "barriers", "z_path", "");
      cfg.barriers.w_path = get_string(*b, "barriers", "w_path", "");
      if (cfg.barriers.z_path.empty() || cfg.barriers.w_path.empty())
        config_error("barriers", "csv source needs z_path and w_path");
    } else {
      config_error("barriers.source",
                   "expected recipe, constant or csv, got '" + source + "'");
    }
    cfg.barriers.tol = get_number(*b, "barriers", "tol", 1e-8);
    if (!(cfg.barriers.tol > 0.0)) config_error("barriers.tol", "must be > 0");
  }

  // The config layer defaults max_sweeps higher than the library-level
  // SolveConfig: the default grid/tolerance combination needs ~14k sweeps.
  cfg.solver.max_sweeps = 50000;
  if (const Json* s = find(root, "solver")) {
    check_keys(*s, "solver",
               {"tol", "max_sweeps", "monotonicity_slack", "snapshot_interval",
                "nodal_max_iterations"},
               strict);
    cfg.solver.tol = get_number(*s, "solver", "tol", 1e-8);
    cfg.solver.max_sweeps =
        static_cast<int>(get_integer(*s, "solver", "max_sweeps", 50000));
    cfg.solver.monotonicity_slack =
        get_number(*s, "solver", "monotonicity_slack", 1e-12);
    cfg.solver.snapshot_interval =
        static_cast<int>(get_integer(*s, "solver", "snapshot_interval", 0));
    cfg.solver.nodal_max_iterations = static_cast<int>(
        get_integer(*s, "solver", "nodal_max_iterations", 60));
    try {
      cfg.solver.validate();
    } catch (const Error& e) {
      config_error("solver", e.what());
    }
    if (cfg.solver.snapshot_interval < 0)
      config_error("solver.snapshot_interval", "must be >= 0");
  }

  if (const Json* o = find(root, "oracle")) {
    check_keys(*o, "oracle", {"enabled", "step_safety", "tol", "max_steps"},
               strict);
    cfg.oracle.enabled = get_bool(*o, "oracle", "enabled", true);
    cfg.oracle.step_safety = get_number(*o, "oracle", "step_safety", 0.95);
    if (!(cfg.oracle.step_safety > 0.0 && cfg.oracle.step_safety <= 1.0))
      config_error("oracle.step_safety", "must lie in (0, 1]");
    cfg.oracle.tol = get_number(*o, "oracle", "tol", 1e-8);
    if (!(cfg.oracle.tol > 0.0)) config_error("oracle.tol", "must be > 0");
    cfg.oracle.max_steps =
        static_cast<int>(get_integer(*o, "oracle", "max_steps", 200000));
    if (cfg.oracle.max_steps < 0) config_error("oracle.max_steps", "must be >= 0");
  }

  if (const Json* v = find(root, "verify")) {
    check_keys(*v, "verify", {"classification_tol", "comparison_tol"}, strict);
    if (find(*v, "classification_tol")) {
      cfg.verify.classification_tol =
          get_number(*v, "verify", "classification_tol", 0.0);
      if (!(*cfg.verify.classification_tol > 0.0))
        config_error("verify.classification_tol", "must be > 0");
    }
    if (find(*v, "comparison_tol")) {
      cfg.verify.comparison_tol = get_number(*v, "verify", "comparison_tol", 0.0);
      if (!(*cfg.verify.comparison_tol > 0.0))
        config_error("verify.comparison_tol", "must be > 0");
    }
  }

  if (const Json* a = find(root, "assertions")) {
    if (!a->is_array()) config_error("assertions", "expected an array of names");
    for (std::size_t i = 0; i < a->size(); ++i) {
      const Json& e = (*a)[i];
      const std::string path = "assertions[" + std::to_string(i) + "]";
      if (!e.is_string()) config_error(path, "expected a string");
      const std::string name = e.get<std::string>();
      if (!known_assertions().contains(name))
        config_error(path, "unknown assertion '" + name + "'");
      cfg.assertions.push_back(name);
    }
  }

  return cfg;
}

namespace {

OrderedJson data_function_json(const DataFunction& d) {
  OrderedJson j;
  j["kind"] = DataFunction::kind_name(d.kind);
  switch (d.kind) {
    case DataFunction::Kind::constant:
      j["value"] = d.value;
      break;
    case DataFunction::Kind::affine: {
      j["intercept"] = d.intercept;
      std::vector<double> slope(d.slope.begin(),
                                d.slope.begin() + d.box.dim);
      j["slope"] = slope;
      break;
    }
    case DataFunction::Kind::sin_product:
      j["amplitude"] = d.amplitude;
      break;
    case DataFunction::Kind::gaussian: {
      j["amplitude"] = d.amplitude;
      std::vector<double> center(d.center.begin(),
                                 d.center.begin() + d.box.dim);
      j["center"] = center;
      j["width"] = d.width;
      break;
    }
  }
  return j;
}

OrderedJson echo_config(const RunConfig& cfg) {
  OrderedJson j;
  OrderedJson op;
  op["builtin"] = cfg.op.builtin;
  if (cfg.op.builtin == "competitive") {
    op["lambda"] = cfg.op.lambda;
    op["alpha"] = cfg.op.alpha;
    op["beta"] = cfg.op.beta;
    op["f"] = data_function_json(cfg.op.f);
    op["g"] = data_function_json(cfg.op.g);
  } else {
    op["lambdas"] = cfg.op.lambdas;
    op["m1"] = cfg.op.m1;
    op["m2"] = cfg.op.m2;
    if (!cfg.op.data.empty()) {
      OrderedJson arr = OrderedJson::array();
      for (const auto& d : cfg.op.data) arr.push_back(data_function_json(d));
      op["data"] = arr;
    }
  }
  j["operator"] = op;

  OrderedJson grid;
  grid["dim"] = cfg.grid.dim;
  OrderedJson bounds = OrderedJson::array();
  for (const auto& b : cfg.grid.bounds) bounds.push_back({b[0], b[1]});
  grid["bounds"] = bounds;
  grid["nodes"] = cfg.grid.nodes;
  j["grid"] = grid;
  j["dirichlet"] = cfg.dirichlet;

  OrderedJson checks = OrderedJson::array();
  for (Condition c : cfg.checks) checks.push_back(condition_name(c));
  j["checks"] = checks;

  OrderedJson sampler;
  sampler["sample_count"] = cfg.sampler.sample_count;
  sampler["value_range"] = cfg.sampler.value_range;
  sampler["gradient_range"] = cfg.sampler.gradient_range;
  sampler["matrix_scale"] = cfg.sampler.matrix_scale;
  sampler["seed"] = cfg.sampler.seed;
  j["sampler"] = sampler;

  OrderedJson barriers;
  switch (cfg.barriers.source) {
    case BarrierConfig::Source::recipe:
      barriers["source"] = "recipe";
      break;
    case BarrierConfig::Source::constant:
      barriers["source"] = "constant";
      barriers["z"] = cfg.barriers.z_values;
      barriers["w"] = cfg.barriers.w_values;
      break;
    case BarrierConfig::Source::csv:
      barriers["source"] = "csv";
      barriers["z_path"] = cfg.barriers.z_path;
      barriers["w_path"] = cfg.barriers.w_path;
      break;
  }
  barriers["tol"] = cfg.barriers.tol;
  j["barriers"] = barriers;

  OrderedJson solver;
  solver["tol"] = cfg.solver.tol;
  solver["max_sweeps"] = cfg.solver.max_sweeps;
  solver["monotonicity_slack"] = cfg.solver.monotonicity_slack;
  solver["snapshot_interval"] = cfg.solver.snapshot_interval;
  solver["nodal_max_iterations"] = cfg.solver.nodal_max_iterations;
  j["solver"] = solver;

  OrderedJson oracle;
  oracle["enabled"] = cfg.oracle.enabled;
  oracle["step_safety"] = cfg.oracle.step_safety;
  oracle["tol"] = cfg.oracle.tol;
  oracle["max_steps"] = cfg.oracle.max_steps;
  j["oracle"] = oracle;

  OrderedJson verify;
  verify["classification_tol"] =
      cfg.verify.classification_tol.value_or(cfg.solver.tol);
  verify["comparison_tol"] = cfg.verify.comparison_tol.value_or(cfg.solver.tol);
  j["verify"] = verify;

  if (!cfg.assertions.empty()) j["assertions"] = cfg.assertions;
  switch (cfg.cut) {
    case StageCut::checks: j["stage_cut"] = "checks"; break;
    case StageCut::barriers: j["stage_cut"] = "barriers"; break;
    case StageCut::solve: j["stage_cut"] = "solve"; break;
    case StageCut::verify: j["stage_cut"] = "verify"; break;
  }
  return j;
}

OrderedJson eval_args_json(const EvalArgs& a, int dim) {
  OrderedJson j;
  j["x"] = std::vector<double>(a.x.begin(), a.x.begin() + dim);
  j["r"] = a.r;
  j["s"] = a.s;
  j["p"] = a.p;
  OrderedJson mat = OrderedJson::array();
  for (int row = 0; row < a.X.dim(); ++row) {
    OrderedJson rj = OrderedJson::array();
    for (int col = 0; col < a.X.dim(); ++col) rj.push_back(a.X(row, col));
    mat.push_back(rj);
  }
  j["X"] = mat;
  return j;
}

OrderedJson history_json(const std::vector<double>& history) {
  OrderedJson j;
  const std::size_t limit = 512;
  const std::size_t stride =
      history.size() <= limit ? 1 : (history.size() + limit - 1) / limit;
  j["length"] = history.size();
  j["stride"] = stride;
  OrderedJson vals = OrderedJson::array();
  for (std::size_t i = 0; i < history.size(); i += stride) vals.push_back(history[i]);
  if (!history.empty() && (history.size() - 1) % stride != 0)
    vals.push_back(history.back());
  j["values"] = vals;
  return j;
}

}  // namespace

OrderedJson to_json(const CheckReport& rep) {
  OrderedJson j;
  j["condition"] = condition_name(rep.condition);
  j["passed"] = rep.passed;
  j["samples_tested"] = rep.samples_tested;
  if (rep.empirical_constant.has_value())
    j["empirical_constant"] = *rep.empirical_constant;
  if (rep.witness.has_value()) {
    const Witness& w = *rep.witness;
    OrderedJson wj;
    wj["component"] = w.component;
    const int dim = static_cast<int>(w.lhs.p.size());
    wj["lhs"] = eval_args_json(w.lhs, dim);
    wj["rhs"] = eval_args_json(w.rhs, dim);
    wj["value_lhs"] = w.value_lhs;
    wj["value_rhs"] = w.value_rhs;
    wj["relation"] = w.relation;
    if (!w.aux.empty()) wj["aux"] = w.aux;
    j["witness"] = wj;
  }
  if (!rep.details.empty()) j["details"] = rep.details;
  return j;
}

OrderedJson to_json(const Classification& cl) {
  OrderedJson j;
  j["verdict"] = verdict_name(cl.verdict);
  j["tol"] = cl.tol;
  j["min_residual"] = cl.min_residual;
  j["max_residual"] = cl.max_residual;
  return j;
}

OrderedJson to_json(const SolveReport& rep) {
  OrderedJson j;
  j["converged"] = rep.converged;
  j["sweeps"] = rep.sweeps;
  j["monotonicity_violations"] = rep.monotonicity_violations;
  j["sandwich_violations"] = rep.sandwich_violations;
  j["residual_final"] =
      rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
  j["residual_history"] = history_json(rep.residual_history);
  return j;
}

OrderedJson to_json(const ComparisonReport& rep) {
  OrderedJson j;
  j["holds"] = rep.holds;
  j["tol"] = rep.tol;
  j["worst_group1"] = rep.worst_group1;
  j["worst_group2"] = rep.worst_group2;
  j["worst_node_group1"] = rep.worst_node_group1;
  j["worst_node_group2"] = rep.worst_node_group2;
  return j;
}

std::string to_csv(const VectorGridFunction& u) {
  const Grid& grid = u.grid();
  const Partition& part = u.partition();
  std::string out = grid.dim() == 1 ? "x" : "x,y";
  for (int j = 0; j < part.m1; ++j) out += ",u1_" + std::to_string(j + 1);
  for (int j = 0; j < part.m2; ++j) out += ",u2_" + std::to_string(j + 1);
  out += "\n";
  char buf[32];
  for (int node = 0; node < grid.total_nodes(); ++node) {
    const Point x = grid.coord(node);
    for (int a = 0; a < grid.dim(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", x[static_cast<std::size_t>(a)]);
      if (a > 0) out += ",";
      out += buf;
    }
    for (int c = 0; c < part.m(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", u.value(c, node));
      out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

VectorGridFunction from_csv(const std::string& text, GridPtr grid,
                            Partition part) {
  std::istringstream in(text);
  std::string line;
  detail::require(static_cast<bool>(std::getline(in, line)),
                  "from_csv: empty input");
  std::string expected = grid->dim() == 1 ? "x" : "x,y";
  for (int j = 0; j < part.m1; ++j) expected += ",u1_" + std::to_string(j + 1);
  for (int j = 0; j < part.m2; ++j) expected += ",u2_" + std::to_string(j + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  detail::require(line == expected,
                  "from_csv: header mismatch (expected '" + expected + "')");

  VectorGridFunction u(grid, part, 0.0);
  const int cols = grid->dim() + part.m();
  for (int node = 0; node < grid->total_nodes(); ++node) {
    detail::require(static_cast<bool>(std::getline(in, line)),
                    "from_csv: missing row for node " + std::to_string(node));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> vals;
    std::size_t pos = 0;
    while (vals.size() < static_cast<std::size_t>(cols)) {
      const std::size_t next = line.find(',', pos);
      const std::string tok = line.substr(
          pos, next == std::string::npos ? std::string::npos : next - pos);
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error("from_csv: bad number '" + tok + "' at node " +
                    std::to_string(node));
      }
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    detail::require(vals.size() == static_cast<std::size_t>(cols),
                    "from_csv: wrong column count at node " +
                        std::to_string(node));
    const Point x = grid->coord(node);
    for (int a = 0; a < grid->dim(); ++a) {
      const double got = vals[static_cast<std::size_t>(a)];
      const double want = x[static_cast<std::size_t>(a)];
      detail::require(std::abs(got - want) <= 1e-9 * (1.0 + std::abs(want)),
                      "from_csv: node " + std::to_string(node) +
                          " coordinate mismatch");
    }
    for (int c = 0; c < part.m(); ++c) {
      const double v = vals[static_cast<std::size_t>(grid->dim() + c)];
      detail::require(finite(v), "from_csv: non-finite value at node " +
                                     std::to_string(node));
      u.value(c, node) = v;
    }
  }
  return u;
}

namespace {

struct StageClock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double stop() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

struct AssertionRow {
  std::string name;
  std::string status;  // "passed" | "failed" | "skipped"
  std::string reason;
};

class AssertionSet {
 public:
  explicit AssertionSet(std::vector<std::string> explicit_names)
      : explicit_(std::move(explicit_names)) {}

  bool is_explicit(const std::string& name) const {
    return std::find(explicit_.begin(), explicit_.end(), name) !=
           explicit_.end();
  }
  bool has_explicit() const { return !explicit_.empty(); }

  void record(const std::string& name, bool passed,
              const std::string& reason = "") {
    if (has_explicit() && !is_explicit(name)) return;  // not requested
    rows_.push_back({name, passed ? "passed" : "failed", reason});
  }

  // Auto mode: the assertion is simply not evaluated; explicit mode: a
  // requested assertion that cannot be evaluated counts as failed.
  void skip(const std::string& name, const std::string& reason) {
    if (has_explicit() && is_explicit(name)) {
      rows_.push_back({name, "failed", "not evaluated: " + reason});
    } else if (!has_explicit()) {
      rows_.push_back({name, "skipped", reason});
    }
  }

  void finalize_explicit() {
    for (const auto& name : explicit_) {
      const bool seen =
          std::any_of(rows_.begin(), rows_.end(),
                      [&](const AssertionRow& r) { return r.name == name; });
      if (!seen)
        rows_.push_back({name, "failed", "not evaluated: stage not executed"});
    }
  }

  bool all_passed() const {
    return std::none_of(rows_.begin(), rows_.end(), [](const AssertionRow& r) {
      return r.status == "failed";
    });
  }

  OrderedJson json() const {
    OrderedJson arr = OrderedJson::array();
    for (const auto& r : rows_) {
      OrderedJson j;
      j["name"] = r.name;
      j["status"] = r.status;
      if (!r.reason.empty()) j["reason"] = r.reason;
      arr.push_back(j);
    }
    return arr;
  }

 private:
  std::vector<std::string> explicit_;
  std::vector<AssertionRow> rows_;
};

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult result;
  OrderedJson& report = result.report;
  report["version"] = kVersion;
  report["config"] = echo_config(cfg);
  OrderedJson stages = OrderedJson::array();
  AssertionSet assertions(cfg.assertions);

  auto stage_row = [&stages](const std::string& name, const std::string& status,
                             const std::string& reason = "") {
    OrderedJson j;
    j["name"] = name;
    j["status"] = status;
    if (!reason.empty()) j["reason"] = reason;
    stages.push_back(j);
  };

  // Operator and grid construction.
  std::optional<OperatorSpec> spec;
  GridPtr grid;
  std::string fatal;
  try {
    grid = cfg.make_grid();
    spec.emplace(cfg.make_operator());
    stage_row("setup", "ok");
  } catch (const std::exception& e) {
    fatal = e.what();
    stage_row("setup", "failed", fatal);
  }

  // Checks.
  std::map<Condition, CheckReport> check_results;
  if (fatal.empty() && !cfg.checks.empty()) {
    const StageClock clock;
    OrderedJson checks_json;
    std::optional<std::pair<CheckReport, CheckReport>> balanced;
    const auto requested = [&cfg](Condition c) {
      return std::find(cfg.checks.begin(), cfg.checks.end(), c) !=
             cfg.checks.end();
    };
    for (Condition c :
         {Condition::ellipticity, Condition::mon1, Condition::mon2,
          Condition::monorig, Condition::cond_i, Condition::cond_i_prime,
          Condition::cond_ii}) {
      if (!requested(c)) continue;
      try {
        CheckReport rep;
        if (c == Condition::mon1 || c == Condition::mon2) {
          if (!balanced.has_value())
            balanced = check_balanced_qm(*spec, cfg.sampler);
          rep = c == Condition::mon1 ? balanced->first : balanced->second;
        } else if (c == Condition::ellipticity) {
          rep = check_ellipticity(*spec, cfg.sampler);
        } else if (c == Condition::monorig) {
          rep = check_quasi_monotone(*spec, cfg.sampler);
        } else if (c == Condition::cond_i) {
          rep = check_condition_i(*spec, cfg.sampler);
        } else if (c == Condition::cond_i_prime) {
          rep = check_condition_i_prime(*spec, cfg.sampler);
        } else {
          rep = check_condition_ii(*spec, cfg.sampler);
        }
        checks_json[condition_name(c)] = to_json(rep);
        check_results[c] = std::move(rep);
      } catch (const std::exception& e) {
        OrderedJson err;
        err["error"] = e.what();
        checks_json[condition_name(c)] = err;
      }
    }
    report["checks"] = checks_json;
    result.timings["checks"] = clock.stop();
    stage_row("checks", "ok");

    for (Condition c : {Condition::ellipticity, Condition::mon1, Condition::mon2}) {
      if (!requested(c)) continue;
      const auto it = check_results.find(c);
      if (it == check_results.end())
        assertions.skip(condition_name(c), "check raised an error");
      else
        assertions.record(condition_name(c), it->second.passed,
                          it->second.passed ? "" : "structural check failed");
    }
    for (Condition c : {Condition::monorig, Condition::cond_i,
                        Condition::cond_i_prime, Condition::cond_ii}) {
      if (!requested(c) || !assertions.is_explicit(condition_name(c))) continue;
      const auto it = check_results.find(c);
      if (it == check_results.end())
        assertions.skip(condition_name(c), "check raised an error");
      else
        assertions.record(condition_name(c), it->second.passed);
    }
  } else if (fatal.empty()) {
    stage_row("checks", "skipped", "no checks requested");
  } else {
    stage_row("checks", "skipped", "setup failed");
  }

  const bool want_barriers = cfg.cut != StageCut::checks;
  const bool want_solve =
      cfg.cut == StageCut::solve || cfg.cut == StageCut::verify;
  const bool want_verify = cfg.cut == StageCut::verify;

  // Discretize.
  std::optional<DiscreteSystem> system;
  if (want_barriers && fatal.empty()) {
    try {
      system.emplace(DiscreteSystem::build(*spec, grid, cfg.dirichlet));
      OrderedJson dj;
      dj["interior_nodes"] = static_cast<long>(grid->interior().size());
      dj["max_nodal_slope"] = system->max_nodal_slope();
      report["discretize"] = dj;
      stage_row("discretize", "ok");
    } catch (const std::exception& e) {
      stage_row("discretize", "failed", e.what());
    }
  } else if (want_barriers) {
    stage_row("discretize", "skipped", "setup failed");
  }

  // Barriers.
  if (want_barriers && system.has_value()) {
    const StageClock clock;
    try {
      switch (cfg.barriers.source) {
        case BarrierConfig::Source::recipe:
          result.barriers = build_barriers(*system, cfg.barriers.tol);
          break;
        case BarrierConfig::Source::constant: {
          const Partition& part = system->partition();
          detail::require(
              static_cast<int>(cfg.barriers.z_values.size()) == part.m() &&
                  static_cast<int>(cfg.barriers.w_values.size()) == part.m(),
              "constant barriers need one value per component");
          VectorGridFunction z = VectorGridFunction::constant_interior(
              grid, part, cfg.barriers.z_values, cfg.dirichlet);
          VectorGridFunction w = VectorGridFunction::constant_interior(
              grid, part, cfg.barriers.w_values, cfg.dirichlet);
          result.barriers =
              verify_barriers(*system, std::move(z), std::move(w),
                              cfg.barriers.tol);
          break;
        }
        case BarrierConfig::Source::csv: {
          auto read_file = [](const std::string& path) {
            std::ifstream in(path);
            detail::require(static_cast<bool>(in),
                            "cannot open barrier file " + path);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
          };
          VectorGridFunction z = from_csv(read_file(cfg.barriers.z_path), grid,
                                          system->partition());
          VectorGridFunction w = from_csv(read_file(cfg.barriers.w_path), grid,
                                          system->partition());
          result.barriers =
              verify_barriers(*system, std::move(z), std::move(w),
                              cfg.barriers.tol);
          break;
        }
      }
      OrderedJson bj;
      bj["ordering_verified"] = result.barriers->ordering_verified;
      bj["z_classification"] = to_json(result.barriers->z_class);
      bj["w_classification"] = to_json(result.barriers->w_class);
      bj["policies_z2"] = result.barriers->policies_z2;
      bj["policies_w1"] = result.barriers->policies_w1;
      report["barriers"] = bj;
      stage_row("barriers", "ok");
      assertions.record("barriers_verified", true);
    } catch (const std::exception& e) {
      stage_row("barriers", "failed", e.what());
      assertions.record("barriers_verified", false, e.what());
    }
    result.timings["barriers"] = clock.stop();
  } else if (want_barriers) {
    stage_row("barriers", "skipped", "discretization unavailable");
    assertions.skip("barriers_verified", "stage skipped");
  }

  // Solve.
  std::optional<VectorGridFunction> primal, dual, oracle;
  std::optional<SolveReport> primal_rep, dual_rep, oracle_rep;
  if (want_solve && result.barriers.has_value()) {
    const StageClock clock;
    OrderedJson sj;
    try {
      auto [u, rep] = perron_solve(*system, *result.barriers, cfg.solver);
      sj["primal"] = to_json(rep);
      primal = std::move(u);
      primal_rep = std::move(rep);
      assertions.record("primal_converged", primal_rep->converged,
                        primal_rep->converged ? "" : "max_sweeps exceeded");
    } catch (const std::exception& e) {
      OrderedJson err;
      err["error"] = e.what();
      sj["primal"] = err;
      assertions.record("primal_converged", false, e.what());
    }
    try {
      auto [u, rep] = perron_solve_dual(*system, *result.barriers, cfg.solver);
      sj["dual"] = to_json(rep);
      dual = std::move(u);
      dual_rep = std::move(rep);
      assertions.record("dual_converged", dual_rep->converged,
                        dual_rep->converged ? "" : "max_sweeps exceeded");
    } catch (const std::exception& e) {
      OrderedJson err;
      err["error"] = e.what();
      sj["dual"] = err;
      assertions.record("dual_converged", false, e.what());
    }
    if (cfg.oracle.enabled) {
      try {
        const double step = cfg.oracle.step_safety / system->max_nodal_slope();
        auto [u, rep] = pseudo_time_oracle(*system, result.barriers->z, step,
                                           cfg.oracle.tol, cfg.oracle.max_steps);
        sj["oracle"] = to_json(rep);
        oracle = std::move(u);
        oracle_rep = std::move(rep);
        if (assertions.is_explicit("oracle_converged"))
          assertions.record("oracle_converged", oracle_rep->converged);
      } catch (const std::exception& e) {
        OrderedJson err;
        err["error"] = e.what();
        sj["oracle"] = err;
        if (assertions.is_explicit("oracle_converged"))
          assertions.record("oracle_converged", false, e.what());
      }
    }
    report["solve"] = sj;
    result.timings["solve"] = clock.stop();
    stage_row("solve", "ok");
    if (primal.has_value()) result.solution = primal;
  } else if (want_solve) {
    stage_row("solve", "skipped", "barriers unavailable");
    assertions.skip("primal_converged", "stage skipped");
    assertions.skip("dual_converged", "stage skipped");
  }

  // Verify.
  if (want_verify && primal.has_value()) {
    const StageClock clock;
    OrderedJson vj;
    const double ctol = cfg.verify.classification_tol.value_or(cfg.solver.tol);
    const double cmp_tol = cfg.verify.comparison_tol.value_or(cfg.solver.tol);

    const Classification sol_class = classify(*system, *primal, ctol);
    vj["solution_classification"] = to_json(sol_class);
    assertions.record(
        "solution_classified", sol_class.verdict == Verdict::solution,
        sol_class.verdict == Verdict::solution
            ? ""
            : "primal iterate classified as " + verdict_name(sol_class.verdict));

    try {
      const ComparisonReport cmp = compare_orderings(
          *system, result.barriers->w, result.barriers->z, cfg.barriers.tol);
      vj["barrier_comparison"] = to_json(cmp);
      assertions.record("barrier_comparison", cmp.holds);
    } catch (const MisclassifiedError& e) {
      OrderedJson err;
      err["error"] = e.what();
      err["classification"] = to_json(e.classification);
      vj["barrier_comparison"] = err;
      assertions.record("barrier_comparison", false, e.what());
    }

    OrderedJson pairwise;
    std::optional<double> pd, po, dq;
    if (dual.has_value()) {
      pd = primal->max_distance(*dual);
      pairwise["primal_dual"] = *pd;
    }
    if (oracle.has_value()) {
      po = primal->max_distance(*oracle);
      pairwise["primal_oracle"] = *po;
      if (dual.has_value()) {
        dq = dual->max_distance(*oracle);
        pairwise["dual_oracle"] = *dq;
      }
    }
    vj["pairwise_max_distance"] = pairwise;

    // Uniqueness evidence gate: the two comparison hypotheses must have
    // been checked and found to hold on this operator.
    OrderedJson gate;
    std::string gate_reason;
    const auto gate_check = [&](Condition c) -> bool {
      const auto it = check_results.find(c);
      if (it == check_results.end()) {
        gate_reason = "check " + condition_name(c) + " not run";
        return false;
      }
      if (!it->second.passed) {
        gate_reason = "condition " + condition_name(c) + " failed";
        return false;
      }
      return true;
    };
    const bool gate_open =
        gate_check(Condition::cond_i_prime) && gate_check(Condition::cond_ii);
    gate["open"] = gate_open;
    if (!gate_open) gate["reason"] = gate_reason;
    if (gate_open) {
      bool agree = true;
      std::string why;
      if (pd.has_value() && *pd > 2.0 * cfg.solver.tol) {
        agree = false;
        why = "primal/dual distance above 2*tol";
      }
      const double otol = 2.0 * std::max(cfg.solver.tol, cfg.oracle.tol);
      if (po.has_value() && *po > otol) {
        agree = false;
        why = "primal/oracle distance above 2*max(tol)";
      }
      if (dq.has_value() && *dq > otol) {
        agree = false;
        why = "dual/oracle distance above 2*max(tol)";
      }
      if (!dual.has_value()) {
        agree = false;
        why = "dual solution unavailable";
      }
      gate["agreement"] = agree;
      assertions.record("uniqueness_agreement", agree, why);
    } else {
      assertions.skip("uniqueness_agreement", gate_reason);
    }
    vj["uniqueness"] = gate;
    vj["comparison_tol"] = cmp_tol;

    report["verify"] = vj;
    result.timings["verify"] = clock.stop();
    stage_row("verify", "ok");
  } else if (want_verify) {
    stage_row("verify", "skipped", "no solve result");
    assertions.skip("solution_classified", "stage skipped");
    assertions.skip("barrier_comparison", "stage skipped");
    assertions.skip("uniqueness_agreement", "stage skipped");
  }

  assertions.finalize_explicit();
  report["stages"] = stages;
  report["assertions"] = assertions.json();
  result.all_assertions_passed = assertions.all_passed();
  report["all_assertions_passed"] = result.all_assertions_passed;
  return result;
}

int emit(const PipelineResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("emit: cannot create output directory " + out_dir.string());

  auto write_file = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit: cannot write " + path.string());
    out << content;
    if (!out) throw Error("emit: write failed for " + path.string());
  };

  write_file("report.json", result.report_text());

  OrderedJson timing;
  for (const auto& [k, v] : result.timings) timing[k] = v;
  write_file("timing.json", timing.dump(2) + "\n");

  if (result.barriers.has_value()) {
    write_file("barrier_z.csv", to_csv(result.barriers->z));
    write_file("barrier_w.csv", to_csv(result.barriers->w));
  }
  if (result.solution.has_value())
    write_file("solution.csv", to_csv(*result.solution));

  return result.all_assertions_passed ? 0 : 1;
}

}  // namespace bqm
