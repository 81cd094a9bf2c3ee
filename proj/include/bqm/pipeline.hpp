// Run configuration, pipeline orchestration and report emission. The
// pipeline is linear -- checks, discretize, barriers, solve, verify --
// and a run cuts it after any stage. Reports serialize deterministically:
// identical config and seed give byte-identical JSON and CSV output
// (wall-clock timings go to a separate file).
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bqm/barrier.hpp"
#include "bqm/classify.hpp"
#include "bqm/data_functions.hpp"
#include "bqm/solver.hpp"
#include "bqm/structure.hpp"

namespace bqm {

using OrderedJson = nlohmann::ordered_json;

enum class StageCut { checks, barriers, solve, verify };

struct OperatorConfig {
  std::string builtin = "competitive";
  // competitive parameters
  double lambda = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  DataFunction f = DataFunction::constant(1.0);
  DataFunction g = DataFunction::constant(1.0);
  // diagonal_linear parameters
  std::vector<double> lambdas;
  std::vector<DataFunction> data;
  int m1 = 1;
  int m2 = 0;
};

struct GridConfig {
  int dim = 1;
  std::vector<std::array<double, 2>> bounds{{0.0, 1.0}};
  std::vector<int> nodes{101};
};

struct BarrierConfig {
  enum class Source { recipe, constant, csv };
  Source source = Source::recipe;
  std::vector<double> z_values;  // per component, constant source
  std::vector<double> w_values;
  std::string z_path;  // csv source
  std::string w_path;
  double tol = 1e-8;
};

struct OracleConfig {
  bool enabled = true;
  double step_safety = 0.95;  // step = step_safety / max nodal slope
  double tol = 1e-8;
  int max_steps = 200000;
};

struct VerifyConfig {
  std::optional<double> classification_tol;  // default: solver tol
  std::optional<double> comparison_tol;      // default: solver tol
};

struct RunConfig {
  OperatorConfig op;
  GridConfig grid;
  double dirichlet = 0.0;
  std::vector<Condition> checks{
      Condition::ellipticity, Condition::mon1,   Condition::mon2,
      Condition::monorig,     Condition::cond_i, Condition::cond_i_prime,
      Condition::cond_ii};
  SamplerConfig sampler;
  BarrierConfig barriers;
  SolveConfig solver;
  OracleConfig oracle;
  VerifyConfig verify;
  // Explicit assertion names; empty means the automatic, stage-gated set.
  std::vector<std::string> assertions;
  StageCut cut = StageCut::verify;

  OperatorSpec make_operator() const;
  GridPtr make_grid() const;
};

/// Parses and validates a JSON configuration. Strict mode rejects unknown
/// keys. Errors carry the JSON path of the offending entry and throw
/// ConfigError.
RunConfig parse_config(const std::string& text, bool strict = true);

struct PipelineResult {
  OrderedJson report;
  bool all_assertions_passed = false;

  std::optional<BarrierPair> barriers;
  std::optional<VectorGridFunction> solution;

  // Stage wall times; kept out of the report so that serialization stays
  // deterministic. Emitted separately as timing.json.
  std::map<std::string, double> timings;

  std::string report_text() const { return report.dump(2) + "\n"; }
};

/// Executes the configured stages in order. Stage failures are recorded
/// in the report and dependent stages are skipped with a reason; the
/// report is always complete.
PipelineResult run_pipeline(const RunConfig& cfg);

/// Writes report.json, timing.json and the field CSVs into `out_dir`.
/// Returns the exit status: 0 if all requested assertions passed, 1
/// otherwise.
int emit(const PipelineResult& result, const std::filesystem::path& out_dir);

/// CSV serialization of one vector grid function (header
/// "x[,y],u1_1..u1_m1,u2_1..u2_m2", one row per node in grid order).
std::string to_csv(const VectorGridFunction& u);
VectorGridFunction from_csv(const std::string& text, GridPtr grid,
                            Partition part);

// JSON views of the report building blocks (deterministic key order).
OrderedJson to_json(const CheckReport& rep);
OrderedJson to_json(const Classification& cl);
OrderedJson to_json(const SolveReport& rep);
OrderedJson to_json(const ComparisonReport& rep);

}  // namespace bqm
