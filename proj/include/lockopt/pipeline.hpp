#pragma once

#include <optional>
#include <string>

#include "lockopt/cost.hpp"
#include "lockopt/explore.hpp"
#include "lockopt/points.hpp"

namespace lockopt {

enum class EngineKind : uint8_t { Ga, Random, Tao, Full };

EngineKind engine_from_name(const std::string& name);
const char* spelling(EngineKind e);

/// One reproducible run. Seeds for key/tests/wrong-keys/engine are derived
/// from `seed` and echoed in the report.
struct RunConfig {
    std::string source_path;
    std::string source_text;  // used instead of the path when non-empty
    std::string top_name;

    std::string key_spec;     // hex string, or "random:<bits>:<seed>"
    int key_fraction = 0;     // 25/50/75/100 % of the full budget; 0 = use key_spec

    std::string tests_spec;   // path to a JSON file, or "random:<T>:<seed>"
    int wrong_key_count = 100;

    EngineKind engine = EngineKind::Ga;
    DseConfig dse;
    long random_search_evals = 1000;

    double epsilon = 0.02;
    Constraints constraints;
    AnalysisOptions analysis;
    long step_budget = sim::kDefaultStepBudget;
    uint64_t seed = 1;
    int jobs = 1;

    std::string cost_model_path;
    std::string output_dir = "out";
};

/// Artifacts of one lock run, ready for serialization.
struct RunOutcome {
    PointSummary summary;
    std::string space;  // decimal design-space size
    SolutionVector selected;
    EntropyReport selected_entropy;
    CostEstimate selected_cost;
    LockedProgram locked;
    double best_h_found = 0.0;
    DseTrace trace;
    long evaluations = 0;
    std::vector<Candidate> band;
    std::string report_json;  // serialized RunReport
    std::string trace_csv;
    std::string locked_source;
};

/// Loads + parses the source named by the config. Throws Error with
/// diagnostics on parse failure.
minic::Program load_program(const RunConfig& config);

/// analyze: point identification only.
struct AnalyzeOutcome {
    PointSummary summary;
    std::string space;
    std::vector<ObfuscationPoint> points;
    std::string table_row;  // "N ctrl, N op, N const, N bits"
};
AnalyzeOutcome run_analyze(const RunConfig& config);

/// lock: full pipeline (analyze -> golden -> explore -> select -> emit).
RunOutcome run_lock(const RunConfig& config);

/// eval: re-scores one solution vector under the config's key/tests/wrong keys.
struct EvalOutcome {
    EntropyReport entropy;
    CostEstimate cost;
    int key_bits = 0;
};
EvalOutcome run_eval(const RunConfig& config, const SolutionVector& solution);

/// Writes locked.c, report.json, trace.csv (and timing.txt) under
/// config.output_dir. Returns the directory used.
std::string write_artifacts(const RunConfig& config, const RunOutcome& outcome,
                            double wall_seconds);

/// Serialization helpers shared by the CLI and the bindings.
CostModel load_cost_model(const std::string& path);  // empty path -> defaults
std::vector<sim::InputVector> load_test_vectors(const minic::Program& program,
                                                const std::string& path);
SolutionVector load_solution_file(const std::string& path);
RunConfig config_from_json_file(const std::string& path);
void apply_config_json(RunConfig& config, const std::string& json_text);

}  // namespace lockopt
