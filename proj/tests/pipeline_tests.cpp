#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lockopt/pipeline.hpp"
#include "support/bench.hpp"

using namespace lockopt;
using Json = nlohmann::json;

namespace {

RunConfig toy_config(const std::string& bench, EngineKind engine = EngineKind::Ga) {
    RunConfig c;
    c.source_path = testsupport::bench_path(bench);
    c.engine = engine;
    c.key_spec = "random:3:77";
    c.tests_spec = "random:12:88";
    c.wrong_key_count = 7;
    c.dse.population = 16;
    c.dse.max_generations = 40;
    c.seed = 5;
    return c;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

// Validates a JSON value against the subset of JSON Schema the shipped
// schemas use: type, properties, required, items.
bool subset_validate(const Json& schema, const Json& value, std::string& why,
                     const std::string& at = "$") {
    if (schema.contains("type")) {
        const std::string type = schema.at("type").get<std::string>();
        bool ok = (type == "object" && value.is_object()) ||
                  (type == "array" && value.is_array()) ||
                  (type == "string" && value.is_string()) ||
                  (type == "integer" && value.is_number_integer()) ||
                  (type == "number" && value.is_number()) ||
                  (type == "boolean" && value.is_boolean());
        if (!ok) {
            why = at + ": expected " + type;
            return false;
        }
    }
    if (schema.contains("required")) {
        for (const auto& name : schema.at("required")) {
            if (!value.contains(name.get<std::string>())) {
                why = at + ": missing required '" + name.get<std::string>() + "'";
                return false;
            }
        }
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [name, sub] : schema.at("properties").items()) {
            if (value.contains(name)) {
                if (!subset_validate(sub, value.at(name), why, at + "." + name)) return false;
            }
        }
    }
    if (schema.contains("items") && value.is_array()) {
        for (size_t i = 0; i < value.size(); ++i) {
            if (!subset_validate(schema.at("items"), value[i], why,
                                 at + "[" + std::to_string(i) + "]"))
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("analyze reproduces the characterization row") {
    RunConfig c;
    c.source_path = testsupport::bench_path("bubblesort.c");
    AnalyzeOutcome out = run_analyze(c);
    CHECK(out.table_row == "0 ctrl, 11 op, 4 const, 139 bits");

    c.source_path = testsupport::bench_path("patricia.c");
    CHECK(run_analyze(c).table_row == "2 ctrl, 9 op, 3 const, 107 bits");
}

TEST_CASE("analyze of an empty body is all zeros") {
    RunConfig c;
    c.source_text = "int top(int a) { }";
    AnalyzeOutcome out = run_analyze(c);
    CHECK(out.table_row == "0 ctrl, 0 op, 0 const, 0 bits");
    CHECK(out.space == "1");
}

TEST_CASE("analyze summary is consistent with find_points and key_bits") {
    for (const std::string& name : testsupport::all_benchmarks()) {
        RunConfig c;
        c.source_path = testsupport::bench_path(name);
        AnalyzeOutcome out = run_analyze(c);
        auto program = load_program(c);
        auto pts = find_points(program);
        CHECK(out.points.size() == pts.size());
        CHECK(out.summary.full_bits == key_bits(SolutionVector(pts.size(), 1), pts));
    }
}

TEST_CASE("parse failures surface diagnostics") {
    RunConfig c;
    c.source_text = "int top(int a) { return @; }";
    CHECK_THROWS_WITH_AS(run_analyze(c), doctest::Contains("parse failed"), Error);
}

TEST_CASE("engine full transforms every point") {
    RunConfig c = toy_config("toy_mix.c", EngineKind::Full);
    c.key_spec = "random:4:11";
    RunOutcome out = run_lock(c);
    CHECK(out.locked.activations.size() == 4);
    CHECK(out.selected == SolutionVector{1, 1, 1, 1});
    CHECK(out.locked_source.find("KEY[") != std::string::npos);
    REQUIRE(out.trace.size() == 1);
}

TEST_CASE("engine full fails when the key is too short") {
    RunConfig c = toy_config("toy_mix.c", EngineKind::Full);
    c.key_spec = "random:3:11";  // full needs 4
    CHECK_THROWS_WITH_AS(run_lock(c), doctest::Contains("full obfuscation"), Error);
}

TEST_CASE("tao engine runs without fitness guidance and stays within budget") {
    RunConfig c = toy_config("bubblesort.c", EngineKind::Tao);
    c.key_spec = "random:100:19";  // 100 of 139 bits
    c.tests_spec = "random:6:2";
    c.wrong_key_count = 6;
    c.step_budget = 200000;
    RunOutcome out = run_lock(c);
    CHECK(out.locked.used_bits <= 100);
    CHECK(out.evaluations == 1);
}

TEST_CASE("lock artifacts are deterministic for identical configs and any jobs") {
    RunConfig c = toy_config("cancel.c");
    RunOutcome a = run_lock(c);
    RunOutcome b = run_lock(c);
    CHECK(a.report_json == b.report_json);
    CHECK(a.locked_source == b.locked_source);
    CHECK(a.trace_csv == b.trace_csv);

    RunConfig parallel = c;
    parallel.jobs = 4;
    RunOutcome d = run_lock(parallel);
    CHECK(a.report_json == d.report_json);
    CHECK(a.locked_source == d.locked_source);
    CHECK(a.trace_csv == d.trace_csv);
}

TEST_CASE("ga beats tao on the cancellation benchmark") {
    RunConfig ga = toy_config("cancel.c", EngineKind::Ga);
    ga.tests_spec = "random:24:3";
    RunConfig tao = ga;
    tao.engine = EngineKind::Tao;
    RunOutcome ga_out = run_lock(ga);
    RunOutcome tao_out = run_lock(tao);
    CHECK(ga_out.best_h_found > tao_out.best_h_found);
}

TEST_CASE("eval: all-zero vector scores zero entropy") {
    RunConfig c = toy_config("toy_mix.c");
    EvalOutcome out = run_eval(c, {0, 0, 0, 0});
    CHECK(out.entropy.h == 0.0);
    CHECK(out.key_bits == 0);
    for (double p : out.entropy.p) CHECK(p == 0.0);
}

TEST_CASE("eval reproduces the recorded best of a lock run") {
    RunConfig c = toy_config("cancel.c");
    RunOutcome locked = run_lock(c);
    EvalOutcome again = run_eval(c, locked.selected);
    CHECK(again.entropy.h == locked.selected_entropy.h);
    CHECK(again.cost.total == locked.selected_cost.total);
}

TEST_CASE("eval validates the solution vector") {
    RunConfig c = toy_config("cancel.c");
    CHECK_THROWS_AS(run_eval(c, {1, 1}), Error);        // length
    CHECK_THROWS_AS(run_eval(c, {5, 0, 0}), Error);     // range
}

TEST_CASE("reports validate against the shipped schema") {
    std::ifstream schema_file(std::string(LOCKOPT_DOCS_DIR) + "/schemas/report.schema.json");
    REQUIRE(schema_file.good());
    Json schema = Json::parse(schema_file);
    for (EngineKind engine :
         {EngineKind::Ga, EngineKind::Random, EngineKind::Tao, EngineKind::Full}) {
        RunConfig c = toy_config("toy_mix.c", engine);
        c.key_spec = "random:4:11";
        RunOutcome out = run_lock(c);
        std::string why;
        CHECK_MESSAGE(subset_validate(schema, Json::parse(out.report_json), why), why);
    }
}

TEST_CASE("trace CSV is plot-ready") {
    RunConfig c = toy_config("cancel.c");
    RunOutcome out = run_lock(c);
    CHECK(out.trace_csv.rfind("generation,best,mean,std\n", 0) == 0);
    size_t rows = 0;
    for (char ch : out.trace_csv) rows += ch == '\n';
    CHECK(rows == out.trace.size() + 1);
}

TEST_CASE("key resolution") {
    RunConfig c = toy_config("toy_mix.c");
    SUBCASE("hex keys take their length from the digit count") {
        c.key_spec = "0xf";
        RunOutcome out = run_lock(c);
        Json report = Json::parse(out.report_json);
        CHECK(report["config"]["key"]["bits"] == 4);
        CHECK(report["config"]["key"]["hex"] == "f");
    }
    SUBCASE("key fraction sizes from the full budget") {
        c.key_spec.clear();
        c.key_fraction = 75;
        RunOutcome out = run_lock(c);
        Json report = Json::parse(out.report_json);
        CHECK(report["config"]["key"]["bits"] == 3);  // 75% of 4
    }
    SUBCASE("giving both key and fraction is an error") {
        c.key_fraction = 50;
        CHECK_THROWS_AS(run_lock(c), Error);
    }
    SUBCASE("a key is required") {
        c.key_spec.clear();
        CHECK_THROWS_AS(run_lock(c), Error);
    }
    SUBCASE("invalid hex is rejected") {
        c.key_spec = "0xzz";
        CHECK_THROWS_AS(run_lock(c), Error);
    }
}

TEST_CASE("test vector files load and bind by name") {
    std::string path = write_temp("lockopt_tests.json",
                                  R"([{"a": 3, "b": 4, "c": 5}, {"c": -1, "b": 0, "a": 7}])");
    RunConfig c = toy_config("toy_mix.c");
    c.tests_spec = path;
    RunOutcome out = run_lock(c);
    Json report = Json::parse(out.report_json);
    CHECK(report["config"]["tests"]["count"] == 2);
    std::remove(path.c_str());
}

TEST_CASE("cost model files override the defaults") {
    std::string path = write_temp("lockopt_model.json", R"({"mul": 100.0, "select": 2.0})");
    CostModel m = load_cost_model(path);
    CHECK(m.mul == 100.0);
    CHECK(m.select == 2.0);
    CHECK(m.add_sub == CostModel::defaults().add_sub);
    std::string bad = write_temp("lockopt_model_bad.json", R"({"mul": -1})");
    CHECK_THROWS_AS(load_cost_model(bad), Error);
    std::remove(path.c_str());
    std::remove(bad.c_str());
}

TEST_CASE("solution files accept arrays, objects, and full reports") {
    std::string arr = write_temp("sol_arr.json", "[1, 0, 2]");
    CHECK(load_solution_file(arr) == SolutionVector{1, 0, 2});
    std::string obj = write_temp("sol_obj.json", R"({"solution": [0, 1]})");
    CHECK(load_solution_file(obj) == SolutionVector{0, 1});
    std::string rep = write_temp("sol_rep.json", R"({"best": {"solution": [2]}})");
    CHECK(load_solution_file(rep) == SolutionVector{2});
    std::string bad = write_temp("sol_bad.json", R"({"nope": 1})");
    CHECK_THROWS_AS(load_solution_file(bad), Error);
    for (const auto& p : {arr, obj, rep, bad}) std::remove(p.c_str());
}

TEST_CASE("run-config JSON round-trips through the loader") {
    std::string path = write_temp("lockopt_cfg.json", R"({
        "src": "design.c", "top": "main_fn", "key": "random:8:3", "tests": "random:5:4",
        "wrong_keys": 9, "engine": "random", "epsilon": 0.1, "seed": 42, "jobs": 2,
        "constant_bits": 16, "random_search_evals": 77,
        "constraints": {"excluded_functions": ["helper"], "forced_points": [1, 2]},
        "dse": {"population": 50, "tournament_size": 5}
    })");
    RunConfig c = config_from_json_file(path);
    CHECK(c.source_path == "design.c");
    CHECK(c.top_name == "main_fn");
    CHECK(c.key_spec == "random:8:3");
    CHECK(c.wrong_key_count == 9);
    CHECK(c.engine == EngineKind::Random);
    CHECK(c.epsilon == 0.1);
    CHECK(c.seed == 42);
    CHECK(c.analysis.constant_bits == 16);
    CHECK(c.random_search_evals == 77);
    CHECK(c.constraints.excluded_functions == std::vector<std::string>{"helper"});
    CHECK(c.constraints.forced_points == std::vector<int>{1, 2});
    CHECK(c.dse.population == 50);
    CHECK(c.dse.tournament_size == 5);
    CHECK(c.dse.max_generations == 1000);  // untouched default
    std::remove(path.c_str());
}

TEST_CASE("write_artifacts produces the four files") {
    RunConfig c = toy_config("cancel.c");
    c.output_dir = (std::filesystem::temp_directory_path() / "lockopt_artifacts").string();
    RunOutcome out = run_lock(c);
    write_artifacts(c, out, 0.25);
    for (const char* name : {"locked.c", "report.json", "trace.csv", "timing.txt"}) {
        CHECK(std::filesystem::exists(std::filesystem::path(c.output_dir) / name));
    }
    std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("forced constraints must fit the key") {
    RunConfig c = toy_config("toy_xor.c");
    c.key_spec = "random:8:1";
    c.constraints.forced_points = {1};  // the 32-bit constant
    CHECK_THROWS_WITH_AS(run_lock(c), doctest::Contains("infeasible"), Error);
}

TEST_CASE("CLI exit codes and analyze output") {
    std::string cli = LOCKOPT_CLI_PATH;
    std::string row_file =
        (std::filesystem::temp_directory_path() / "lockopt_cli_row.txt").string();
    int rc = std::system((cli + " analyze --src " + testsupport::bench_path("bubblesort.c") +
                          " > " + row_file)
                             .c_str());
    CHECK(rc == 0);
    std::ifstream in(row_file);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all.find("0 ctrl, 11 op, 4 const, 139 bits") != std::string::npos);
    std::remove(row_file.c_str());

    std::string bad = write_temp("lockopt_bad.c", "int top(int a) { return @; }");
    rc = std::system((cli + " analyze --src " + bad + " > /dev/null 2>&1").c_str());
    CHECK(rc != 0);
    std::remove(bad.c_str());
}
