#include "lockopt/pipeline.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lockopt/parser.hpp"
#include "lockopt/printer.hpp"

namespace lockopt {

using Json = nlohmann::ordered_json;

namespace {

// Stream tags for deriving per-purpose seeds from the master seed.
constexpr uint64_t kStreamKey = 1;
constexpr uint64_t kStreamTests = 2;
constexpr uint64_t kStreamWrongKeys = 3;
constexpr uint64_t kStreamEngine = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

/// "random:<count>:<seed>" or "random:<count>"; count required.
bool parse_random_spec(const std::string& spec, long& count, uint64_t& seed, bool& has_seed) {
    if (spec.rfind("random:", 0) != 0) return false;
    std::string rest = spec.substr(7);
    size_t colon = rest.find(':');
    std::string count_part = colon == std::string::npos ? rest : rest.substr(0, colon);
    try {
        count = std::stol(count_part);
    } catch (...) {
        throw Error("malformed spec '" + spec + "': expected random:<count>[:<seed>]");
    }
    has_seed = colon != std::string::npos;
    if (has_seed) {
        try {
            seed = std::stoull(rest.substr(colon + 1));
        } catch (...) {
            throw Error("malformed seed in spec '" + spec + "'");
        }
    }
    return true;
}

struct ResolvedKey {
    Key key;
    uint64_t seed = 0;
    bool random = false;
    std::string spec;
};

ResolvedKey resolve_key(const RunConfig& config, int full_bits) {
    ResolvedKey rk;
    if (config.key_fraction != 0) {
        if (config.key_fraction < 1 || config.key_fraction > 100)
            throw Error("key fraction must be in [1, 100]");
        if (!config.key_spec.empty())
            throw Error("give either a key or a key fraction, not both");
        long bits = static_cast<long>(full_bits) * config.key_fraction / 100;
        rk.seed = mix_seed(config.seed, kStreamKey);
        rk.random = true;
        Rng rng(rk.seed);
        rk.key = Key::random(static_cast<size_t>(bits), rng);
        rk.spec = "frac:" + std::to_string(config.key_fraction);
        return rk;
    }
    if (config.key_spec.empty()) throw Error("a key is required (--key or --key-frac)");
    long count = 0;
    uint64_t seed = 0;
    bool has_seed = false;
    if (parse_random_spec(config.key_spec, count, seed, has_seed)) {
        if (count < 0) throw Error("key length cannot be negative");
        rk.seed = has_seed ? seed : mix_seed(config.seed, kStreamKey);
        rk.random = true;
        Rng rng(rk.seed);
        rk.key = Key::random(static_cast<size_t>(count), rng);
        rk.spec = config.key_spec;
        return rk;
    }
    std::string hex = config.key_spec;
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex = hex.substr(2);
    rk.key = Key::from_hex(hex, hex.size() * 4);
    rk.spec = config.key_spec;
    return rk;
}

struct ResolvedTests {
    std::vector<sim::InputVector> tests;
    uint64_t seed = 0;
    bool random = false;
    std::string spec;
};

ResolvedTests resolve_tests(const RunConfig& config, const minic::Program& program) {
    ResolvedTests rt;
    std::string spec = config.tests_spec.empty() ? "random:100" : config.tests_spec;
    long count = 0;
    uint64_t seed = 0;
    bool has_seed = false;
    if (parse_random_spec(spec, count, seed, has_seed)) {
        if (count < 1) throw Error("test vector count must be at least 1");
        rt.seed = has_seed ? seed : mix_seed(config.seed, kStreamTests);
        rt.random = true;
        rt.tests = sim::random_inputs(program, static_cast<int>(count), rt.seed);
        rt.spec = spec;
        return rt;
    }
    rt.tests = load_test_vectors(program, spec);
    rt.spec = spec;
    return rt;
}

Json cost_to_json(const CostEstimate& cost) {
    Json j;
    j["total"] = cost.total;
    j["key_bits"] = cost.key_bits;
    Json breakdown = Json::object();
    for (const auto& [name, units] : cost.breakdown) breakdown[name] = units;
    j["breakdown"] = breakdown;
    return j;
}

Json trace_to_json(const DseTrace& trace) {
    Json rows = Json::array();
    for (const GenerationStats& g : trace) {
        Json row;
        row["generation"] = g.generation;
        row["best"] = g.best_h;
        row["mean"] = g.mean_h;
        row["std"] = g.std_h;
        row["evaluations"] = g.evaluations;
        row["best_key_bits"] = g.best_key_bits;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string trace_to_csv(const DseTrace& trace) {
    std::string csv = "generation,best,mean,std\n";
    for (const GenerationStats& g : trace) {
        csv += std::to_string(g.generation) + "," + fmt_double(g.best_h) + "," +
               fmt_double(g.mean_h) + "," + fmt_double(g.std_h) + "\n";
    }
    return csv;
}

std::string table_row(const PointSummary& s) {
    return std::to_string(s.branches) + " ctrl, " + std::to_string(s.operations) + " op, " +
           std::to_string(s.constants) + " const, " + std::to_string(s.full_bits) + " bits";
}

}  // namespace

EngineKind engine_from_name(const std::string& name) {
    if (name == "ga") return EngineKind::Ga;
    if (name == "random") return EngineKind::Random;
    if (name == "tao") return EngineKind::Tao;
    if (name == "full") return EngineKind::Full;
    throw Error("unknown engine '" + name + "' (expected ga, random, tao, or full)");
}

const char* spelling(EngineKind e) {
    switch (e) {
        case EngineKind::Ga: return "ga";
        case EngineKind::Random: return "random";
        case EngineKind::Tao: return "tao";
        case EngineKind::Full: return "full";
    }
    return "?";
}

minic::Program load_program(const RunConfig& config) {
    std::string text = config.source_text.empty() ? read_file(config.source_path)
                                                  : config.source_text;
    minic::ParseResult result = minic::parse(text, config.top_name);
    if (!result.ok()) {
        std::string where = config.source_path.empty() ? "<source>" : config.source_path;
        throw Error(where + ": parse failed:\n" + format_diagnostics(result.diagnostics));
    }
    return std::move(*result.program);
}

AnalyzeOutcome run_analyze(const RunConfig& config) {
    minic::Program program = load_program(config);
    AnalyzeOutcome out;
    out.points = find_points(program, config.constraints, config.analysis);
    out.summary = summarize_points(out.points);
    out.space = space_size(out.points).str();
    out.table_row = table_row(out.summary);
    return out;
}

RunOutcome run_lock(const RunConfig& config) {
    minic::Program program = load_program(config);
    auto points = find_points(program, config.constraints, config.analysis);
    PointSummary summary = summarize_points(points);

    ResolvedKey key = resolve_key(config, summary.full_bits);
    int forced_bits = 0;
    for (const auto& pt : points) {
        if (pt.forced) forced_bits += pt.key_cost;
    }
    if (forced_bits > static_cast<int>(key.key.size()))
        throw Error("infeasible constraints: forced points need " + std::to_string(forced_bits) +
                    " bits but the key has " + std::to_string(key.key.size()));

    ResolvedTests tests = resolve_tests(config, program);
    uint64_t wrong_seed = mix_seed(config.seed, kStreamWrongKeys);
    std::vector<Key> wrong_keys = make_wrong_keys(key.key, config.wrong_key_count, wrong_seed);

    EvalContext ctx(program, points, key.key, tests.tests, wrong_keys, config.step_budget,
                    config.jobs);

    uint64_t engine_seed = mix_seed(config.seed, kStreamEngine);
    ExploreResult explored;
    switch (config.engine) {
        case EngineKind::Ga: {
            DseConfig dse = config.dse;
            dse.seed = engine_seed;
            dse.jobs = config.jobs;
            dse.epsilon = config.epsilon;
            explored = ga_explore(ctx, dse);
            break;
        }
        case EngineKind::Random:
            explored = random_search(ctx, config.random_search_evals, engine_seed, config.epsilon);
            break;
        case EngineKind::Tao:
            explored = evaluate_single(
                ctx, tao_baseline(points, static_cast<int>(key.key.size())), config.epsilon);
            break;
        case EngineKind::Full: {
            SolutionVector all_ones(points.size(), 1);
            if (!is_feasible(all_ones, points, static_cast<int>(key.key.size())))
                throw Error("full obfuscation needs " + std::to_string(summary.full_bits) +
                            " bits but the key has " + std::to_string(key.key.size()));
            explored = evaluate_single(ctx, all_ones, config.epsilon);
            break;
        }
    }

    CostModel model = load_cost_model(config.cost_model_path);
    std::vector<Candidate> candidates;
    candidates.reserve(explored.band.size());
    for (const ScoredSolution& s : explored.band) {
        LockedProgram locked = apply_locking(program, points, s.solution, key.key);
        candidates.push_back({s.solution, s.h, estimate_cost(locked, model)});
    }
    size_t pick = select_best(candidates, config.epsilon);

    RunOutcome out;
    out.summary = summary;
    out.space = space_size(points).str();
    out.selected = candidates[pick].solution;
    out.selected_cost = candidates[pick].cost;
    out.locked = apply_locking(program, points, out.selected, key.key);
    out.selected_entropy = ctx.evaluate_full(out.selected);
    out.best_h_found = explored.best_h;
    out.trace = explored.trace;
    out.evaluations = explored.evaluations;
    out.band = candidates;
    out.locked_source = minic::emit_source(out.locked.ast);
    out.trace_csv = trace_to_csv(explored.trace);

    // Assemble the report. The jobs value is deliberately absent: reports are
    // byte-identical for any parallelism degree.
    int nbits = program.output_bit_count();
    Json report;
    report["schema_version"] = 1;
    report["tool"] = {{"name", "lockopt"}, {"version", "0.1.0"}};

    Json cfg;
    cfg["source"] = config.source_path.empty() ? "<inline>" : config.source_path;
    cfg["top"] = program.top().name;
    cfg["engine"] = spelling(config.engine);
    cfg["key"] = {{"spec", key.spec},
                  {"bits", key.key.size()},
                  {"hex", key.key.to_hex()}};
    cfg["tests"] = {{"spec", tests.spec}, {"count", tests.tests.size()}};
    cfg["wrong_keys"] = {{"count", config.wrong_key_count}};
    cfg["epsilon"] = config.epsilon;
    cfg["constant_bits"] = config.analysis.constant_bits;
    cfg["step_budget"] = config.step_budget;
    cfg["constraints"] = {{"excluded_functions", config.constraints.excluded_functions},
                          {"forced_points", config.constraints.forced_points}};
    cfg["dse"] = {{"population", config.dse.population},
                  {"max_generations", config.dse.max_generations},
                  {"stagnation_limit", config.dse.stagnation_limit},
                  {"crossover_prob", config.dse.crossover_prob},
                  {"mutation_prob", config.dse.mutation_prob},
                  {"element_mutation_prob", config.dse.element_mutation_prob},
                  {"elite_count", config.dse.elite_count},
                  {"tournament_size", config.dse.tournament_size}};
    cfg["random_search_evals"] = config.random_search_evals;
    Json seeds;
    seeds["master"] = config.seed;
    if (key.random) seeds["key"] = key.seed;
    if (tests.random) seeds["tests"] = tests.seed;
    seeds["wrong_keys"] = wrong_seed;
    seeds["engine"] = engine_seed;
    cfg["seeds"] = std::move(seeds);
    report["config"] = std::move(cfg);

    report["points"] = {{"total", points.size()},
                        {"ctrl", summary.branches},
                        {"op", summary.operations},
                        {"const", summary.constants},
                        {"full_bits", summary.full_bits},
                        {"space", out.space},
                        {"table_row", table_row(summary)}};

    Json alloc = Json::array();
    for (const AllocEntry& a : out.locked.alloc)
        alloc.push_back({{"point", a.point_id}, {"offset", a.offset}, {"length", a.length}});
    Json best;
    best["solution"] = out.selected;
    best["h"] = out.selected_entropy.h;
    best["nh"] = out.selected_entropy.h * nbits;
    best["key_bits"] = out.locked.used_bits;
    best["alloc"] = std::move(alloc);
    best["p"] = out.selected_entropy.p;
    best["runs"] = out.selected_entropy.runs;
    best["statuses"] = {{"div_by_zero", out.selected_entropy.div_by_zero_runs},
                        {"budget_exceeded", out.selected_entropy.budget_exceeded_runs}};
    best["cost"] = cost_to_json(out.selected_cost);
    report["best"] = std::move(best);

    report["search"] = {{"best_h", out.best_h_found}, {"evaluations", out.evaluations}};

    Json band = Json::array();
    for (const Candidate& c : candidates) {
        band.push_back({{"solution", c.solution},
                        {"h", c.h},
                        {"key_bits", c.cost.key_bits},
                        {"cost_total", c.cost.total}});
    }
    report["band"] = std::move(band);
    report["trace"] = trace_to_json(out.trace);

    out.report_json = report.dump(2) + "\n";
    return out;
}

EvalOutcome run_eval(const RunConfig& config, const SolutionVector& solution) {
    minic::Program program = load_program(config);
    auto points = find_points(program, config.constraints, config.analysis);
    PointSummary summary = summarize_points(points);
    ResolvedKey key = resolve_key(config, summary.full_bits);
    ResolvedTests tests = resolve_tests(config, program);
    std::vector<Key> wrong_keys =
        make_wrong_keys(key.key, config.wrong_key_count, mix_seed(config.seed, kStreamWrongKeys));

    validate_solution(solution, points);
    EvalContext ctx(program, points, key.key, tests.tests, wrong_keys, config.step_budget,
                    config.jobs);
    EvalOutcome out;
    out.entropy = ctx.evaluate_full(solution);
    LockedProgram locked = apply_locking(program, points, solution, key.key);
    out.cost = estimate_cost(locked, load_cost_model(config.cost_model_path));
    out.key_bits = locked.used_bits;
    return out;
}

std::string write_artifacts(const RunConfig& config, const RunOutcome& outcome,
                            double wall_seconds) {
    std::filesystem::create_directories(config.output_dir);
    std::string dir = config.output_dir;
    write_file(dir + "/locked.c", outcome.locked_source);
    write_file(dir + "/report.json", outcome.report_json);
    write_file(dir + "/trace.csv", outcome.trace_csv);
    write_file(dir + "/timing.txt", "wall_seconds " + fmt_double(wall_seconds) + "\n");
    return dir;
}

CostModel load_cost_model(const std::string& path) {
    CostModel model;
    if (path.empty()) return model;
    Json j = Json::parse(read_file(path));
    auto get = [&](const char* name, double& into) {
        if (j.contains(name)) into = j.at(name).get<double>();
    };
    get("add_sub", model.add_sub);
    get("mul", model.mul);
    get("div", model.div);
    get("bitwise", model.bitwise);
    get("compare", model.compare);
    get("select", model.select);
    get("xor_per_key_bit", model.xor_per_key_bit);
    get("register_per_key_bit", model.register_per_key_bit);
    if (model.add_sub < 0 || model.mul < 0 || model.div < 0 || model.bitwise < 0 ||
        model.compare < 0 || model.select < 0 || model.xor_per_key_bit < 0 ||
        model.register_per_key_bit < 0)
        throw Error("cost model entries must be non-negative");
    return model;
}

std::vector<sim::InputVector> load_test_vectors(const minic::Program& program,
                                                const std::string& path) {
    Json j = Json::parse(read_file(path));
    if (!j.is_array()) throw Error("test vector file must hold a JSON array of records");
    std::vector<sim::InputVector> tests;
    for (const Json& record : j) {
        if (!record.is_object()) throw Error("each test vector must be a JSON object");
        std::vector<std::pair<std::string, std::vector<int64_t>>> named;
        for (auto it = record.begin(); it != record.end(); ++it) {
            std::vector<int64_t> values;
            if (it.value().is_array()) {
                for (const Json& v : it.value()) values.push_back(v.get<int64_t>());
            } else {
                values.push_back(it.value().get<int64_t>());
            }
            named.emplace_back(it.key(), std::move(values));
        }
        tests.push_back(sim::bind_inputs(program, named));
    }
    if (tests.empty()) throw Error("test vector file is empty");
    return tests;
}

SolutionVector load_solution_file(const std::string& path) {
    Json j = Json::parse(read_file(path));
    const Json* arr = nullptr;
    if (j.is_array()) {
        arr = &j;
    } else if (j.is_object() && j.contains("solution")) {
        arr = &j.at("solution");
    } else if (j.is_object() && j.contains("best") && j.at("best").contains("solution")) {
        arr = &j.at("best").at("solution");
    }
    if (!arr || !arr->is_array())
        throw Error("solution file must be a JSON array, {\"solution\": [...]}, or a run report");
    SolutionVector s;
    for (const Json& v : *arr) s.push_back(v.get<int>());
    return s;
}

void apply_config_json(RunConfig& config, const std::string& json_text) {
    Json j = Json::parse(json_text);
    if (!j.is_object()) throw Error("run config must be a JSON object");
    auto get_str = [&](const char* name, std::string& into) {
        if (j.contains(name)) into = j.at(name).get<std::string>();
    };
    get_str("src", config.source_path);
    get_str("top", config.top_name);
    get_str("key", config.key_spec);
    get_str("tests", config.tests_spec);
    get_str("cost_model", config.cost_model_path);
    get_str("out", config.output_dir);
    if (j.contains("key_frac")) config.key_fraction = j.at("key_frac").get<int>();
    if (j.contains("wrong_keys")) config.wrong_key_count = j.at("wrong_keys").get<int>();
    if (j.contains("engine")) config.engine = engine_from_name(j.at("engine").get<std::string>());
    if (j.contains("epsilon")) config.epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed")) config.seed = j.at("seed").get<uint64_t>();
    if (j.contains("jobs")) config.jobs = j.at("jobs").get<int>();
    if (j.contains("step_budget")) config.step_budget = j.at("step_budget").get<long>();
    if (j.contains("constant_bits")) config.analysis.constant_bits = j.at("constant_bits").get<int>();
    if (j.contains("random_search_evals"))
        config.random_search_evals = j.at("random_search_evals").get<long>();
    if (j.contains("constraints")) {
        const Json& c = j.at("constraints");
        if (c.contains("excluded_functions"))
            config.constraints.excluded_functions =
                c.at("excluded_functions").get<std::vector<std::string>>();
        if (c.contains("forced_points"))
            config.constraints.forced_points = c.at("forced_points").get<std::vector<int>>();
    }
    if (j.contains("dse")) {
        const Json& d = j.at("dse");
        auto get_int = [&](const char* name, int& into) {
            if (d.contains(name)) into = d.at(name).get<int>();
        };
        auto get_dbl = [&](const char* name, double& into) {
            if (d.contains(name)) into = d.at(name).get<double>();
        };
        get_int("population", config.dse.population);
        get_int("max_generations", config.dse.max_generations);
        get_int("stagnation_limit", config.dse.stagnation_limit);
        get_dbl("crossover_prob", config.dse.crossover_prob);
        get_dbl("mutation_prob", config.dse.mutation_prob);
        get_dbl("element_mutation_prob", config.dse.element_mutation_prob);
        get_int("elite_count", config.dse.elite_count);
        get_int("tournament_size", config.dse.tournament_size);
    }
}

RunConfig config_from_json_file(const std::string& path) {
    RunConfig config;
    apply_config_json(config, read_file(path));
    return config;
}

}  // namespace lockopt
