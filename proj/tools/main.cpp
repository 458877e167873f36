#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lockopt/common.hpp"
#include "lockopt/pipeline.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string src;
    std::string top;
    std::string key;
    int key_frac = 0;
    std::string tests;
    int wrong_keys = 100;
    std::string engine = "ga";
    double epsilon = 0.02;
    uint64_t seed = 1;
    int jobs = 1;
    long step_budget = lockopt::sim::kDefaultStepBudget;
    int constant_bits = 32;
    std::string cost_model;
    std::string out = "out";
    std::string solution;
    bool list_points = false;

    int population = 300;
    int max_generations = 1000;
    int stagnation = 10;
    double pc = 0.5;
    double pm = 0.2;
    double pl = 0.05;
    int elite = 1;
    int tournament = 3;
    long random_evals = 1000;
};

struct OptionSet {
    CLI::Option* src = nullptr;
    CLI::Option* top = nullptr;
    CLI::Option* key = nullptr;
    CLI::Option* key_frac = nullptr;
    CLI::Option* tests = nullptr;
    CLI::Option* wrong_keys = nullptr;
    CLI::Option* engine = nullptr;
    CLI::Option* epsilon = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* jobs = nullptr;
    CLI::Option* step_budget = nullptr;
    CLI::Option* constant_bits = nullptr;
    CLI::Option* cost_model = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* config = nullptr;
    CLI::Option* population = nullptr;
    CLI::Option* max_generations = nullptr;
    CLI::Option* stagnation = nullptr;
    CLI::Option* pc = nullptr;
    CLI::Option* pm = nullptr;
    CLI::Option* pl = nullptr;
    CLI::Option* elite = nullptr;
    CLI::Option* tournament = nullptr;
    CLI::Option* random_evals = nullptr;
};

OptionSet add_common(CLI::App* cmd, CliArgs& a) {
    OptionSet o;
    o.config = cmd->add_option("--config", a.config_path, "Run-config JSON file (flags override it)");
    o.src = cmd->add_option("--src", a.src, "MiniC source file");
    o.top = cmd->add_option("--top", a.top, "Top function name (default: 'top' or the only function)");
    o.key = cmd->add_option("--key", a.key, "Locking key: hex string or random:<bits>[:<seed>]");
    o.key_frac = cmd->add_option("--key-frac", a.key_frac,
                                 "Random key sized to a percentage of the full budget")
                     ->check(CLI::IsMember({25, 50, 75, 100}));
    o.tests = cmd->add_option("--tests", a.tests,
                              "Test vectors: JSON file or random:<T>[:<seed>] (default random:100)");
    o.wrong_keys = cmd->add_option("--wrong-keys", a.wrong_keys, "Number of wrong keys (default 100)");
    o.engine = cmd->add_option("--engine", a.engine, "Exploration engine: ga|random|tao|full")
                   ->check(CLI::IsMember({"ga", "random", "tao", "full"}));
    o.epsilon = cmd->add_option("--epsilon", a.epsilon, "Near-best band for selection (default 0.02)");
    o.seed = cmd->add_option("--seed", a.seed, "Master seed (default 1)");
    o.jobs = cmd->add_option("--jobs", a.jobs, "Parallel fitness evaluations (results unchanged)");
    o.step_budget = cmd->add_option("--step-budget", a.step_budget,
                                    "Interpreter steps per run before the all-zero sentinel");
    o.constant_bits = cmd->add_option("--bc", a.constant_bits, "Key bits per locked constant (default 32)");
    o.cost_model = cmd->add_option("--cost-model", a.cost_model, "Cost model JSON file");
    o.out = cmd->add_option("--out", a.out, "Output directory (default ./out)");
    o.population = cmd->add_option("--pop", a.population, "GA population (default 300)");
    o.max_generations = cmd->add_option("--max-gens", a.max_generations, "GA generation cap (default 1000)");
    o.stagnation = cmd->add_option("--stagnation", a.stagnation, "GA stop after N stagnant generations");
    o.pc = cmd->add_option("--pc", a.pc, "Crossover probability (default 0.5)");
    o.pm = cmd->add_option("--pm", a.pm, "Individual mutation probability (default 0.2)");
    o.pl = cmd->add_option("--pl", a.pl, "Per-element mutation probability (default 0.05)");
    o.elite = cmd->add_option("--elite", a.elite, "Elite count (default 1)");
    o.tournament = cmd->add_option("--tournament", a.tournament, "Tournament size (default 3)");
    o.random_evals = cmd->add_option("--random-evals", a.random_evals,
                                     "Evaluation budget for the random engine");
    return o;
}

lockopt::RunConfig build_config(const CliArgs& a, const OptionSet& o) {
    lockopt::RunConfig c;
    if (*o.config) c = lockopt::config_from_json_file(a.config_path);
    if (*o.src) c.source_path = a.src;
    if (*o.top) c.top_name = a.top;
    if (*o.key) c.key_spec = a.key;
    if (*o.key_frac) c.key_fraction = a.key_frac;
    if (*o.tests) c.tests_spec = a.tests;
    if (*o.wrong_keys) c.wrong_key_count = a.wrong_keys;
    if (*o.engine) c.engine = lockopt::engine_from_name(a.engine);
    if (*o.epsilon) c.epsilon = a.epsilon;
    if (*o.seed) c.seed = a.seed;
    if (*o.jobs) c.jobs = a.jobs;
    if (*o.step_budget) c.step_budget = a.step_budget;
    if (*o.constant_bits) c.analysis.constant_bits = a.constant_bits;
    if (*o.cost_model) c.cost_model_path = a.cost_model;
    if (*o.out) c.output_dir = a.out;
    if (*o.population) c.dse.population = a.population;
    if (*o.max_generations) c.dse.max_generations = a.max_generations;
    if (*o.stagnation) c.dse.stagnation_limit = a.stagnation;
    if (*o.pc) c.dse.crossover_prob = a.pc;
    if (*o.pm) c.dse.mutation_prob = a.pm;
    if (*o.pl) c.dse.element_mutation_prob = a.pl;
    if (*o.elite) c.dse.elite_count = a.elite;
    if (*o.tournament) c.dse.tournament_size = a.tournament;
    if (*o.random_evals) c.random_search_evals = a.random_evals;
    if (c.source_path.empty()) throw lockopt::Error("--src is required");
    return c;
}

int do_analyze(const lockopt::RunConfig& config, bool list_points) {
    lockopt::AnalyzeOutcome out = lockopt::run_analyze(config);
    std::printf("%s\n", config.source_path.c_str());
    std::printf("points: %s\n", out.table_row.c_str());
    std::printf("space: %s solutions\n", out.space.c_str());
    if (list_points) {
        for (const auto& pt : out.points) {
            std::printf("  #%-4d %-6s node %-5d fn %d  alternatives %d  bits %d%s\n", pt.point_id,
                        lockopt::spelling(pt.kind), pt.node_id, pt.function_index, pt.alternatives,
                        pt.key_cost, pt.forced ? "  forced" : "");
        }
    }
    return 0;
}

int do_lock(const lockopt::RunConfig& config) {
    auto start = std::chrono::steady_clock::now();
    lockopt::RunOutcome out = lockopt::run_lock(config);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string dir = lockopt::write_artifacts(config, out, wall);

    std::printf("points: %d ctrl, %d op, %d const, %d bits\n", out.summary.branches,
                out.summary.operations, out.summary.constants, out.summary.full_bits);
    std::printf("engine: %s  evaluations: %ld  best H found: %.6f\n",
                lockopt::spelling(config.engine), out.evaluations, out.best_h_found);
    std::printf("selected: [");
    for (size_t i = 0; i < out.selected.size(); ++i)
        std::printf("%s%d", i ? "," : "", out.selected[i]);
    std::printf("]\n");
    int nbits = static_cast<int>(out.selected_entropy.p.size());
    std::printf("H: %.6f  N*H: %.4f  key bits: %d/%zu\n", out.selected_entropy.h,
                out.selected_entropy.h * nbits, out.locked.used_bits, out.locked.correct_key.size());
    std::printf("cost: %.1f units\n", out.selected_cost.total);
    std::printf("wall: %.2fs\n", wall);
    std::printf("wrote %s/locked.c %s/report.json %s/trace.csv\n", dir.c_str(), dir.c_str(),
                dir.c_str());
    return 0;
}

int do_eval(const lockopt::RunConfig& config, const std::string& solution_path) {
    lockopt::SolutionVector solution = lockopt::load_solution_file(solution_path);
    lockopt::EvalOutcome out = lockopt::run_eval(config, solution);
    int nbits = static_cast<int>(out.entropy.p.size());
    std::printf("H: %.12f  N*H: %.6f  key bits: %d\n", out.entropy.h, out.entropy.h * nbits,
                out.key_bits);
    std::printf("runs: %ld  div_by_zero: %ld  budget_exceeded: %ld\n", out.entropy.runs,
                out.entropy.div_by_zero_runs, out.entropy.budget_exceeded_runs);
    std::printf("p:");
    for (double p : out.entropy.p) std::printf(" %.6f", p);
    std::printf("\n");
    std::printf("cost: %.1f units\n", out.cost.total);
    for (const auto& [name, units] : out.cost.breakdown)
        std::printf("  %-14s %.1f\n", name.c_str(), units);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral logic locking optimizer for MiniC sources"};
    app.require_subcommand(1);

    CliArgs analyze_args, lock_args, eval_args;
    CLI::App* analyze = app.add_subcommand("analyze", "Identify obfuscation points and key budget");
    OptionSet analyze_opts = add_common(analyze, analyze_args);
    analyze->add_flag("--points", analyze_args.list_points, "List every point");

    CLI::App* lock = app.add_subcommand("lock", "Explore, select, and emit a locked source");
    OptionSet lock_opts = add_common(lock, lock_args);

    CLI::App* eval = app.add_subcommand("eval", "Re-score a solution vector");
    OptionSet eval_opts = add_common(eval, eval_args);
    eval->add_option("--solution", eval_args.solution, "Solution JSON (array, object, or report)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return do_analyze(build_config(analyze_args, analyze_opts),
                                                 analyze_args.list_points);
        if (lock->parsed()) return do_lock(build_config(lock_args, lock_opts));
        if (eval->parsed()) return do_eval(build_config(eval_args, eval_opts), eval_args.solution);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
