#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "lockopt/entropy.hpp"
#include "lockopt/key.hpp"
#include "lockopt/points.hpp"
#include "lockopt/sim.hpp"

namespace lockopt {

/// Search hyperparameters. Defaults follow the experimental protocol:
/// population 300 evolved for at most 1000 generations, stopping after 10
/// stagnant generations, Pc = 0.5, Pm = 0.2, Pl = 0.05.
struct DseConfig {
    int population = 300;
    int max_generations = 1000;
    int stagnation_limit = 10;
    double crossover_prob = 0.5;       // Pc
    double mutation_prob = 0.2;        // Pm, per individual
    double element_mutation_prob = 0.05;  // Pl, per element
    int elite_count = 1;
    int tournament_size = 3;
    uint64_t seed = 1;
    int jobs = 1;
    double epsilon = 0.02;  // near-best band kept for selection
};

struct GenerationStats {
    int generation = 0;
    double best_h = 0.0;  // best seen so far; non-decreasing
    double mean_h = 0.0;  // population mean
    double std_h = 0.0;   // population standard deviation
    long evaluations = 0; // cumulative distinct solutions evaluated
    int best_key_bits = 0;
};

using DseTrace = std::vector<GenerationStats>;

struct ScoredSolution {
    SolutionVector solution;
    double h = 0.0;
    int key_bits = 0;
};

struct ExploreResult {
    SolutionVector best;
    double best_h = 0.0;
    std::vector<ScoredSolution> band;  // every evaluated solution within epsilon of best
    DseTrace trace;
    long evaluations = 0;
};

/// Everything a search engine needs to score solutions. Fitness values are
/// cached so identical vectors are evaluated at most once per run.
class EvalContext {
  public:
    EvalContext(const minic::Program& program, std::span<const ObfuscationPoint> points,
                const Key& correct_key, std::vector<sim::InputVector> tests,
                const std::vector<Key>& wrong_keys,
                long step_budget = sim::kDefaultStepBudget, int jobs = 1);

    double evaluate(const SolutionVector& solution);
    EntropyReport evaluate_full(const SolutionVector& solution) const;

    /// Evaluates a batch in parallel (jobs threads); same results as serial.
    void evaluate_batch(std::span<const SolutionVector> solutions);

    const minic::Program& program() const { return *program_; }
    std::span<const ObfuscationPoint> points() const { return points_; }
    const Key& correct_key() const { return key_; }
    int key_length() const { return static_cast<int>(key_.size()); }
    const std::vector<sim::InputVector>& tests() const { return tests_; }
    const std::vector<sim::OutputBits>& golden_outputs() const { return golden_; }
    const std::vector<Key>& wrong_keys() const { return wrong_keys_; }
    long step_budget() const { return step_budget_; }
    long evaluations() const { return static_cast<long>(cache_.size()); }
    const std::map<SolutionVector, double>& cache() const { return cache_; }

  private:
    const minic::Program* program_;
    std::span<const ObfuscationPoint> points_;
    Key key_;
    std::vector<sim::InputVector> tests_;
    std::vector<sim::OutputBits> golden_;
    std::vector<Key> wrong_keys_;
    long step_budget_;
    int jobs_;
    std::map<SolutionVector, double> cache_;
};

/// Uniform random solution over the per-point ranges (forced points never 0),
/// repaired to feasibility.
SolutionVector random_feasible_solution(std::span<const ObfuscationPoint> points, int key_length,
                                        Rng& rng);

/// Feasibility repair: deactivates active non-forced points in descending
/// key-cost order (ties by descending point_id) until the solution fits.
/// Throws Error if the forced points alone exceed the budget.
void repair_solution(SolutionVector& solution, std::span<const ObfuscationPoint> points,
                     int key_length);

/// Integer-encoded genetic algorithm: tournament selection, single-point
/// crossover, per-element resampling mutation, repair, elitist survival.
/// Deterministic for a given seed, independent of the jobs value.
ExploreResult ga_explore(EvalContext& ctx, const DseConfig& config);

/// Depth-first baseline: activates each point with variant 1 while the
/// remaining budget allows, skipping unaffordable points. No fitness guidance.
SolutionVector tao_baseline(std::span<const ObfuscationPoint> points, int key_length);

/// Best of `budget_evals` distinct uniformly sampled feasible solutions.
ExploreResult random_search(EvalContext& ctx, long budget_evals, uint64_t seed,
                            double epsilon = 0.02);

/// Scores one externally chosen solution (used by the tao/full engines).
ExploreResult evaluate_single(EvalContext& ctx, const SolutionVector& solution,
                              double epsilon = 0.02);

}  // namespace lockopt
