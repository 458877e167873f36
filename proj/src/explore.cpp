#include "lockopt/explore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "lockopt/common.hpp"
#include "lockopt/locker.hpp"

namespace lockopt {

EvalContext::EvalContext(const minic::Program& program, std::span<const ObfuscationPoint> points,
                         const Key& correct_key, std::vector<sim::InputVector> tests,
                         const std::vector<Key>& wrong_keys, long step_budget, int jobs)
    : program_(&program),
      points_(points),
      key_(correct_key),
      tests_(std::move(tests)),
      wrong_keys_(wrong_keys),
      step_budget_(step_budget),
      jobs_(std::max(jobs, 1)) {
    golden_ = sim::golden(*program_, tests_, step_budget_);
}

EntropyReport EvalContext::evaluate_full(const SolutionVector& solution) const {
    LockedProgram locked = apply_locking(*program_, points_, solution, key_);
    return flip_probabilities(locked, tests_, golden_, wrong_keys_, step_budget_, jobs_);
}

double EvalContext::evaluate(const SolutionVector& solution) {
    auto it = cache_.find(solution);
    if (it != cache_.end()) return it->second;
    LockedProgram locked = apply_locking(*program_, points_, solution, key_);
    EntropyReport report = flip_probabilities(locked, tests_, golden_, wrong_keys_, step_budget_,
                                              jobs_);
    cache_.emplace(solution, report.h);
    return report.h;
}

void EvalContext::evaluate_batch(std::span<const SolutionVector> solutions) {
    // Deduplicate against the cache and within the batch.
    std::vector<const SolutionVector*> todo;
    std::set<SolutionVector> batch_seen;
    for (const SolutionVector& s : solutions) {
        if (cache_.count(s) || !batch_seen.insert(s).second) continue;
        todo.push_back(&s);
    }
    if (todo.empty()) return;
    if (jobs_ <= 1 || todo.size() == 1) {
        for (const SolutionVector* s : todo) evaluate(*s);
        return;
    }
    std::vector<double> results(todo.size());
    std::atomic<size_t> cursor{0};
    size_t nworkers = std::min<size_t>(static_cast<size_t>(jobs_), todo.size());
    std::vector<std::thread> workers;
    for (size_t w = 0; w < nworkers; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                size_t i = cursor.fetch_add(1);
                if (i >= todo.size()) return;
                LockedProgram locked = apply_locking(*program_, points_, *todo[i], key_);
                EntropyReport r = flip_probabilities(locked, tests_, golden_, wrong_keys_,
                                                     step_budget_, 1);
                results[i] = r.h;
            }
        });
    }
    for (auto& w : workers) w.join();
    for (size_t i = 0; i < todo.size(); ++i) cache_.emplace(*todo[i], results[i]);
}

void repair_solution(SolutionVector& solution, std::span<const ObfuscationPoint> points,
                     int key_length) {
    int bits = key_bits(solution, points);
    while (bits > key_length) {
        // Deactivate the costliest active non-forced point; break cost ties
        // toward the highest point_id.
        int pick = -1;
        for (size_t i = 0; i < points.size(); ++i) {
            if (solution[i] == 0 || points[i].forced) continue;
            if (pick < 0 || points[i].key_cost > points[static_cast<size_t>(pick)].key_cost ||
                (points[i].key_cost == points[static_cast<size_t>(pick)].key_cost &&
                 static_cast<int>(i) > pick)) {
                pick = static_cast<int>(i);
            }
        }
        if (pick < 0)
            throw Error("no feasible solution: forced points need " + std::to_string(bits) +
                        " bits but the key has " + std::to_string(key_length));
        bits -= points[static_cast<size_t>(pick)].key_cost;
        solution[static_cast<size_t>(pick)] = 0;
    }
}

SolutionVector random_feasible_solution(std::span<const ObfuscationPoint> points, int key_length,
                                        Rng& rng) {
    SolutionVector s(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        int low = points[i].forced ? 1 : 0;
        s[i] = low + static_cast<int>(rng.below(static_cast<uint32_t>(points[i].alternatives - low + 1)));
    }
    repair_solution(s, points, key_length);
    return s;
}

namespace {

struct BestTracker {
    SolutionVector solution;
    double h = -1.0;

    // Strict improvement only, so the first solution reaching a value wins.
    bool offer(const SolutionVector& s, double value) {
        if (value > h) {
            h = value;
            solution = s;
            return true;
        }
        return false;
    }
};

GenerationStats population_stats(int generation, const std::vector<double>& fitness,
                                 const BestTracker& best, long evaluations,
                                 std::span<const ObfuscationPoint> points) {
    GenerationStats g;
    g.generation = generation;
    g.best_h = best.h;
    double sum = 0.0;
    for (double f : fitness) sum += f;
    g.mean_h = fitness.empty() ? 0.0 : sum / static_cast<double>(fitness.size());
    double var = 0.0;
    for (double f : fitness) var += (f - g.mean_h) * (f - g.mean_h);
    g.std_h = fitness.empty() ? 0.0 : std::sqrt(var / static_cast<double>(fitness.size()));
    g.evaluations = evaluations;
    g.best_key_bits = key_bits(best.solution, points);
    return g;
}

std::vector<ScoredSolution> band_of(const EvalContext& ctx, double best_h, double epsilon) {
    std::vector<ScoredSolution> band;
    double floor = (1.0 - epsilon) * best_h;
    for (const auto& [vec, h] : ctx.cache()) {
        if (h >= floor) band.push_back({vec, h, key_bits(vec, ctx.points())});
    }
    std::sort(band.begin(), band.end(), [](const ScoredSolution& a, const ScoredSolution& b) {
        if (a.h != b.h) return a.h > b.h;
        if (a.key_bits != b.key_bits) return a.key_bits < b.key_bits;
        return a.solution < b.solution;
    });
    return band;
}

}  // namespace

ExploreResult ga_explore(EvalContext& ctx, const DseConfig& config) {
    auto points = ctx.points();
    size_t n = points.size();
    int key_length = ctx.key_length();
    if (config.population < 2) throw Error("population must be at least 2");
    if (config.elite_count >= config.population) throw Error("elite count must be below population");

    ExploreResult result;
    BestTracker best;

    if (n == 0) {
        SolutionVector empty;
        double h = ctx.evaluate(empty);
        best.offer(empty, h);
        result.trace.push_back(population_stats(0, {h}, best, ctx.evaluations(), points));
    } else {
        Rng rng(config.seed);
        size_t pop_size = static_cast<size_t>(config.population);
        std::vector<SolutionVector> population;
        population.reserve(pop_size);
        for (size_t i = 0; i < pop_size; ++i)
            population.push_back(random_feasible_solution(points, key_length, rng));

        std::vector<double> fitness(pop_size);
        auto score_population = [&] {
            ctx.evaluate_batch(population);
            for (size_t i = 0; i < pop_size; ++i) {
                fitness[i] = ctx.evaluate(population[i]);  // cache hit
                best.offer(population[i], fitness[i]);
            }
        };
        score_population();
        result.trace.push_back(population_stats(0, fitness, best, ctx.evaluations(), points));

        auto tournament = [&]() -> const SolutionVector& {
            size_t winner = static_cast<size_t>(rng.below(static_cast<uint32_t>(pop_size)));
            for (int t = 1; t < config.tournament_size; ++t) {
                size_t rival = static_cast<size_t>(rng.below(static_cast<uint32_t>(pop_size)));
                if (fitness[rival] > fitness[winner]) winner = rival;
            }
            return population[winner];
        };

        int stagnant = 0;
        for (int gen = 1; gen <= config.max_generations && stagnant < config.stagnation_limit;
             ++gen) {
            // Elites by fitness; ties resolved by the solution vector so the
            // chosen set is deterministic.
            std::vector<size_t> order(pop_size);
            for (size_t i = 0; i < pop_size; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
                return population[a] < population[b];
            });
            std::vector<SolutionVector> next;
            next.reserve(pop_size);
            for (int e = 0; e < config.elite_count; ++e)
                next.push_back(population[order[static_cast<size_t>(e)]]);

            std::vector<SolutionVector> offspring;
            offspring.reserve(pop_size - next.size());
            while (offspring.size() < pop_size - next.size())
                offspring.push_back(tournament());
            for (size_t i = 0; i + 1 < offspring.size(); i += 2) {
                if (n >= 2 && rng.chance(config.crossover_prob)) {
                    size_t cut = 1 + static_cast<size_t>(rng.below(static_cast<uint32_t>(n - 1)));
                    for (size_t k = cut; k < n; ++k)
                        std::swap(offspring[i][k], offspring[i + 1][k]);
                }
            }
            for (SolutionVector& child : offspring) {
                if (rng.chance(config.mutation_prob)) {
                    for (size_t k = 0; k < n; ++k) {
                        if (!rng.chance(config.element_mutation_prob)) continue;
                        int low = points[k].forced ? 1 : 0;
                        child[k] = low + static_cast<int>(rng.below(
                                             static_cast<uint32_t>(points[k].alternatives - low + 1)));
                    }
                }
                repair_solution(child, points, key_length);
                next.push_back(std::move(child));
            }
            population = std::move(next);

            double previous_best = best.h;
            score_population();
            stagnant = best.h > previous_best ? 0 : stagnant + 1;
            result.trace.push_back(population_stats(gen, fitness, best, ctx.evaluations(), points));
        }
    }

    result.best = best.solution;
    result.best_h = best.h;
    result.evaluations = ctx.evaluations();
    result.band = band_of(ctx, best.h, config.epsilon);
    return result;
}

SolutionVector tao_baseline(std::span<const ObfuscationPoint> points, int key_length) {
    SolutionVector s(points.size(), 0);
    int remaining = key_length;
    for (size_t i = 0; i < points.size(); ++i) {
        if (points[i].key_cost <= remaining) {
            s[i] = 1;
            remaining -= points[i].key_cost;
        }
    }
    return s;
}

ExploreResult random_search(EvalContext& ctx, long budget_evals, uint64_t seed, double epsilon) {
    auto points = ctx.points();
    ExploreResult result;
    BestTracker best;
    if (points.empty() || budget_evals < 1) {
        SolutionVector minimal(points.size(), 0);
        for (size_t i = 0; i < points.size(); ++i) {
            if (points[i].forced) minimal[i] = 1;
        }
        repair_solution(minimal, points, ctx.key_length());
        best.offer(minimal, ctx.evaluate(minimal));
        result.trace.push_back(population_stats(0, {best.h}, best, ctx.evaluations(), points));
    } else {
        Rng rng(seed);
        std::set<SolutionVector> seen;
        long attempts_left = budget_evals * 50 + 1000;  // bails out near exhaustion
        int generation = 0;
        while (static_cast<long>(seen.size()) < budget_evals && attempts_left-- > 0) {
            SolutionVector s = random_feasible_solution(points, ctx.key_length(), rng);
            if (!seen.insert(s).second) continue;
            double h = ctx.evaluate(s);
            if (best.offer(s, h)) {
                result.trace.push_back(
                    population_stats(generation, {h}, best, ctx.evaluations(), points));
            }
            ++generation;
        }
    }
    result.best = best.solution;
    result.best_h = best.h;
    result.evaluations = ctx.evaluations();
    result.band = band_of(ctx, best.h, epsilon);
    return result;
}

ExploreResult evaluate_single(EvalContext& ctx, const SolutionVector& solution, double epsilon) {
    ExploreResult result;
    double h = ctx.evaluate(solution);
    result.best = solution;
    result.best_h = h;
    result.evaluations = ctx.evaluations();
    BestTracker best;
    best.offer(solution, h);
    result.trace.push_back(population_stats(0, {h}, best, ctx.evaluations(), ctx.points()));
    result.band = band_of(ctx, h, epsilon);
    return result;
}

}  // namespace lockopt
