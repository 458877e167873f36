#include <doctest.h>

#include <map>

#include "lockopt/explore.hpp"
#include "lockopt/parser.hpp"
#include "support/bench.hpp"

using namespace lockopt;
using minic::Program;

namespace {

// Enumerates every solution of a small design space.
void enumerate(std::span<const ObfuscationPoint> pts, size_t i, SolutionVector& cur,
               std::vector<SolutionVector>& out) {
    if (i == pts.size()) {
        out.push_back(cur);
        return;
    }
    int low = pts[i].forced ? 1 : 0;
    for (int v = low; v <= pts[i].alternatives; ++v) {
        cur[i] = v;
        enumerate(pts, i + 1, cur, out);
    }
}

std::vector<SolutionVector> all_solutions(std::span<const ObfuscationPoint> pts) {
    std::vector<SolutionVector> out;
    SolutionVector cur(pts.size(), 0);
    enumerate(pts, 0, cur, out);
    return out;
}

struct Toy {
    Program program;
    std::vector<ObfuscationPoint> points;
    Key key;
    std::vector<Key> wrong;
    std::vector<sim::InputVector> tests;
};

Toy make_toy(const std::string& bench, uint64_t seed, int n_tests, long n_wrong) {
    Toy t{testsupport::parse_bench(bench), {}, {}, {}, {}};
    t.points = find_points(t.program);
    int bits = summarize_points(t.points).full_bits;
    Rng rng(seed);
    t.key = Key::random(size_t(bits), rng);
    t.wrong = n_wrong == 0 ? exhaustive_wrong_keys(t.key)
                           : make_wrong_keys(t.key, n_wrong, seed + 1);
    t.tests = sim::random_inputs(t.program, n_tests, seed + 2);
    return t;
}

double exhaustive_best(EvalContext& ctx, std::span<const ObfuscationPoint> pts, int key_length,
                       SolutionVector* argmax = nullptr) {
    double best = -1.0;
    for (const auto& s : all_solutions(pts)) {
        if (!is_feasible(s, pts, key_length)) continue;
        double h = ctx.evaluate(s);
        if (h > best) {
            best = h;
            if (argmax) *argmax = s;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("repair deactivates costliest points first, ties toward higher ids") {
    std::vector<ObfuscationPoint> pts(4);
    for (int i = 0; i < 4; ++i) {
        pts[size_t(i)].point_id = i;
        pts[size_t(i)].alternatives = 1;
        pts[size_t(i)].key_cost = 1;
    }
    pts[0].key_cost = 32;

    SolutionVector s = {1, 1, 1, 1};
    repair_solution(s, pts, 2);
    // Drops the 32-bit constant first, then the highest-id single-bit point.
    CHECK(s == SolutionVector{0, 1, 1, 0});

    SolutionVector t = {1, 1, 1, 1};
    pts[0].forced = true;
    CHECK_THROWS_AS(repair_solution(t, pts, 8), Error);  // forced 32 > 8
}

TEST_CASE("random feasible solutions respect ranges, forcing, and the budget") {
    Program p = testsupport::parse_bench("toy_shift.c");
    Constraints c;
    c.forced_points = {0};
    auto pts = find_points(p, c);
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        SolutionVector s = random_feasible_solution(pts, 40, rng);
        CHECK(is_feasible(s, pts, 40));
        CHECK(s[0] >= 1);
        for (size_t i = 0; i < s.size(); ++i) {
            CHECK(s[i] >= 0);
            CHECK(s[i] <= pts[i].alternatives);
        }
    }
}

TEST_CASE("tao baseline walks depth-first and skips unaffordable points") {
    std::vector<ObfuscationPoint> pts(3);
    pts[0] = {0, PointKind::Constant, 0, 0, 1, 32, {}, false};
    pts[1] = {1, PointKind::Operation, 1, 0, 2, 1, {minic::BinOp::Sub, minic::BinOp::Mul}, false};
    pts[2] = {2, PointKind::Operation, 2, 0, 2, 1, {minic::BinOp::Sub, minic::BinOp::Mul}, false};

    CHECK(tao_baseline(pts, 34) == SolutionVector{1, 1, 1});  // full budget
    CHECK(tao_baseline(pts, 33) == SolutionVector{1, 1, 0});  // second op unaffordable
    CHECK(tao_baseline(pts, 1) == SolutionVector{0, 1, 0});   // const skipped, first op taken
    CHECK(tao_baseline(pts, 0) == SolutionVector{0, 0, 0});
}

TEST_CASE("GA finds the optimum of a 12-solution space") {
    Program p = minic::parse_or_throw("int top(int a, int b) { return (a << b) ^ (a >> b); }");
    auto pts = find_points(p);
    REQUIRE(space_size(pts).str() == "12");
    Rng rng(1);
    Key key = Key::random(3, rng);
    EvalContext ctx(p, pts, key, sim::random_inputs(p, 12, 9), exhaustive_wrong_keys(key));
    double best = exhaustive_best(ctx, pts, 3);

    DseConfig cfg;
    cfg.population = 60;
    cfg.seed = 77;
    ExploreResult r = ga_explore(ctx, cfg);
    CHECK(r.best_h == doctest::Approx(best).epsilon(1e-12));
    // Caching: never more evaluations than distinct vectors in the space.
    CHECK(r.evaluations <= 12);
}

TEST_CASE("GA with zero points evaluates the empty solution once") {
    Program p = minic::parse_or_throw("int top(int a) { return a; }");
    auto pts = find_points(p);
    REQUIRE(pts.empty());
    Rng rng(2);
    Key key = Key::random(4, rng);  // designer key larger than needed
    EvalContext ctx(p, pts, key, sim::random_inputs(p, 5, 3), make_wrong_keys(key, 5, 4));
    ExploreResult r = ga_explore(ctx, DseConfig{});
    CHECK(r.best.empty());
    CHECK(r.best_h == 0.0);
    CHECK(r.evaluations == 1);
    REQUIRE(r.trace.size() == 1);
}

TEST_CASE("GA trace: best never decreases, stats are population moments") {
    Toy toy = make_toy("toy_wide.c", 11, 8, 0);
    EvalContext ctx(toy.program, toy.points, toy.key, toy.tests, toy.wrong);
    DseConfig cfg;
    cfg.population = 20;
    cfg.max_generations = 30;
    cfg.seed = 5;
    ExploreResult r = ga_explore(ctx, cfg);
    REQUIRE(r.trace.size() >= 2);
    for (size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].best_h >= r.trace[i - 1].best_h);
        CHECK(r.trace[i].evaluations >= r.trace[i - 1].evaluations);
    }
    for (const auto& g : r.trace) {
        CHECK(g.mean_h >= 0.0);
        CHECK(g.mean_h <= 1.0);
        CHECK(g.std_h >= 0.0);
    }
}

TEST_CASE("GA determinism: same seed gives identical traces, any jobs value") {
    Toy toy = make_toy("toy_mix.c", 23, 6, 10);
    DseConfig cfg;
    cfg.population = 12;
    cfg.max_generations = 15;
    cfg.seed = 99;

    auto run_one = [&](int jobs) {
        EvalContext ctx(toy.program, toy.points, toy.key, toy.tests, toy.wrong,
                        sim::kDefaultStepBudget, jobs);
        DseConfig c = cfg;
        c.jobs = jobs;
        return ga_explore(ctx, c);
    };
    ExploreResult a = run_one(1);
    ExploreResult b = run_one(1);
    ExploreResult c = run_one(4);

    CHECK(a.best == b.best);
    CHECK(a.best == c.best);
    REQUIRE(a.trace.size() == b.trace.size());
    REQUIRE(a.trace.size() == c.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].best_h == b.trace[i].best_h);
        CHECK(a.trace[i].best_h == c.trace[i].best_h);
        CHECK(a.trace[i].mean_h == c.trace[i].mean_h);
        CHECK(a.trace[i].std_h == c.trace[i].std_h);
        CHECK(a.trace[i].evaluations == c.trace[i].evaluations);
    }
    REQUIRE(a.band.size() == c.band.size());
    for (size_t i = 0; i < a.band.size(); ++i) {
        CHECK(a.band[i].solution == c.band[i].solution);
        CHECK(a.band[i].h == c.band[i].h);
    }
}

TEST_CASE("GA emits only feasible solutions that honor forcing") {
    Program p = testsupport::parse_bench("toy_mix.c");
    Constraints con;
    con.forced_points = {1};
    auto pts = find_points(p, con);
    Rng rng(3);
    Key key = Key::random(3, rng);  // tighter than the 4-bit full budget
    EvalContext ctx(p, pts, key, sim::random_inputs(p, 6, 4), make_wrong_keys(key, 7, 5));
    DseConfig cfg;
    cfg.population = 10;
    cfg.max_generations = 10;
    cfg.seed = 31;
    ExploreResult r = ga_explore(ctx, cfg);
    CHECK(is_feasible(r.best, pts, 3));
    CHECK(r.best[1] >= 1);
    for (const auto& s : r.band) {
        CHECK(is_feasible(s.solution, pts, 3));
        CHECK(s.solution[1] >= 1);
    }
}

TEST_CASE("random search") {
    Program p = minic::parse_or_throw("int top(int a, int b) { return (a << b) ^ (a >> b); }");
    auto pts = find_points(p);
    Rng rng(8);
    Key key = Key::random(3, rng);

    SUBCASE("exhaustive budget with dedup reaches the optimum") {
        EvalContext ctx(p, pts, key, sim::random_inputs(p, 10, 2), exhaustive_wrong_keys(key));
        double best = exhaustive_best(ctx, pts, 3);
        EvalContext fresh(p, pts, key, sim::random_inputs(p, 10, 2), exhaustive_wrong_keys(key));
        ExploreResult r = random_search(fresh, 12, 55);
        CHECK(r.evaluations == 12);
        CHECK(r.best_h == doctest::Approx(best).epsilon(1e-12));
    }
    SUBCASE("budget one evaluates a single feasible draw") {
        EvalContext ctx(p, pts, key, sim::random_inputs(p, 10, 2), exhaustive_wrong_keys(key));
        ExploreResult r = random_search(ctx, 1, 7);
        CHECK(r.evaluations == 1);
        CHECK(is_feasible(r.best, pts, 3));
    }
    SUBCASE("same seed, same result") {
        EvalContext c1(p, pts, key, sim::random_inputs(p, 10, 2), exhaustive_wrong_keys(key));
        EvalContext c2(p, pts, key, sim::random_inputs(p, 10, 2), exhaustive_wrong_keys(key));
        ExploreResult r1 = random_search(c1, 5, 21);
        ExploreResult r2 = random_search(c2, 5, 21);
        CHECK(r1.best == r2.best);
        CHECK(r1.best_h == r2.best_h);
    }
}

TEST_CASE("band contains exactly the near-best evaluated solutions") {
    Toy toy = make_toy("cancel.c", 47, 16, 0);
    EvalContext ctx(toy.program, toy.points, toy.key, toy.tests, toy.wrong);
    DseConfig cfg;
    cfg.population = 16;
    cfg.seed = 3;
    cfg.epsilon = 0.05;
    ExploreResult r = ga_explore(ctx, cfg);
    double floor = (1.0 - 0.05) * r.best_h;
    for (const auto& s : r.band) CHECK(s.h >= floor);
    // Every cached solution above the floor is in the band.
    size_t above = 0;
    for (const auto& [vec, h] : ctx.cache()) above += h >= floor;
    CHECK(above == r.band.size());
    // The band is sorted by descending h.
    for (size_t i = 1; i < r.band.size(); ++i) CHECK(r.band[i - 1].h >= r.band[i].h);
}

TEST_CASE("30 seeded GA runs hit the exhaustive optimum on a toy space") {
    Toy toy = make_toy("toy_mix.c", 9, 10, 0);
    EvalContext oracle_ctx(toy.program, toy.points, toy.key, toy.tests, toy.wrong);
    double best = exhaustive_best(oracle_ctx, toy.points, int(toy.key.size()));
    int hits = 0;
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        EvalContext ctx(toy.program, toy.points, toy.key, toy.tests, toy.wrong);
        DseConfig cfg;
        cfg.population = 120;
        cfg.seed = seed;
        ExploreResult r = ga_explore(ctx, cfg);
        hits += std::abs(r.best_h - best) <= 1e-12;
    }
    CHECK(hits >= 9);
}
