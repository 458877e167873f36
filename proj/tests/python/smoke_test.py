"""End-to-end smoke test for the _lockopt extension module."""

import os
import sys

import _lockopt as lk

BENCH = os.environ.get("LOCKOPT_BENCH_DIR", "benchmarks")

failures = []


def check(name, cond):
    print(f"[{'ok' if cond else 'FAIL'}] {name}")
    if not cond:
        failures.append(name)


def read_bench(name):
    with open(os.path.join(BENCH, name)) as f:
        return f.read()


# --- frontend ---------------------------------------------------------------
program = lk.parse(read_bench("bubblesort.c"))
check("parse: top function", program.top_name == "top")
check("parse: output bits", program.output_bit_count == 8 * 32 + 32)

emitted = program.emit_source()
reparsed = lk.parse(emitted)
check("round-trip emits identically", reparsed.emit_source() == emitted)

try:
    lk.parse("int top(int a) { float x; }")
    check("diagnostics on unsupported constructs", False)
except lk.LockoptError as e:
    check("diagnostics on unsupported constructs", "unsupported" in str(e))

# --- analysis ---------------------------------------------------------------
points = lk.find_points(program)
kinds = [p.kind for p in points]
check("bubblesort: 11 operations", kinds.count(lk.PointKind.OPERATION) == 11)
check("bubblesort: 4 constants", kinds.count(lk.PointKind.CONSTANT) == 4)
check("bubblesort: 139-bit budget", lk.key_bits([1] * len(points), points) == 139)
check("space size is a python int", lk.space_size(points) == 1259712)
check("feasibility boundary", lk.is_feasible([1] * len(points), points, 139)
      and not lk.is_feasible([1] * len(points), points, 138))

# --- locking and simulation -------------------------------------------------
cancel = lk.parse(read_bench("cancel.c"))
cpoints = lk.find_points(cancel)
key = lk.Key.random(3, seed=41)
locked = lk.apply_locking(cancel, cpoints, [1, 1, 1], key)
check("allocation covers the solution", locked.used_bits == 3 and len(locked.alloc) == 3)

tests = lk.random_inputs(cancel, 16, seed=42)
golden_bits = [lk.run(cancel, t)[0] for t in tests]
locked_bits = [lk.run(locked.ast, t, key)[0] for t in tests]
check("correct-key fidelity", golden_bits == locked_bits)

# --- entropy ----------------------------------------------------------------
check("binary entropy peak", lk.differential_entropy([0.5, 0.5]) == 1.0)
check("binary entropy endpoints", lk.binary_entropy(0.0) == 0.0 and lk.binary_entropy(1.0) == 0.0)

wrong = lk.exhaustive_wrong_keys(key)
check("exhaustive wrong keys", len(wrong) == 7)
report = lk.flip_probabilities(cancel, locked, tests, wrong)
check("entropy report shape", len(report.p) == 32 and report.runs == 7 * 16)
check("entropy in range", 0.0 <= report.h <= 1.0)

# --- exploration ------------------------------------------------------------
ctx = lk.Context(cancel, cpoints, key, tests, wrong, jobs=2)
cfg = lk.DseConfig()
cfg.population = 60
cfg.seed = 9
result = ctx.ga_explore(cfg)
check("GA best is feasible", lk.is_feasible(result.best, cpoints, 3))
check("GA trace is monotone",
      all(a.best_h <= b.best_h for a, b in zip(result.trace, result.trace[1:])))

rerun = lk.Context(cancel, cpoints, key, tests, wrong).ga_explore(cfg)
check("GA is deterministic per seed",
      rerun.best == result.best and rerun.best_h == result.best_h)

tao = lk.tao_baseline(cpoints, 3)
check("TAO fills the budget", tao == [1, 1, 1])
tao_h = ctx.evaluate(tao)
check("GA at least matches TAO", result.best_h >= tao_h)

# --- cost -------------------------------------------------------------------
est = lk.estimate_cost(locked)
check("cost breakdown sums to total", abs(sum(est.breakdown.values()) - est.total) < 1e-9)
check("cost tracks key bits", est.key_bits == 3)

print()
if failures:
    print(f"{len(failures)} smoke check(s) failed")
    sys.exit(1)
print("all smoke checks passed")
