#pragma once

#include <vector>

#include "lockopt/key.hpp"
#include "lockopt/locker.hpp"
#include "lockopt/sim.hpp"

namespace lockopt {

/// Security metric for one locked solution: per-output-bit flip probabilities
/// and their mean binary entropy (log base 2, so H is in [0, 1]).
struct EntropyReport {
    std::vector<double> p;  // P_i per output bit
    double h = 0.0;
    long runs = 0;  // W * T
    long div_by_zero_runs = 0;
    long budget_exceeded_runs = 0;
};

/// Binary entropy h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0.
double binary_entropy(double p);

/// Mean binary entropy of a probability vector.
double differential_entropy(const std::vector<double>& p);

/// P_i = (sum over wrong keys and tests of golden[i] xor out[i]) / (W * T).
/// Abnormal runs contribute their sentinel outputs; none are discarded.
/// `jobs` parallelizes over wrong keys; results are identical for any value.
EntropyReport flip_probabilities(const LockedProgram& locked,
                                 const std::vector<sim::InputVector>& tests,
                                 const std::vector<sim::OutputBits>& golden_outputs,
                                 const std::vector<Key>& wrong_keys,
                                 long step_budget = sim::kDefaultStepBudget, int jobs = 1);

/// W distinct uniform random keys of |correct| bits, none equal to the correct
/// key. Deterministic for a given seed. Throws Error if W exceeds 2^|K| - 1.
std::vector<Key> make_wrong_keys(const Key& correct, long count, uint64_t seed);

/// All 2^|K| - 1 keys differing from the correct one, ascending as integers.
/// Only valid for |K| <= 20; intended for small exact evaluations.
std::vector<Key> exhaustive_wrong_keys(const Key& correct);

}  // namespace lockopt
