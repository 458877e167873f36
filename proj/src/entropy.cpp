#include "lockopt/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "lockopt/common.hpp"

namespace lockopt {

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double differential_entropy(const std::vector<double>& p) {
    if (p.empty()) return 0.0;
    double sum = 0.0;
    for (double v : p) sum += binary_entropy(v);
    return sum / static_cast<double>(p.size());
}

namespace {

struct PartialCounts {
    std::vector<long> flips;
    long div_by_zero = 0;
    long budget_exceeded = 0;
};

PartialCounts count_range(const LockedProgram& locked, const std::vector<sim::InputVector>& tests,
                          const std::vector<sim::OutputBits>& golden_outputs,
                          const std::vector<Key>& wrong_keys, size_t first, size_t last,
                          long step_budget, size_t nbits) {
    PartialCounts partial;
    partial.flips.assign(nbits, 0);
    for (size_t w = first; w < last; ++w) {
        std::optional<Key> key = wrong_keys[w];
        for (size_t t = 0; t < tests.size(); ++t) {
            sim::OutputBits out = sim::run(locked.ast, tests[t], key, step_budget);
            if (out.status == sim::RunStatus::DivByZero) ++partial.div_by_zero;
            if (out.status == sim::RunStatus::StepBudgetExceeded) ++partial.budget_exceeded;
            const auto& g = golden_outputs[t].bits;
            for (size_t i = 0; i < nbits; ++i) partial.flips[i] += g[i] ^ out.bits[i];
        }
    }
    return partial;
}

}  // namespace

EntropyReport flip_probabilities(const LockedProgram& locked,
                                 const std::vector<sim::InputVector>& tests,
                                 const std::vector<sim::OutputBits>& golden_outputs,
                                 const std::vector<Key>& wrong_keys, long step_budget, int jobs) {
    if (tests.empty()) throw Error("flip probabilities need at least one test input");
    if (wrong_keys.empty()) throw Error("flip probabilities need at least one wrong key");
    if (golden_outputs.size() != tests.size())
        throw Error("golden outputs do not match the test set");

    size_t nbits = golden_outputs[0].bits.size();
    size_t nkeys = wrong_keys.size();
    size_t njobs = std::min<size_t>(std::max(jobs, 1), nkeys);

    std::vector<PartialCounts> partials(njobs);
    if (njobs <= 1) {
        partials[0] = count_range(locked, tests, golden_outputs, wrong_keys, 0, nkeys, step_budget,
                                  nbits);
    } else {
        // Fixed chunking by key index; the merge below is in chunk order, so
        // the integer totals are identical for every jobs value.
        std::vector<std::thread> workers;
        size_t chunk = (nkeys + njobs - 1) / njobs;
        for (size_t j = 0; j < njobs; ++j) {
            size_t first = j * chunk;
            size_t last = std::min(nkeys, first + chunk);
            workers.emplace_back([&, j, first, last] {
                partials[j] = count_range(locked, tests, golden_outputs, wrong_keys, first, last,
                                          step_budget, nbits);
            });
        }
        for (auto& w : workers) w.join();
    }

    std::vector<long> flips(nbits, 0);
    EntropyReport report;
    for (const PartialCounts& part : partials) {
        if (part.flips.empty()) continue;
        for (size_t i = 0; i < nbits; ++i) flips[i] += part.flips[i];
        report.div_by_zero_runs += part.div_by_zero;
        report.budget_exceeded_runs += part.budget_exceeded;
    }
    report.runs = static_cast<long>(nkeys * tests.size());
    report.p.resize(nbits);
    for (size_t i = 0; i < nbits; ++i)
        report.p[i] = static_cast<double>(flips[i]) / static_cast<double>(report.runs);
    report.h = differential_entropy(report.p);
    return report;
}

std::vector<Key> make_wrong_keys(const Key& correct, long count, uint64_t seed) {
    size_t nbits = correct.size();
    if (count < 1) throw Error("wrong key count must be at least 1");
    if (nbits < 63) {
        uint64_t space = (uint64_t(1) << nbits) - 1;  // keys != correct
        if (static_cast<uint64_t>(count) > space)
            throw Error("cannot draw " + std::to_string(count) + " distinct wrong keys from a " +
                        std::to_string(nbits) + "-bit key space");
    }
    Rng rng(seed);
    std::set<Key> seen;
    std::vector<Key> keys;
    keys.reserve(static_cast<size_t>(count));
    while (static_cast<long>(keys.size()) < count) {
        Key k = Key::random(nbits, rng);
        if (k == correct || !seen.insert(k).second) continue;
        keys.push_back(std::move(k));
    }
    return keys;
}

std::vector<Key> exhaustive_wrong_keys(const Key& correct) {
    size_t nbits = correct.size();
    if (nbits > 20) throw Error("exhaustive wrong-key sets are limited to 20-bit keys");
    uint64_t space = uint64_t(1) << nbits;
    std::vector<Key> keys;
    keys.reserve(space - 1);
    for (uint64_t v = 0; v < space; ++v) {
        Key k = Key::zeros(nbits);
        for (size_t i = 0; i < nbits; ++i) k.set_bit(i, static_cast<uint8_t>((v >> i) & 1));
        if (k == correct) continue;
        keys.push_back(std::move(k));
    }
    return keys;
}

}  // namespace lockopt
