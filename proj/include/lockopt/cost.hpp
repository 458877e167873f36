#pragma once

#include <map>
#include <span>
#include <string>

#include "lockopt/locker.hpp"

namespace lockopt {

/// Abstract per-operation area table (arbitrary units). Stands in for the
/// resource counts a synthesis flow would report; users can load their own.
struct CostModel {
    double add_sub = 32.0;
    double mul = 560.0;
    double div = 1100.0;
    double bitwise = 8.0;
    double compare = 16.0;
    double select = 16.0;            // 2-way select
    double xor_per_key_bit = 1.0;
    double register_per_key_bit = 1.0;

    double unit_for(CostCategory c) const;
    static CostModel defaults() { return {}; }
};

struct CostEstimate {
    double total = 0.0;
    std::map<std::string, double> breakdown;  // sums exactly to total
    int key_bits = 0;
};

/// Static additive estimate: base operations of the original program plus,
/// per activated point, the documented overhead (Operation: fake op + select
/// + 1 key register; Constant: B_c XORs + B_c key registers; Branch: 1 XOR +
/// 1 key register).
CostEstimate estimate_cost(const LockedProgram& locked, const CostModel& model);

struct Candidate {
    SolutionVector solution;
    double h = 0.0;
    CostEstimate cost;
};

/// Keeps candidates with h >= (1 - epsilon) * best_h and returns the index of
/// the cheapest; ties broken by fewer key bits, then fewer activated points,
/// then lexicographically smallest solution vector.
size_t select_best(std::span<const Candidate> candidates, double epsilon);

}  // namespace lockopt
