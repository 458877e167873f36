#pragma once

#include <span>
#include <string>
#include <vector>

#include "lockopt/ast.hpp"
#include "lockopt/bigint.hpp"

namespace lockopt {

enum class PointKind : uint8_t { Constant, Operation, Branch };

const char* spelling(PointKind k);

/// A lockable site in the AST. point_ids are contiguous from 0 in depth-first
/// (preorder) order of the locked node.
struct ObfuscationPoint {
    int point_id = 0;
    PointKind kind{};
    int32_t node_id = 0;
    int function_index = 0;
    int alternatives = 1;  // O_i: Constant/Branch 1, Operation |fake set|
    int key_cost = 1;      // bits when activated: Constant B_c, others 1
    std::vector<minic::BinOp> fake_ops;  // Operation only; variant v uses fake_ops[v-1]
    bool forced = false;
};

/// Designer constraints applied during analysis.
struct Constraints {
    std::vector<std::string> excluded_functions;
    std::vector<int> forced_points;
};

struct AnalysisOptions {
    int constant_bits = 32;  // B_c, key bits per locked constant
};

/// One entry per point: 0 = not locked, v in [1, O_i] = locked with variant v.
using SolutionVector = std::vector<int>;

/// Fake-operation alternatives for an operator; empty means not lockable.
/// Division and modulo are excluded on both sides so locked programs stay total.
std::span<const minic::BinOp> fake_ops_for(minic::BinOp op);

/// Identifies all obfuscation points of a program in depth-first order:
/// every integer literal (Constant), every binary operation with a nonempty
/// fake set (Operation), and every if/ternary condition (Branch). Loop
/// conditions are not Branch points, a condition root is never also an
/// Operation/Constant point, and array subscript expressions are skipped
/// entirely (locking them would lock the memory access pattern).
std::vector<ObfuscationPoint> find_points(const minic::Program& program,
                                          const Constraints& constraints = {},
                                          const AnalysisOptions& options = {});

/// Total key bits consumed by a solution (sum of key_cost over nonzero entries).
int key_bits(const SolutionVector& solution, std::span<const ObfuscationPoint> points);

/// Number of solutions in the design space: product of (O_i + 1) over free
/// points times O_i over forced points.
BigUint space_size(std::span<const ObfuscationPoint> points);

/// True iff the solution fits in a key of `key_length` bits.
bool is_feasible(const SolutionVector& solution, std::span<const ObfuscationPoint> points,
                 int key_length);

/// Validates entry ranges and forced points; throws Error on violation.
void validate_solution(const SolutionVector& solution, std::span<const ObfuscationPoint> points);

struct PointSummary {
    int branches = 0;
    int operations = 0;
    int constants = 0;
    int full_bits = 0;  // key bits of the all-ones solution
};

PointSummary summarize_points(std::span<const ObfuscationPoint> points);

}  // namespace lockopt
