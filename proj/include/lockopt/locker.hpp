#pragma once

#include <array>
#include <span>
#include <vector>

#include "lockopt/ast.hpp"
#include "lockopt/key.hpp"
#include "lockopt/points.hpp"

namespace lockopt {

struct AllocEntry {
    int point_id = 0;
    int offset = 0;
    int length = 0;
};

/// Records one applied transform, for reporting and cost estimation.
struct Activation {
    int point_id = 0;
    PointKind kind{};
    int variant = 1;
    minic::BinOp fake_op{};  // Operation only
    int offset = 0;
    int length = 0;
};

/// Operation categories used by the cost model.
enum class CostCategory : uint8_t { AddSub, Mul, Div, Bitwise, Compare, Select, Count };
inline constexpr size_t kCostCategoryCount = static_cast<size_t>(CostCategory::Count);

CostCategory cost_category(minic::BinOp op);

/// The rewritten program plus its key-bit allocation.
struct LockedProgram {
    minic::Program ast;              // top function gains `const unsigned char KEY[]`
    std::vector<AllocEntry> alloc;   // ascending point_id, packed from offset 0
    Key correct_key;                 // the full designer key
    int used_bits = 0;               // == key_bits(solution)
    std::vector<Activation> activations;
    std::array<long, kCostCategoryCount> base_ops{};  // original op counts by category
};

/// Packs key-bit ranges for the activated points: ascending point_id,
/// disjoint, starting at offset 0.
std::vector<AllocEntry> allocate_bits(std::span<const ObfuscationPoint> points,
                                      const SolutionVector& solution);

/// Applies the three locking transforms for every activated point and wires
/// the KEY parameter. Correct key bits are read from `key` at the allocated
/// offsets; with that key the locked program reproduces the original outputs.
/// Throws Error if the solution is invalid or the key is shorter than required.
LockedProgram apply_locking(const minic::Program& program,
                            std::span<const ObfuscationPoint> points,
                            const SolutionVector& solution, const Key& key);

}  // namespace lockopt
