#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lockopt/ast.hpp"
#include "lockopt/key.hpp"
#include "lockopt/rng.hpp"

namespace lockopt::sim {

/// Values for the top function's in-parameters, in declaration order.
/// Scalars hold one element; const arrays hold one element per slot.
struct InputVector {
    std::vector<std::vector<uint32_t>> values;
};

enum class RunStatus : uint8_t { Normal, StepBudgetExceeded, DivByZero };

const char* spelling(RunStatus s);

/// Output bits of one run: out arrays elementwise in declaration order, each
/// word LSB first, followed by the return value. |bits| == N for every status.
struct OutputBits {
    std::vector<uint8_t> bits;
    RunStatus status = RunStatus::Normal;
};

inline constexpr long kDefaultStepBudget = 10'000'000;

/// Executes the program on one input vector. `key` must be present iff the
/// program is locked. Semantics: two's-complement wrap-around, shift counts
/// masked to the promoted width, short-circuit logicals, division by zero
/// yields 0 with DivByZero status, array indices wrap modulo the length, and
/// exceeding the step budget yields all-zero bits with StepBudgetExceeded.
OutputBits run(const minic::Program& program, const InputVector& input,
               const std::optional<Key>& key = std::nullopt,
               long step_budget = kDefaultStepBudget);

/// Golden outputs of the unlocked program; throws Error if any run is abnormal.
std::vector<OutputBits> golden(const minic::Program& program,
                               const std::vector<InputVector>& tests,
                               long step_budget = kDefaultStepBudget);

/// Draws `count` input vectors uniformly over each in-parameter's bit width.
std::vector<InputVector> random_inputs(const minic::Program& program, int count, uint64_t seed);

/// Validates a set of named inputs against the top signature and orders them;
/// throws Error on arity or width mismatch.
InputVector bind_inputs(const minic::Program& program,
                        const std::vector<std::pair<std::string, std::vector<int64_t>>>& named);

}  // namespace lockopt::sim
