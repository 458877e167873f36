#pragma once

#include <string>

#include "lockopt/ast.hpp"

namespace lockopt::minic {

/// Pretty-prints a Program back to MiniC source. Formatting is deterministic
/// and parse(emit_source(p)) is structurally isomorphic to p.
std::string emit_source(const Program& program);

}  // namespace lockopt::minic
