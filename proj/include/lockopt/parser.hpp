#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "lockopt/ast.hpp"
#include "lockopt/common.hpp"

namespace lockopt::minic {

struct ParseResult {
    std::optional<Program> program;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return program.has_value(); }
};

/// Parses MiniC source into a typed, resolved, node-numbered Program.
/// `top_name` selects the top function; empty means: use "top" if present,
/// otherwise the only function in the unit.
ParseResult parse(std::string_view source, std::string_view top_name = {});

/// Like parse() but throws Error with the formatted diagnostics on failure.
Program parse_or_throw(std::string_view source, std::string_view top_name = {});

}  // namespace lockopt::minic
