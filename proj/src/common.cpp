#include "lockopt/common.hpp"

namespace lockopt {

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += '\n';
        out += std::to_string(d.line) + ":" + std::to_string(d.col) + ": " + d.message;
    }
    return out;
}

}  // namespace lockopt
