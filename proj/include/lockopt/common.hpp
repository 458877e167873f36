#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lockopt {

/// Error for invalid configurations, infeasible solutions, and I/O failures.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Diagnostic {
    int line = 0;
    int col = 0;
    std::string message;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace lockopt
