#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "glshrink/linalg.hpp"

namespace glshrink {

struct Observations {
  Matrix values;
  bool had_header = false;
};

/// Numeric CSV, one observation per row. A first row with any non-numeric
/// field is treated as a header. Blank lines are skipped. Throws IoError,
/// ParseError (with row and column) or RaggedRows.
Observations load_observations(const std::string& path);
Observations parse_observations(std::istream& in);

/// Exit codes: 0 success, 2 configuration or input error, 3 numerical
/// failure. Results go to the output file (or stdout), diagnostics to stderr.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace glshrink
