#pragma once

#include <ostream>

namespace wvcal::cli {

/// Runs one wvcal command line. Returns the process exit status; user errors
/// print a one-line diagnostic to `err` and return nonzero.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wvcal::cli
