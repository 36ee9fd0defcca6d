#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slicedot::cli {

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Returns 0 on success, 2 on validation errors
/// and 3 on numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slicedot::cli
