#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace webrecon::cli {

/// Entry point behind the webrecon binary; also driven directly by tests.
/// Returns the process exit code: 0 ok, 2 config error, 3 suspended on
/// budget, 4 partial on error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace webrecon::cli
