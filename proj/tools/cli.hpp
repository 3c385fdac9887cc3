// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lpmln::cli {

// Runs the `lpmln` command line. Exit codes: 0 success, 1 usage error,
// 2 data or semantic error (zero-probability evidence, empty SM, non-tight
// completion input, malformed files).
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace lpmln::cli
