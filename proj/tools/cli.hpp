#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rebel/core.hpp"

namespace rebel::cli {

/// Exit codes: 0 success, 1 the engine failed on a question, 2 bad
/// configuration, arguments or input files.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One line per node, indented by depth.
std::string format_trace(const TraceNode& root, bool timing);

}  // namespace rebel::cli
