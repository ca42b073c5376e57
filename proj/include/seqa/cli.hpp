#pragma once

#include <string>
#include <vector>

namespace seqa::cli {

/// Exit codes: 0 success, 1 domain error, 2 usage error.
int dispatch(int argc, const char* const* argv);
/// Same, argv[0] excluded.
int dispatch(const std::vector<std::string>& args);

}  // namespace seqa::cli
