#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace milscreen::cli {

// Runs one mil-screen invocation. args excludes the program name.
// Returns 0 on success, 1 on runtime failure and 2 on usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace milscreen::cli
