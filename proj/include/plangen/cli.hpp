#pragma once

#include <iosfwd>

namespace plangen {

// Entry point for the plangen tool; returns the process exit code.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plangen
