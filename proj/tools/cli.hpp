#pragma once

#include <iosfwd>

namespace mbl::cli {

/// Whole command line in, exit status out: 0 ok, 1 runtime failure, 2 bad flags.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mbl::cli
