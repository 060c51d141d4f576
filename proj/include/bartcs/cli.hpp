#pragma once

#include <iosfwd>

namespace bartcs {

// Entry point of the `bartcs` command. Returns the process exit status:
// 0 on success, 1 for domain errors (`ERROR <code>: ...` on err), 2 for
// usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bartcs
