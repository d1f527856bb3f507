#pragma once

#include <iosfwd>

namespace hb {

/// Entry point of `hb`. The report goes to --out or `out`; diagnostics go
/// to `err`. Returns 0 when every check passes, 1 when a check fails and
/// 2 for usage or input errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hb
