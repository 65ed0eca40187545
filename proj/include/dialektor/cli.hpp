#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dialektor {

/// Entry point behind the `dialektor` binary, callable in-process for tests.
/// Exit codes: 0 success, 1 knowledge-base error, 2 input parse error,
/// 3 knowledge-base conflict, 64 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dialektor
