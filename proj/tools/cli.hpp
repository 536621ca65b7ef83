#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arthur::cli {

/// Exit codes: 0 pass, 1 assertion or validation failure, 2 startup or parse failure.
inline constexpr int kOk = 0;
inline constexpr int kFail = 1;
inline constexpr int kStartup = 2;

/// Entry point shared by the `arthur` binary and the tests; `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arthur::cli
