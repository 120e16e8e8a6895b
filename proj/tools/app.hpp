#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snrsub::app {

inline constexpr int kSchemaVersion = 1;

/// Exit codes: 0 success, 2 usage error, 3 domain/input error, 4 internal.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitError = 3;
inline constexpr int kExitInternal = 4;

/// Runs the snrsub command line (args excludes the program name). Primary
/// output goes to `out`; failures are reported on `err` as a JSON object
/// {"schema_version":1,"error":{"code":...,"message":...}}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Converts a duration in milliseconds to a sample count, rounding half up.
[[nodiscard]] std::size_t ms_to_samples(double ms, double sample_rate_hz);

} // namespace snrsub::app
