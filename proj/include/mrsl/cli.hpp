#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mrsl::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Exit statuses of dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // assertion or acceptance failure
inline constexpr int kExitUsage = 2;    // invalid arguments

struct DispatchOptions {
  bool use_environment = true;  // MRSL_<NAME> variables
  bool use_config_file = true;  // --config / MRSL_CONFIG
};

/// args[0] is the subcommand (generate, params, cluster, kde, evaluate,
/// experiment, volumes, rerun). Option values are resolved with precedence
/// flags > environment > config file > defaults: the config file's
/// [subcommand] section and then the environment are turned into leading
/// arguments, and the last occurrence of an option wins.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const DispatchOptions& options = {});

std::string usage();

}  // namespace mrsl::cli
