#ifndef GPUDVFS_CLI_HPP
#define GPUDVFS_CLI_HPP

#include <string>
#include <vector>

namespace gpudvfs::cli {

/// Runs one CLI invocation (args exclude the program name) and returns the
/// process exit code: 0 success, 2 I/O or usage, 3 data, 4 missing artifact,
/// 1 internal.
int run_cli(const std::vector<std::string>& args);

}  // namespace gpudvfs::cli

#endif
