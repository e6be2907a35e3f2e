#pragma once

#include <string>
#include <vector>

namespace iduqa::cli {

/// Runs one subcommand; args exclude the program name. Returns the
/// process exit code; failures print a JSON error record to stderr.
int run(const std::vector<std::string>& args);

} // namespace iduqa::cli
