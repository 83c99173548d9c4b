#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kbc::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kIoError = 2 };

// args excludes the program name. Results go to `out`, diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Inserts `--key value` for config records whose flag is absent from args.
std::vector<std::string> apply_config_defaults(std::vector<std::string> args,
                                               const std::string& config_content);

std::string escape_field(const std::string& value);

}  // namespace kbc::cli
