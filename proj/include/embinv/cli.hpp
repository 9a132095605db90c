#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace embinv::cli {

/// Reads EMBINV_LOG (trace, debug, info, warn, error, off; default info) and
/// routes logging to stderr. Safe to call more than once.
void configure_logging();

/// Parses and runs one subcommand. `args` excludes the program name. Throws
/// embinv::Error; parse failures surface as UsageError. Help requests print to
/// `out` and return normally.
void execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// execute() with errors mapped to exit codes and reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args);

}  // namespace embinv::cli
