#pragma once

namespace soar {

/// Command-line entry point (subcommands: run, converge, validate).
/// Returns the process exit code.
int cli_main(int argc, const char* const* argv);

}  // namespace soar
