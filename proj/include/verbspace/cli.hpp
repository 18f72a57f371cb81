#pragma once

namespace verbspace {

/// Full command-line entry point. Exit codes: 0 success, 1 usage,
/// 2 validation, 3 I/O.
int run_cli(int argc, char** argv);

}  // namespace verbspace
