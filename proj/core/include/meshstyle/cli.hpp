#pragma once

namespace meshstyle {

// Entry point for the meshstyle command-line tool. Returns the process
// exit code: 0 success, 1 usage, 2 bad input/data, 3 numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace meshstyle
