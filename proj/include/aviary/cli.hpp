#pragma once

namespace aviary::cli {

/// Entry point behind the `aviary` binary. Exit codes: 0 success, 1 failed
/// validation or runtime error (message on stderr), 2 usage error.
int run(int argc, const char* const* argv);

}  // namespace aviary::cli
