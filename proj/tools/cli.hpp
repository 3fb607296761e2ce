#pragma once

namespace swsynth {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitEmpty = 3,
    kExitCheckFailed = 4,
    kExitNoSafeMode = 5,
};

/// Entry point shared by the binary and the end-to-end tests.
int run_cli(int argc, char** argv);

}  // namespace swsynth
