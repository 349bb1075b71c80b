// Command line front end: run | convergence | epsilon-study | validate.
// Factored out of main() so tests can drive it in-process.
#pragma once

namespace llb {

// Exit codes: 0 success, 1 configuration/usage error, 2 validation-suite
// failure, 3 numeric abort during time stepping.
int cli_main(int argc, const char* const* argv);

}  // namespace llb
