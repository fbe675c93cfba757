#pragma once

namespace km {

// Entry point behind the km binary; returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace km
