#pragma once

// Command-line entry point, separated from main() so tests can drive it.
// Exit codes: 0 success, 1 verification check failed, 2 usage/input error.
int run_cli(int argc, const char* const* argv);
