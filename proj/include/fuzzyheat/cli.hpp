#pragma once

// Command-line front end.  Subcommands: solve, classify, envelope, reproduce.
//
// Exit codes: 0 success, 2 I/O, 3 parse/validation/usage, 4 numerical failure,
// 5 acceptance mismatch (reproduce only).

#include <ostream>
#include <string>
#include <vector>

namespace fuzzyheat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitMismatch = 5;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Directory holding examples/exN.json; FUZZYHEAT_DATA_DIR in the environment wins.
std::string data_dir();

/// Shortest-safe 12-significant-digit rendering used in every CSV.
std::string format_number(double v);

}  // namespace fuzzyheat::cli
