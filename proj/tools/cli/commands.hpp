#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slelab::cli {

enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kUsage = 2 };

/// Runs sle_lab with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "2.5,2.25" or "pow2:1..8" (kappa + 2^-j) or "pow2-:1..8" (kappa - 2^-j).
std::vector<double> parse_kappa_seq(const std::string& text, double kappa);

}  // namespace slelab::cli
