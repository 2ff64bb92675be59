/**
 * @file cli.hpp
 * @brief Command-line entry point, callable in-process for testing.
 *
 * Subcommands: feasibility, allocate, precode, simulate-rate,
 * simulate-feedback. Exit codes: 0 success (and feasible verdicts),
 * 1 usage errors, 2 infeasible verdicts, 3 guard and internal violations.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ia {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ia
