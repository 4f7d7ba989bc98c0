#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace evosync::app {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // I/O and other unexpected errors
  kSchema = 2,        // scenario or argument validation
  kNumerical = 3,     // integration failure or exceeded rate bound
  kNotConverged = 4,  // only with require_convergence
};

struct RunOptions {
  std::string command;  // simulate | agents | field | equilibria | sweep | generate
  std::filesystem::path scenario;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // dotted.path=value
  bool require_convergence = false;
  std::size_t populations = 3;  // generate only
  std::size_t regions = 3;      // generate only
};

// Executes one subcommand. Results go to files under options.out (for
// generate: the scenario file itself, or `out` when the path is empty); a
// one-line JSON summary goes to `out`, and errors go to `err` as one-line JSON.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace evosync::app
