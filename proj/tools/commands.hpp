#pragma once

#include "phi4lab/grid.hpp"
#include "phi4lab/io.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace phi4lab::cli {

inline constexpr const char* kToolVersion = "phi4lab 0.1.0";

// Thrown for bad flag values that only the command itself can detect.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Command {
  std::string name;
  std::string summary;
  io::Schema schema;
  // Writes artifacts into out and returns the exit code (0 or 1).
  std::function<int(const io::Config&, const std::filesystem::path& out, std::ostream& log)> run;
};

const std::vector<Command>& commands();
const Command* find_command(const std::string& name);

// Runs the command into the config's out directory and writes the manifest.
int run_recorded(const Command& cmd, const io::Config& cfg, std::ostream& log);

// Invariant suite on one grid; prints one line per check, returns the failure count.
int run_invariant_suite(const TorusGrid& g, std::uint64_t seed, std::ostream& log);

// Checks recorded checksums, re-runs the manifest into a scratch directory
// and compares every artifact; returns the number of mismatches.
int verify_manifest(const std::filesystem::path& manifest, std::ostream& log);

TorusGrid parse_grid_spec(const std::string& spec);

}  // namespace phi4lab::cli
