// Command-line orchestration: parse flags (plus an optional key=value config
// file), run the requested route(s), cross-validate against declared checks,
// and emit a machine-readable JSON or CSV report.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zvar/variance.hpp"

namespace zvar {

// Resolved invocation parameters, echoed verbatim into every report.
struct RunConfig {
  std::string command;
  std::vector<int> k_list;
  std::string testform = "psi1";
  std::int64_t n_samples = 0;
  std::uint64_t seed = 42;
  QuadratureSpec quadrature;
  std::string output_path;
  std::string format = "json";  // "json" or "csv"
  double disk_radius = 0.78539816339744831;
  std::string suite = "all";  // verify only
};

// Parse args (excluding argv[0]) and run.  Exit status: 0 when the command
// ran and every declared check passed; 1 on a numeric failure or a failed
// check (diagnostics emitted as JSON); 2 on a flag/config error (usage
// printed to stderr).
int run_cli(const std::vector<std::string>& args);

// argv wrapper around run_cli for the binary's main().
int run_main(int argc, char** argv);

}  // namespace zvar
