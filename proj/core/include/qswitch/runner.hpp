#pragma once
// Executes a parsed RunConfig and writes its data files. Data files depend
// only on the config; wall time and warnings go to <name>.meta.json.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qswitch/config.hpp"
#include "qswitch/error.hpp"

namespace qswitch {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned workers = 1;
  bool verbose = false;
};

struct RunOutcome {
  std::vector<std::filesystem::path> files;  // data files, sidecar excluded
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Throws Error on failure; files already written are left in place.
RunOutcome run(const RunConfig& config, const RunOptions& options);

/// 0 success, 2 validation error, 3 numerical failure.
int exit_code(const Error& e);

/// %.17g, "-0" normalized to "0".
std::string format_number(double x);

}  // namespace qswitch
