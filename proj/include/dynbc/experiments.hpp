#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynbc/config.hpp"

namespace dynbc {

// Outcome of one experiment run: the id that ran, the digest of the exact
// config it ran with, flat numeric outputs, human-readable notes, and the
// verdict against the experiment's thresholds.
struct RunReport {
  std::string experiment;
  std::string config_digest;
  std::uint64_t seed = 0;
  bool pass = false;
  NormReport values;
  std::vector<std::string> notes;

  // Deterministic bytes: same config + seed, same text.
  std::string to_json() const;
};

// Run the experiment named by cfg.experiment.name and write report.json plus
// one CSV per result table into out_dir (created if needed). Threshold
// failures only clear `pass`; infrastructure problems escape as ConfigError /
// InvalidArgument (bad inputs) or SolverError (numerical failure).
RunReport run_experiment(const RunConfig& cfg, const std::string& out_dir,
                         std::uint64_t seed);

}  // namespace dynbc
