#pragma once

#include <string>

#include "rps_spde/cocycle.hpp"
#include "rps_spde/config.hpp"
#include "rps_spde/drift.hpp"

namespace rps {

struct RunResult {
  int exit_code = 0;          // 0 success, 2 no convergence
  std::string manifest_file;
  std::string results_json;   // the manifest "results" object
};

DriftPtr make_drift(const ExperimentConfig& cfg);
CocycleParams make_params(const ExperimentConfig& cfg);

// Validates, runs the configured experiment and writes its artifacts into
// cfg.output_dir. Module errors propagate as rps::Error.
RunResult run(const ExperimentConfig& cfg);

}  // namespace rps
