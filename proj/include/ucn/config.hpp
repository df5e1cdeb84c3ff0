#pragma once

// Experiment configuration: a flat key = value file with defaults for every
// key. Unknown keys are rejected so typos cannot silently fall back to
// defaults.

#include <cstdint>
#include <string>
#include <vector>

#include "ucn/netsim.hpp"
#include "ucn/optimizer.hpp"

namespace ucn {

struct ExperimentConfig {
  Bounds bounds;
  Scenario scenario;
  RadioParams radio;
  PowerModelParams power;

  int bins = 10;
  int n_cycles = 20;       // desk scale; 100 reproduces the full setting
  int kfold_k = 5;

  std::vector<std::string> algorithms = {"sa", "ga"};
  std::vector<std::string> schemes = {"baseline", "ddoec"};
  std::vector<double> weight_cases = {0.25, 0.5, 0.75};

  SaParams sa;
  GaParams ga;

  int trials = 20;         // desk scale; 1000 reproduces the full setting
  std::uint64_t master_seed = 1;
  int jobs = 0;            // 0 = hardware concurrency
};

ExperimentConfig default_config();

// Loads a config file; omitted keys take defaults, unknown keys and
// out-of-range values are errors naming the key.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// The full key set with current values, for manifests and `config dump`.
std::string config_to_text(const ExperimentConfig& cfg);

}  // namespace ucn
