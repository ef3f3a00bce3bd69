// Copyright 2026 The mfgrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// YAML experiment configuration for the mfgrl driver.

#ifndef MFGRL_TOOLS_EXPERIMENT_CONFIG_H_
#define MFGRL_TOOLS_EXPERIMENT_CONFIG_H_

#include <optional>
#include <string>
#include <vector>

#include "mfgrl/environment.h"
#include "mfgrl/exact_solver.h"
#include "mfgrl/rl_solver.h"

namespace mfgrl {

// Bad syntax, unknown key or out-of-range value. The message names the
// field and the line.
class ConfigError : public MfgError {
 public:
  using MfgError::MfgError;
};

struct Thresholds {
  int stage = 1;
  std::optional<double> max_atlas_distance;
  std::optional<double> max_value_diff;
  std::optional<double> max_exploitability;
};

struct EvaluationConfig {
  std::string solver = "exact";  // atlas read by `evaluate`
  std::vector<double> initial_state;  // empty: uniform
  int n_agents = 10000;
  bool condition_on_statistical = false;
};

struct ExperimentConfig {
  std::string env_name = "malware";
  EnvParams env_params;
  int env_line = 0;  // line of the environment section, for messages
  int horizon = 60;
  int resolution = 50;
  uint64_t seed = 0;
  std::string output_dir;  // empty: not set in the file
  FixedPointConfig fixed_point;
  RlConfig rl;
  EvaluationConfig evaluation;
  Thresholds thresholds;
};

// The shipped malware experiment, byte for byte configs/malware.yaml.
extern const char kDefaultConfig[];

// Parses and range-checks a config. Throws ConfigError. The environment
// name is not resolved here.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Resolved config with every field spelled out.
std::string EmitConfig(const ExperimentConfig& cfg);

}  // namespace mfgrl

#endif  // MFGRL_TOOLS_EXPERIMENT_CONFIG_H_
