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

#ifndef MFGRL_ENVIRONMENT_H_
#define MFGRL_ENVIRONMENT_H_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfgrl/mean_field.h"
#include "mfgrl/rng.h"

namespace mfgrl {

using RewardFn = std::function<double(int x, int a, const MeanFieldState& z)>;
using SamplerFn = std::function<int(int x, int a, const MeanFieldState& z,
                                    RngStream& rng)>;

// A finite-type, finite-action mean-field game. The kernel is optional:
// environments that only expose a sampler can be solved by the model-free
// solver but not by the exact one.
struct EnvModel {
  std::string name;
  int n_types = 0;
  int n_actions = 0;
  double discount = 1.0;
  int horizon = 1;
  RewardFn reward;
  std::optional<TransitionKernel> kernel;
  SamplerFn sampler;

  bool HasKernel() const { return kernel.has_value(); }
  // Kernel row tau(. | x, a, z). Throws if the kernel is absent.
  std::vector<double> KernelRow(int x, int a, const MeanFieldState& z) const;
  // Throws MfgError on inconsistent dimensions, discount outside (0, 1],
  // horizon < 1 or missing callbacks.
  void Validate() const;
};

// Inverse-CDF sampler over the kernel row; one uniform per draw.
SamplerFn SamplerFromKernel(TransitionKernel kernel, int n_types);

// Builds an environment and derives its sampler from the kernel.
EnvModel MakeKernelEnv(std::string name, int n_types, int n_actions,
                       double discount, int horizon, RewardFn reward,
                       TransitionKernel kernel);

int SampleTransition(const EnvModel& env, int x, int a,
                     const MeanFieldState& z, RngStream& rng);

// Two-state malware spread: x = 0 healthy, x = 1 infected; a = 0 do
// nothing, a = 1 repair.
struct MalwareParams {
  double k = 0.2;       // infection risk offset
  double lambda = 0.5;  // repair cost
  double q = 0.9;       // infection probability when idle and healthy
  double delta = 0.9;   // discount
  int horizon = 60;

  void Validate() const;
};

// Repair sends a node to healthy; an idle infected node stays infected; an
// idle healthy node is infected with probability q. Reward is
// -(k + z(1)) x - lambda a. The kernel does not depend on z.
EnvModel MalwareEnv(const MalwareParams& params);

class UnknownEnvironmentError : public MfgError {
 public:
  using MfgError::MfgError;
};

using EnvParams = std::map<std::string, double>;
using EnvFactory =
    std::function<EnvModel(const EnvParams& params, int horizon)>;

// Name -> constructor. "malware" is always registered; it reads k, lambda,
// q and delta from the parameter map and falls back to MalwareParams
// defaults for absent keys. Unrecognized keys are rejected.
void RegisterEnvironment(const std::string& name, EnvFactory factory);
EnvModel MakeEnvironment(const std::string& name, const EnvParams& params,
                         int horizon);
std::vector<std::string> EnvironmentNames();

}  // namespace mfgrl

#endif  // MFGRL_ENVIRONMENT_H_
