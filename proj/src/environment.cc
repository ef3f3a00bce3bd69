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

#include "mfgrl/environment.h"

#include <array>
#include <mutex>
#include <sstream>

namespace mfgrl {
namespace {

// Kernel rows up to this many types are evaluated on the stack.
constexpr int kInlineTypes = 16;

struct Registry {
  std::mutex mu;
  std::map<std::string, EnvFactory> factories;
};

EnvModel MalwareFromParams(const EnvParams& params, int horizon) {
  MalwareParams p;
  p.horizon = horizon;
  for (const auto& [key, value] : params) {
    if (key == "k") {
      p.k = value;
    } else if (key == "lambda") {
      p.lambda = value;
    } else if (key == "q") {
      p.q = value;
    } else if (key == "delta") {
      p.delta = value;
    } else {
      throw MfgError("malware: unknown parameter '" + key + "'");
    }
  }
  return MalwareEnv(p);
}

Registry& GetRegistry() {
  static Registry* registry = [] {
    auto* r = new Registry;
    r->factories["malware"] = MalwareFromParams;
    return r;
  }();
  return *registry;
}

}  // namespace

std::vector<double> EnvModel::KernelRow(int x, int a,
                                        const MeanFieldState& z) const {
  if (!kernel) throw MfgError(name + ": environment has no transition kernel");
  std::vector<double> row(n_types, 0.0);
  (*kernel)(x, a, z, row);
  return row;
}

void EnvModel::Validate() const {
  if (n_types < 1 || n_actions < 1) {
    throw MfgError(name + ": need at least one type and one action");
  }
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw MfgError(name + ": discount must lie in (0, 1]");
  }
  if (horizon < 1) throw MfgError(name + ": horizon must be >= 1");
  if (!reward) throw MfgError(name + ": missing reward");
  if (!sampler) throw MfgError(name + ": missing sampler");
}

SamplerFn SamplerFromKernel(TransitionKernel kernel, int n_types) {
  return [kernel = std::move(kernel), n_types](
             int x, int a, const MeanFieldState& z, RngStream& rng) {
    if (n_types <= kInlineTypes) {
      std::array<double, kInlineTypes> row{};
      kernel(x, a, z, std::span<double>(row.data(), n_types));
      return rng.Categorical(std::span<const double>(row.data(), n_types));
    }
    std::vector<double> row(n_types, 0.0);
    kernel(x, a, z, row);
    return rng.Categorical(row);
  };
}

EnvModel MakeKernelEnv(std::string name, int n_types, int n_actions,
                       double discount, int horizon, RewardFn reward,
                       TransitionKernel kernel) {
  EnvModel env;
  env.name = std::move(name);
  env.n_types = n_types;
  env.n_actions = n_actions;
  env.discount = discount;
  env.horizon = horizon;
  env.reward = std::move(reward);
  env.sampler = SamplerFromKernel(kernel, n_types);
  env.kernel = std::move(kernel);
  env.Validate();
  return env;
}

int SampleTransition(const EnvModel& env, int x, int a,
                     const MeanFieldState& z, RngStream& rng) {
  return env.sampler(x, a, z, rng);
}

void MalwareParams::Validate() const {
  std::ostringstream err;
  if (!(k >= 0.0)) err << "k must be >= 0; ";
  if (!(lambda >= 0.0)) err << "lambda must be >= 0; ";
  if (!(q >= 0.0 && q <= 1.0)) err << "q must lie in [0, 1]; ";
  if (!(delta > 0.0 && delta <= 1.0)) err << "delta must lie in (0, 1]; ";
  if (horizon < 1) err << "horizon must be >= 1; ";
  if (!err.str().empty()) throw MfgError("malware: " + err.str());
}

EnvModel MalwareEnv(const MalwareParams& params) {
  params.Validate();
  const double k = params.k;
  const double lambda = params.lambda;
  const double q = params.q;
  auto reward = [k, lambda](int x, int a, const MeanFieldState& z) {
    return -(k + z[1]) * x - lambda * a;
  };
  auto kernel = [q](int x, int a, const MeanFieldState&,
                    std::span<double> next) {
    if (a == 1 || x == 1) {
      // Repair heals; an idle infected node stays put.
      next[0] = a == 1 ? 1.0 : 0.0;
      next[1] = a == 1 ? 0.0 : 1.0;
    } else {
      next[0] = 1.0 - q;
      next[1] = q;
    }
  };
  return MakeKernelEnv("malware", 2, 2, params.delta, params.horizon,
                       std::move(reward), std::move(kernel));
}

void RegisterEnvironment(const std::string& name, EnvFactory factory) {
  Registry& r = GetRegistry();
  std::lock_guard<std::mutex> lock(r.mu);
  r.factories[name] = std::move(factory);
}

EnvModel MakeEnvironment(const std::string& name, const EnvParams& params,
                         int horizon) {
  EnvFactory factory;
  {
    Registry& r = GetRegistry();
    std::lock_guard<std::mutex> lock(r.mu);
    auto it = r.factories.find(name);
    if (it == r.factories.end()) {
      throw UnknownEnvironmentError("unknown environment '" + name + "'");
    }
    factory = it->second;
  }
  return factory(params, horizon);
}

std::vector<std::string> EnvironmentNames() {
  Registry& r = GetRegistry();
  std::lock_guard<std::mutex> lock(r.mu);
  std::vector<std::string> names;
  for (const auto& [name, unused] : r.factories) names.push_back(name);
  return names;
}

}  // namespace mfgrl
