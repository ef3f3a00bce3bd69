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

#include "mfgrl/mean_field.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mfgrl {
namespace {

void CheckDistribution(std::span<const double> p, const char* what) {
  if (p.empty()) throw MfgError(std::string(what) + ": empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      std::ostringstream msg;
      msg << what << ": entry " << v << " outside [0, 1]";
      throw MfgError(msg.str());
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": entries sum to " << sum << ", not 1";
    throw MfgError(msg.str());
  }
}

}  // namespace

MeanFieldState::MeanFieldState(std::vector<double> probs)
    : probs_(std::move(probs)) {
  CheckDistribution(probs_, "MeanFieldState");
}

MeanFieldState MeanFieldState::Vertex(int n_types, int x) {
  if (x < 0 || x >= n_types) throw MfgError("MeanFieldState: bad vertex");
  std::vector<double> p(n_types, 0.0);
  p[x] = 1.0;
  return MeanFieldState(std::move(p));
}

MeanFieldState MeanFieldState::Uniform(int n_types) {
  if (n_types < 1) throw MfgError("MeanFieldState: n_types < 1");
  return MeanFieldState(std::vector<double>(n_types, 1.0 / n_types));
}

Prescription::Prescription(int n_types, int n_actions,
                           std::vector<double> probs)
    : n_types_(n_types), n_actions_(n_actions), probs_(std::move(probs)) {
  if (n_types < 1 || n_actions < 1 ||
      probs_.size() != static_cast<size_t>(n_types) * n_actions) {
    throw MfgError("Prescription: shape mismatch");
  }
  for (int x = 0; x < n_types; ++x) CheckDistribution(Row(x), "Prescription");
}

Prescription Prescription::Uniform(int n_types, int n_actions) {
  return Prescription(
      n_types, n_actions,
      std::vector<double>(static_cast<size_t>(n_types) * n_actions,
                          1.0 / n_actions));
}

Prescription Prescription::Deterministic(const std::vector<int>& actions,
                                         int n_actions) {
  const int n_types = static_cast<int>(actions.size());
  std::vector<double> p(static_cast<size_t>(n_types) * n_actions, 0.0);
  for (int x = 0; x < n_types; ++x) {
    if (actions[x] < 0 || actions[x] >= n_actions) {
      throw MfgError("Prescription: action out of range");
    }
    p[x * n_actions + actions[x]] = 1.0;
  }
  return Prescription(n_types, n_actions, std::move(p));
}

Prescription Prescription::Normalized(int n_types, int n_actions,
                                      std::vector<double> probs) {
  if (probs.size() != static_cast<size_t>(n_types) * n_actions) {
    throw MfgError("Prescription: shape mismatch");
  }
  for (int x = 0; x < n_types; ++x) {
    auto row = std::span<double>(probs).subspan(x * n_actions, n_actions);
    double sum = 0.0;
    for (double& v : row) {
      v = std::max(v, 0.0);
      sum += v;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      throw MfgError("Prescription: row has no mass");
    }
    for (double& v : row) v /= sum;
  }
  return Prescription(n_types, n_actions, std::move(probs));
}

MeanFieldState PropagateMeanField(const MeanFieldState& z,
                                  const Prescription& gamma,
                                  const TransitionKernel& kernel) {
  return PropagateMeanField(z, gamma, kernel, z);
}

MeanFieldState PropagateMeanField(const MeanFieldState& z,
                                  const Prescription& gamma,
                                  const TransitionKernel& kernel,
                                  const MeanFieldState& kernel_z) {
  const int n_types = z.NumTypes();
  if (gamma.NumTypes() != n_types || kernel_z.NumTypes() != n_types) {
    throw MfgError("PropagateMeanField: dimension mismatch");
  }
  std::vector<double> next(n_types, 0.0);
  std::vector<double> row(n_types);
  for (int x = 0; x < n_types; ++x) {
    for (int a = 0; a < gamma.NumActions(); ++a) {
      std::fill(row.begin(), row.end(), 0.0);
      kernel(x, a, kernel_z, row);
      double row_sum = 0.0;
      for (double v : row) row_sum += v;
      if (std::abs(row_sum - 1.0) > kKernelRowTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "PropagateMeanField: kernel row (x=" << x << ", a=" << a
            << ") sums to " << row_sum;
        throw MfgError(msg.str());
      }
      const double mass = z[x] * gamma(x, a);
      if (mass == 0.0) continue;
      for (int y = 0; y < n_types; ++y) next[y] += mass * row[y];
    }
  }
  double sum = 0.0;
  for (double& v : next) {
    if (v < -kSimplexTolerance) {
      throw MfgError("PropagateMeanField: negative mass in result");
    }
    v = std::max(v, 0.0);
    sum += v;
  }
  // Kernel rows are only accurate to kKernelRowTolerance, so the total can
  // drift; fold it back onto the simplex.
  if (std::abs(sum - 1.0) > kKernelRowTolerance) {
    throw MfgError("PropagateMeanField: result mass drifted from 1");
  }
  for (double& v : next) v = std::min(v / sum, 1.0);
  return MeanFieldState(std::move(next));
}

Prescription SoftmaxPrescription(int n_types, int n_actions,
                                 std::span<const double> logits) {
  if (logits.size() != static_cast<size_t>(n_types) * n_actions) {
    throw MfgError("SoftmaxPrescription: shape mismatch");
  }
  std::vector<double> p(logits.size());
  for (int x = 0; x < n_types; ++x) {
    const auto row = logits.subspan(x * n_actions, n_actions);
    const double top = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      p[x * n_actions + a] = std::exp(row[a] - top);
      sum += p[x * n_actions + a];
    }
    for (int a = 0; a < n_actions; ++a) p[x * n_actions + a] /= sum;
  }
  return Prescription(n_types, n_actions, std::move(p));
}

double SupNorm(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MfgError("SupNorm: size mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace mfgrl
