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

#include "mfgrl/policy.h"

#include <algorithm>
#include <string>

namespace mfgrl {

StageTables::StageTables(size_t n_grid, int n_types, int n_actions)
    : n_grid_(n_grid),
      n_types_(n_types),
      n_actions_(n_actions),
      q_(n_grid * n_types * n_actions, 0.0),
      v_(n_grid * n_types, 0.0) {}

QSlice StageTables::QAt(size_t g) const {
  QSlice out(n_types_, n_actions_);
  for (int x = 0; x < n_types_; ++x) {
    for (int a = 0; a < n_actions_; ++a) out(x, a) = q(g, x, a);
  }
  return out;
}

void StageTables::Finalize(size_t g, const QSlice& slice,
                           const Prescription& gamma) {
  if (slice.n_types != n_types_ || slice.n_actions != n_actions_ ||
      gamma.NumTypes() != n_types_ || gamma.NumActions() != n_actions_) {
    throw MfgError("StageTables::Finalize: dimension mismatch");
  }
  for (int x = 0; x < n_types_; ++x) {
    double value = 0.0;
    for (int a = 0; a < n_actions_; ++a) {
      q(g, x, a) = slice(x, a);
      value += gamma(x, a) * slice(x, a);
    }
    v(g, x) = value;
  }
}

double InterpolateValue(const StageTables& tables, const MeanFieldState& z,
                        int x, const SimplexGrid& grid) {
  double value = 0.0;
  for (const GridWeight& w : InterpolationWeights(z, grid)) {
    value += w.weight * tables.v(w.index, x);
  }
  return value;
}

std::vector<double> InterpolateValues(const StageTables& tables,
                                      const MeanFieldState& z,
                                      const SimplexGrid& grid) {
  std::vector<double> out(tables.NumTypes(), 0.0);
  for (const GridWeight& w : InterpolationWeights(z, grid)) {
    for (int x = 0; x < tables.NumTypes(); ++x) {
      out[x] += w.weight * tables.v(w.index, x);
    }
  }
  return out;
}

PolicyAtlas::PolicyAtlas(std::shared_ptr<const SimplexGrid> grid, int horizon,
                         int n_actions)
    : grid_(std::move(grid)), horizon_(horizon), n_actions_(n_actions) {
  if (!grid_) throw MfgError("PolicyAtlas: null grid");
  if (horizon < 1) throw MfgError("PolicyAtlas: horizon must be >= 1");
  if (n_actions < 1) throw MfgError("PolicyAtlas: n_actions must be >= 1");
  entries_.assign(static_cast<size_t>(horizon) * grid_->size(),
                  Prescription::Uniform(grid_->NumTypes(), n_actions));
}

size_t PolicyAtlas::Slot(int t, size_t g) const {
  if (t < 1 || t > horizon_ || g >= grid_->size()) {
    throw MfgError("PolicyAtlas: index (t=" + std::to_string(t) +
                   ", z_index=" + std::to_string(g) + ") out of range");
  }
  return static_cast<size_t>(t - 1) * grid_->size() + g;
}

const Prescription& PolicyAtlas::At(int t, size_t g) const {
  return entries_[Slot(t, g)];
}

void PolicyAtlas::Set(int t, size_t g, Prescription gamma) {
  if (gamma.NumTypes() != NumTypes() || gamma.NumActions() != n_actions_) {
    throw MfgError("PolicyAtlas::Set: dimension mismatch");
  }
  entries_[Slot(t, g)] = std::move(gamma);
}

Prescription PolicyAtlas::Lookup(int t, const MeanFieldState& z) const {
  const auto weights = InterpolationWeights(z, *grid_);
  if (weights.size() == 1) return At(t, weights.front().index);
  std::vector<double> mixed(static_cast<size_t>(NumTypes()) * n_actions_, 0.0);
  for (const GridWeight& w : weights) {
    const auto probs = At(t, w.index).data();
    for (size_t i = 0; i < mixed.size(); ++i) mixed[i] += w.weight * probs[i];
  }
  return Prescription::Normalized(NumTypes(), n_actions_, std::move(mixed));
}

std::vector<StageRecord> SolveDiagnostics::NonConverged() const {
  std::vector<StageRecord> out;
  for (const StageRecord& r : records) {
    if (!r.converged) out.push_back(r);
  }
  return out;
}

double FixedPointResidual(const QSlice& q, const Prescription& gamma) {
  double worst = 0.0;
  for (int x = 0; x < q.n_types; ++x) {
    double best = q(x, 0);
    double expected = 0.0;
    for (int a = 0; a < q.n_actions; ++a) {
      best = std::max(best, q(x, a));
      expected += gamma(x, a) * q(x, a);
    }
    worst = std::max(worst, best - expected);
  }
  return worst;
}

}  // namespace mfgrl
