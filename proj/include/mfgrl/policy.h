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

#ifndef MFGRL_POLICY_H_
#define MFGRL_POLICY_H_

#include <memory>
#include <utility>
#include <vector>

#include "mfgrl/mean_field.h"
#include "mfgrl/simplex_grid.h"

namespace mfgrl {

// Per-stage action values Q_t(z, x, a) and state values V_t(z, x) on the
// grid.
class StageTables {
 public:
  StageTables() = default;
  StageTables(size_t n_grid, int n_types, int n_actions);

  // The terminal table V_{T+1} = 0.
  static StageTables Zero(const SimplexGrid& grid, int n_actions) {
    return StageTables(grid.size(), grid.NumTypes(), n_actions);
  }

  size_t NumGrid() const { return n_grid_; }
  int NumTypes() const { return n_types_; }
  int NumActions() const { return n_actions_; }

  double& q(size_t g, int x, int a) {
    return q_[(g * n_types_ + x) * n_actions_ + a];
  }
  double q(size_t g, int x, int a) const {
    return q_[(g * n_types_ + x) * n_actions_ + a];
  }
  double& v(size_t g, int x) { return v_[g * n_types_ + x]; }
  double v(size_t g, int x) const { return v_[g * n_types_ + x]; }

  QSlice QAt(size_t g) const;
  // Stores q and sets v(g, .) to the gamma-weighted average of q.
  void Finalize(size_t g, const QSlice& q, const Prescription& gamma);

 private:
  size_t n_grid_ = 0;
  int n_types_ = 0;
  int n_actions_ = 0;
  std::vector<double> q_;
  std::vector<double> v_;
};

// sum_g w_g v[g, x] over the interpolation weights of z.
double InterpolateValue(const StageTables& tables, const MeanFieldState& z,
                        int x, const SimplexGrid& grid);

// All N_x interpolated values at once; one weight computation.
std::vector<double> InterpolateValues(const StageTables& tables,
                                      const MeanFieldState& z,
                                      const SimplexGrid& grid);

// theta_t[z] for t = 1..T and every grid point z.
class PolicyAtlas {
 public:
  PolicyAtlas() = default;
  // Every entry starts out uniform.
  PolicyAtlas(std::shared_ptr<const SimplexGrid> grid, int horizon,
              int n_actions);

  int Horizon() const { return horizon_; }
  int NumTypes() const { return grid_->NumTypes(); }
  int NumActions() const { return n_actions_; }
  const SimplexGrid& grid() const { return *grid_; }
  std::shared_ptr<const SimplexGrid> grid_ptr() const { return grid_; }

  // Stages are 1-based.
  const Prescription& At(int t, size_t g) const;
  void Set(int t, size_t g, Prescription gamma);

  // Prescription at an arbitrary z: the interpolation-weighted mixture of
  // the neighbouring grid prescriptions, rows renormalized.
  Prescription Lookup(int t, const MeanFieldState& z) const;

 private:
  size_t Slot(int t, size_t g) const;

  std::shared_ptr<const SimplexGrid> grid_;
  int horizon_ = 0;
  int n_actions_ = 0;
  std::vector<Prescription> entries_;
};

// Convergence record of one (stage, grid point) solve.
struct StageRecord {
  int t = 0;
  size_t z_index = 0;
  bool converged = false;
  int iterations = 0;
  // Sup-norm change of the prescription over the last iteration.
  double policy_change = 0.0;
  // max_x [max_a Q(x, a) - sum_a gamma(a|x) Q(x, a)] at the returned gamma.
  double residual = 0.0;
};

struct SolveDiagnostics {
  // One entry per (t, z_index), ordered by descending t then z_index.
  std::vector<StageRecord> records;
  // (t, z_index) pairs where a restart reached a different fixed point.
  std::vector<std::pair<int, size_t>> non_unique;

  std::vector<StageRecord> NonConverged() const;
};

// Output of either backward solver. tables[t - 1] holds stage t.
struct Solution {
  PolicyAtlas atlas;
  std::vector<StageTables> tables;
  SolveDiagnostics diagnostics;
};

// max_x [max_a q(x, a) - sum_a gamma(a|x) q(x, a)]; zero exactly when gamma
// is a best response to q.
double FixedPointResidual(const QSlice& q, const Prescription& gamma);

}  // namespace mfgrl

#endif  // MFGRL_POLICY_H_
