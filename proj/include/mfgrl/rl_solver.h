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


// Model-free backward solver. Action values are learned from sampled
// transitions with batched Expected Sarsa and the stage prescription is
// found by softmax policy gradient on the learned values, alternating the
// two until the prescription settles.

#ifndef MFGRL_RL_SOLVER_H_
#define MFGRL_RL_SOLVER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mfgrl/environment.h"
#include "mfgrl/policy.h"
#include "mfgrl/rng.h"
#include "mfgrl/simplex_grid.h"

namespace mfgrl {

// Stream domains of the model-free solver.
inline constexpr uint32_t kSarsaDomain = 0x53415253;        // "SARS"
inline constexpr uint32_t kPushforwardDomain = 0x50555348;  // "PUSH"

struct RlConfig {
  int batch_size = 2000;  // L, sweeps over every (x, a) per estimate
  int policy_iters = 50;  // I
  double sarsa_alpha = 0.1;
  int pg_steps = 100;
  double pg_lr = 0.5;
  // Halve a type's ascent step whenever its policy gradient reverses
  // direction between policy iterations.
  bool adaptive_lr = true;
  uint64_t seed = 0;
  double q_init = 0.0;
  // Report the mean of the Sarsa iterates over the last ceil(L / 2) sweeps
  // instead of the last iterate.
  bool tail_average = true;
  // Per-(x, a) draws for the empirical next mean field when the
  // environment has no kernel.
  int next_state_samples = 10000;
  // A stage point counts as converged when the last policy iteration moved
  // the prescription by less than this (sup norm).
  double tol = 0.02;
  int threads = 0;

  void Validate() const;
};

// L sweeps of
//   Q[x, a] <- (1 - alpha) Q[x, a] + alpha (R(x, a, z) + delta V(z_next, x'))
// over every pair (x, a) in type-major order, x' ~ tau(. | x, a, z).
// z_next is the next mean field under the current prescription and V is
// v_next interpolated there. Pair p = x * N_a + a draws from streams[p].
QSlice ExpectedSarsaBatch(const MeanFieldState& z,
                          const MeanFieldState& z_next,
                          const StageTables& v_next, const SimplexGrid& grid,
                          const EnvModel& env, const QSlice& q_in,
                          const RlConfig& cfg,
                          std::span<RngStream> streams);

// J(l) = sum_x sum_a softmax(l)[x, a] q[x, a].
double PolicyObjective(const QSlice& q, std::span<const double> logits);

// dJ/dl[x, a] = p[x, a] (q[x, a] - sum_b p[x, b] q[x, b]).
std::vector<double> PolicyGradient(const QSlice& q,
                                   std::span<const double> logits);

// `steps` steps of gradient ascent on J with step size lr and q held fixed.
std::vector<double> PolicyGradientAscent(const QSlice& q,
                                         std::vector<double> logits,
                                         int steps, double lr);

// One-step pushforward of z under gamma estimated from
// cfg.next_state_samples sampled transitions per pair. Pair p draws from
// the stream (seed, {kPushforwardDomain, stage, cell, 0, p}).
MeanFieldState EmpiricalPushforward(const MeanFieldState& z,
                                    const Prescription& gamma,
                                    const EnvModel& env, const RlConfig& cfg,
                                    uint32_t stage, uint32_t cell);

struct StageRl {
  Prescription gamma;
  QSlice q;  // Sarsa estimate under gamma
  int iterations = 0;
  double policy_change = 0.0;
  double residual = 0.0;
  bool converged = false;
};

// Policy iteration n = 1..I at the grid point `cell` of `stage`:
// z_next = phi(z, gamma_{n-1}), Q re-estimated under gamma_{n-1} starting
// from the previous estimate, logits moved by pg_steps ascent steps. Rows
// are independent under the objective, so each type keeps its own step
// (see adaptive_lr). The
// returned Q is one more Sarsa batch under the final gamma, so the stage
// value is its gamma-average. Sarsa batch n draws from the streams
// (seed, {kSarsaDomain, stage, cell, n, pair}).
StageRl SolveStageRl(const MeanFieldState& z, const StageTables& v_next,
                     const SimplexGrid& grid, const EnvModel& env,
                     const RlConfig& cfg, uint32_t stage, uint32_t cell);

// Backward recursion with SolveStageRl at every stage and grid point.
Solution RlBackwardSolve(const EnvModel& env,
                         std::shared_ptr<const SimplexGrid> grid,
                         const RlConfig& cfg);

}  // namespace mfgrl

#endif  // MFGRL_RL_SOLVER_H_
