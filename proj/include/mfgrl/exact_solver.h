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

// Backward-recursion equilibrium solver for environments with a known
// transition kernel.
//
// Stage t is solved after stage t + 1. At every grid point z the solver
// looks for a prescription gamma that is a best response to the action
// values it induces itself:
//
//   Q(x, a; gamma) = R(x, a, z) + delta * E_{x' ~ tau(.|x,a,z)}
//                        V_{t+1}(phi(z, gamma), x'),
//   gamma(.|x) in argmax_{p} sum_a p(a) Q(x, a; gamma),
//
// with V_{T+1} = 0 and V_{t+1} read off the grid by barycentric
// interpolation. The value stored for stage t is the gamma-average of Q.

#ifndef MFGRL_EXACT_SOLVER_H_
#define MFGRL_EXACT_SOLVER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mfgrl/environment.h"
#include "mfgrl/policy.h"
#include "mfgrl/simplex_grid.h"

namespace mfgrl {

struct FixedPointConfig {
  int max_iters = 500;
  double tol = 1e-8;
  // Initial damping beta of gamma <- (1 - beta) gamma + beta BR(gamma).
  double damping = 1.0;
  double tie_tolerance = 1e-9;
  // Random restarts per grid point used to probe for other fixed points.
  int restarts = 0;
  uint64_t seed = 0;
  int threads = 0;

  void Validate() const;
};

// Action values at z when the population plays gamma at this stage.
QSlice StageQ(const MeanFieldState& z, const Prescription& gamma,
              const StageTables& v_next, const SimplexGrid& grid,
              const EnvModel& env);

// Row-wise argmax of q; actions within tie_tolerance of the row maximum
// share the mass equally.
Prescription BestResponse(const QSlice& q, double tie_tolerance);

struct StageFixedPoint {
  Prescription gamma;
  QSlice q;  // StageQ at gamma
  bool converged = false;
  int iterations = 0;
  double policy_change = 0.0;
  double residual = 0.0;
  double final_damping = 1.0;
};

// Euclidean projection of v onto the probability simplex.
std::vector<double> ProjectToSimplex(std::span<const double> v);

// Damped best-response iteration from `initial` (uniform when absent).
//
// Pure best response (beta = 1) two-cycles when the fixed point is mixed; a
// detected two-cycle drops beta to 0.5. If the best-response target still
// flips back and forth at beta = 0.5 the iterate is straddling an
// indifference point that no constant step can reach, and the solve
// continues with an extragradient projection method on the equivalent
// variational inequality, with a step that is halved whenever the local
// Lipschitz test fails. final_damping reports the last beta or step.
StageFixedPoint SolveStageFixedPoint(
    const MeanFieldState& z, const StageTables& v_next,
    const SimplexGrid& grid, const EnvModel& env, const FixedPointConfig& cfg,
    const std::optional<Prescription>& initial = std::nullopt);

// Full backward recursion over t = T..1 and all grid points. Grid points of
// a stage are solved in parallel; stages run in sequence. Errors are
// rethrown with their (t, z_index) attached.
Solution BackwardSolve(const EnvModel& env,
                       std::shared_ptr<const SimplexGrid> grid,
                       const FixedPointConfig& cfg);

}  // namespace mfgrl

#endif  // MFGRL_EXACT_SOLVER_H_
