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


// Equilibrium checks: mean-field flows induced by an atlas, finite
// populations, tagged-agent Monte Carlo values, exploitability and atlas
// distances.

#ifndef MFGRL_EVALUATION_H_
#define MFGRL_EVALUATION_H_

#include <cstdint>
#include <vector>

#include "mfgrl/environment.h"
#include "mfgrl/policy.h"
#include "mfgrl/simplex_grid.h"

namespace mfgrl {

inline constexpr uint32_t kRolloutDomain = 0x524f4c4c;  // "ROLL"
inline constexpr uint32_t kEpisodeDomain = 0x45504953;  // "EPIS"

// z_1 = z1, z_{t+1} = phi(z_t, atlas.Lookup(t, z_t)). Returns z_1..z_T.
std::vector<MeanFieldState> StatisticalTrajectory(const MeanFieldState& z1,
                                                  const PolicyAtlas& atlas,
                                                  const EnvModel& env);

struct RolloutOptions {
  int n_agents = 10000;
  uint64_t seed = 0;
  // Agents look up the prescription at the statistical flow instead of
  // the empirical distribution of the simulated population.
  bool condition_on_statistical = false;
};

struct TrajectoryReport {
  std::vector<MeanFieldState> statistical_z;
  std::vector<MeanFieldState> empirical_z;
  // counts[t - 1][x]: agents of type x at stage t.
  std::vector<std::vector<int>> counts;
  int n_agents = 0;
  double mean_return = 0.0;
  // Half-width of the 99% normal confidence interval of mean_return.
  double return_ci = 0.0;
};

// Initial counts round N z1 by largest remainder (ties to the lower type).
// Agent i draws from the stream (seed, {kRolloutDomain, 0, i, 0, 0}).
// Rewards are evaluated at the population's own empirical distribution.
TrajectoryReport RolloutPopulation(const MeanFieldState& z1,
                                   const PolicyAtlas& atlas,
                                   const EnvModel& env,
                                   const RolloutOptions& options);

struct MonteCarloEstimate {
  double mean = 0.0;
  double ci = 0.0;  // 99% half-width
  int episodes = 0;
};

// Discounted return of one agent that starts in type x and follows the
// atlas while the population moves along the statistical flow from z1.
// Episode e draws from the stream (seed, {kEpisodeDomain, 0, e, 0, 0}).
MonteCarloEstimate TaggedAgentValue(const MeanFieldState& z1, int x,
                                    const PolicyAtlas& atlas,
                                    const EnvModel& env, int episodes,
                                    uint64_t seed, int threads = 0);

struct ExploitabilityEntry {
  int t = 0;
  size_t z_index = 0;
  int x = 0;
  double gap = 0.0;
};

struct ExploitabilityReport {
  // Ordered by t, then z_index, then x.
  std::vector<ExploitabilityEntry> gaps;
  double max_gap = 0.0;
};

// For every stage t and grid point z the flow from z_t = z is frozen under
// the atlas, and a single agent's best-response value is compared with the
// value of following the atlas along that flow:
//   gap(t, z, x) = max(BR_t(x) - V_t(x), 0).
ExploitabilityReport Exploitability(const PolicyAtlas& atlas,
                                    const EnvModel& env, int threads = 0);

// sup over grid z and x of the total-variation distance between the stage-t
// prescriptions of a and b.
double AtlasDistance(const PolicyAtlas& a, const PolicyAtlas& b, int t);

}  // namespace mfgrl

#endif  // MFGRL_EVALUATION_H_
