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


#include "mfgrl/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfgrl/parallel.h"
#include "mfgrl/rng.h"

namespace mfgrl {
namespace {

// Two-sided 99% normal quantile.
constexpr double kZ99 = 2.5758293035489;

void RequireKernel(const EnvModel& env, const char* what) {
  if (!env.HasKernel()) {
    throw MfgError(env.name + ": " + what + " needs a transition kernel");
  }
}

void RequireCompatible(const PolicyAtlas& atlas, const EnvModel& env) {
  if (atlas.NumTypes() != env.n_types || atlas.NumActions() != env.n_actions) {
    throw MfgError("atlas and environment disagree on (N_x, N_a)");
  }
  if (atlas.Horizon() != env.horizon) {
    throw MfgError("atlas horizon " + std::to_string(atlas.Horizon()) +
                   " differs from environment horizon " +
                   std::to_string(env.horizon));
  }
}

MonteCarloEstimate Summarize(const std::vector<double>& returns) {
  MonteCarloEstimate out;
  out.episodes = static_cast<int>(returns.size());
  if (returns.empty()) return out;
  const double n = static_cast<double>(returns.size());
  out.mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  if (returns.size() > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - out.mean) * (r - out.mean);
    out.ci = kZ99 * std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

std::vector<int> LargestRemainder(const MeanFieldState& z, int n) {
  const int n_types = z.NumTypes();
  std::vector<int> counts(n_types);
  std::vector<double> remainder(n_types);
  int assigned = 0;
  for (int x = 0; x < n_types; ++x) {
    const double exact = z[x] * n;
    counts[x] = static_cast<int>(std::floor(exact));
    remainder[x] = exact - counts[x];
    assigned += counts[x];
  }
  std::vector<int> order(n_types);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int i = 0; assigned < n; ++i, ++assigned) ++counts[order[i % n_types]];
  return counts;
}

MeanFieldState FromCounts(const std::vector<int>& counts, int n) {
  std::vector<double> probs(counts.size());
  for (size_t x = 0; x < counts.size(); ++x) {
    probs[x] = static_cast<double>(counts[x]) / n;
  }
  return MeanFieldState(std::move(probs));
}

}  // namespace

std::vector<MeanFieldState> StatisticalTrajectory(const MeanFieldState& z1,
                                                  const PolicyAtlas& atlas,
                                                  const EnvModel& env) {
  RequireKernel(env, "the statistical trajectory");
  RequireCompatible(atlas, env);
  std::vector<MeanFieldState> flow{z1};
  flow.reserve(env.horizon);
  for (int t = 1; t < env.horizon; ++t) {
    const MeanFieldState& z = flow.back();
    flow.push_back(PropagateMeanField(z, atlas.Lookup(t, z), *env.kernel));
  }
  return flow;
}

TrajectoryReport RolloutPopulation(const MeanFieldState& z1,
                                   const PolicyAtlas& atlas,
                                   const EnvModel& env,
                                   const RolloutOptions& options) {
  RequireCompatible(atlas, env);
  const int n = options.n_agents;
  if (n < 1) throw MfgError("rollout: n_agents must be >= 1");
  TrajectoryReport report;
  report.n_agents = n;
  if (env.HasKernel()) report.statistical_z = StatisticalTrajectory(z1, atlas, env);
  if (options.condition_on_statistical && !env.HasKernel()) {
    RequireKernel(env, "statistical conditioning");
  }

  std::vector<int> counts = LargestRemainder(z1, n);
  std::vector<int> types;
  types.reserve(n);
  for (int x = 0; x < env.n_types; ++x) types.insert(types.end(), counts[x], x);
  std::vector<RngStream> streams;
  streams.reserve(n);
  for (int i = 0; i < n; ++i) {
    streams.emplace_back(options.seed, StreamId{kRolloutDomain, 0,
                                                static_cast<uint32_t>(i), 0, 0});
  }
  std::vector<double> returns(n, 0.0);
  double discount = 1.0;
  for (int t = 1; t <= env.horizon; ++t) {
    const MeanFieldState z = FromCounts(counts, n);
    report.empirical_z.push_back(z);
    report.counts.push_back(counts);
    const MeanFieldState& condition =
        options.condition_on_statistical ? report.statistical_z[t - 1] : z;
    const Prescription gamma = atlas.Lookup(t, condition);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int x = types[i];
      const int a = streams[i].Categorical(gamma.Row(x));
      returns[i] += discount * env.reward(x, a, z);
      types[i] = SampleTransition(env, x, a, z, streams[i]);
      ++counts[types[i]];
    }
    discount *= env.discount;
  }
  const MonteCarloEstimate est = Summarize(returns);
  report.mean_return = est.mean;
  report.return_ci = est.ci;
  return report;
}

MonteCarloEstimate TaggedAgentValue(const MeanFieldState& z1, int x,
                                    const PolicyAtlas& atlas,
                                    const EnvModel& env, int episodes,
                                    uint64_t seed, int threads) {
  if (x < 0 || x >= env.n_types) throw MfgError("tagged agent: bad type");
  if (episodes < 1) throw MfgError("tagged agent: episodes must be >= 1");
  const auto flow = StatisticalTrajectory(z1, atlas, env);
  std::vector<Prescription> gammas;
  gammas.reserve(flow.size());
  for (int t = 1; t <= env.horizon; ++t) {
    gammas.push_back(atlas.Lookup(t, flow[t - 1]));
  }
  std::vector<double> returns(episodes);
  ParallelFor(static_cast<size_t>(episodes), threads, [&](size_t e) {
    RngStream rng(seed,
                  StreamId{kEpisodeDomain, 0, static_cast<uint32_t>(e), 0, 0});
    int type = x;
    double total = 0.0;
    double discount = 1.0;
    for (int t = 1; t <= env.horizon; ++t) {
      const MeanFieldState& z = flow[t - 1];
      const int a = rng.Categorical(gammas[t - 1].Row(type));
      total += discount * env.reward(type, a, z);
      type = SampleTransition(env, type, a, z, rng);
      discount *= env.discount;
    }
    returns[e] = total;
  });
  return Summarize(returns);
}

ExploitabilityReport Exploitability(const PolicyAtlas& atlas,
                                    const EnvModel& env, int threads) {
  RequireKernel(env, "exploitability");
  RequireCompatible(atlas, env);
  const SimplexGrid& grid = atlas.grid();
  const int horizon = env.horizon;
  const int n_types = env.n_types;
  const int n_actions = env.n_actions;
  const size_t n_grid = grid.size();
  const size_t n_starts = static_cast<size_t>(horizon) * n_grid;
  // gaps[(t - 1) * n_grid + g][x]
  std::vector<std::vector<double>> gaps(n_starts);

  ParallelFor(n_starts, threads, [&](size_t job) {
    const int t0 = static_cast<int>(job / n_grid) + 1;
    const size_t g = job % n_grid;
    std::vector<MeanFieldState> flow{grid.Point(g)};
    std::vector<Prescription> gammas{atlas.At(t0, g)};
    for (int t = t0 + 1; t <= horizon; ++t) {
      flow.push_back(
          PropagateMeanField(flow.back(), gammas.back(), *env.kernel));
      gammas.push_back(atlas.Lookup(t, flow.back()));
    }
    std::vector<double> v_pol(n_types, 0.0), v_br(n_types, 0.0);
    std::vector<double> next_pol(n_types), next_br(n_types);
    std::vector<double> row(n_types);
    for (int t = horizon; t >= t0; --t) {
      const MeanFieldState& z = flow[t - t0];
      const Prescription& gamma = gammas[t - t0];
      for (int x = 0; x < n_types; ++x) {
        double pol = 0.0;
        double best = -INFINITY;
        for (int a = 0; a < n_actions; ++a) {
          std::fill(row.begin(), row.end(), 0.0);
          (*env.kernel)(x, a, z, row);
          double future_pol = 0.0, future_br = 0.0;
          for (int y = 0; y < n_types; ++y) {
            future_pol += row[y] * v_pol[y];
            future_br += row[y] * v_br[y];
          }
          const double r = env.reward(x, a, z);
          pol += gamma(x, a) * (r + env.discount * future_pol);
          best = std::max(best, r + env.discount * future_br);
        }
        next_pol[x] = pol;
        next_br[x] = best;
      }
      std::swap(v_pol, next_pol);
      std::swap(v_br, next_br);
    }
    std::vector<double> gap(n_types);
    for (int x = 0; x < n_types; ++x) gap[x] = std::max(v_br[x] - v_pol[x], 0.0);
    gaps[job] = std::move(gap);
  });

  ExploitabilityReport report;
  report.gaps.reserve(n_starts * n_types);
  for (size_t job = 0; job < n_starts; ++job) {
    for (int x = 0; x < n_types; ++x) {
      const double gap = gaps[job][x];
      report.gaps.push_back(
          {static_cast<int>(job / n_grid) + 1, job % n_grid, x, gap});
      report.max_gap = std::max(report.max_gap, gap);
    }
  }
  return report;
}

double AtlasDistance(const PolicyAtlas& a, const PolicyAtlas& b, int t) {
  if (a.NumTypes() != b.NumTypes() || a.NumActions() != b.NumActions() ||
      a.grid().size() != b.grid().size() || a.Horizon() != b.Horizon()) {
    throw MfgError("AtlasDistance: atlases differ in dimensions");
  }
  double worst = 0.0;
  for (size_t g = 0; g < a.grid().size(); ++g) {
    const Prescription& pa = a.At(t, g);
    const Prescription& pb = b.At(t, g);
    for (int x = 0; x < a.NumTypes(); ++x) {
      double tv = 0.0;
      for (int k = 0; k < a.NumActions(); ++k) {
        tv += std::abs(pa(x, k) - pb(x, k));
      }
      worst = std::max(worst, 0.5 * tv);
    }
  }
  return worst;
}

}  // namespace mfgrl
