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

#include "mfgrl/exact_solver.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfgrl/parallel.h"
#include "mfgrl/rng.h"

namespace mfgrl {
namespace {

constexpr uint32_t kRestartDomain = 0x52455354;  // "REST"
// Restart fixed points further apart than this count as distinct.
constexpr double kDistinctFixedPoint = 1e-6;

Prescription RandomPrescription(int n_types, int n_actions, RngStream& rng) {
  std::vector<double> p(static_cast<size_t>(n_types) * n_actions);
  for (double& v : p) v = -std::log(1.0 - rng.Uniform());  // Dirichlet(1)
  return Prescription::Normalized(n_types, n_actions, std::move(p));
}

}  // namespace

void FixedPointConfig::Validate() const {
  if (max_iters < 1) throw MfgError("fixed_point.max_iters must be >= 1");
  if (!(tol > 0.0)) throw MfgError("fixed_point.tol must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw MfgError("fixed_point.damping must lie in (0, 1]");
  }
  if (!(tie_tolerance >= 0.0)) {
    throw MfgError("fixed_point.tie_tolerance must be >= 0");
  }
  if (restarts < 0) throw MfgError("fixed_point.restarts must be >= 0");
}

QSlice StageQ(const MeanFieldState& z, const Prescription& gamma,
              const StageTables& v_next, const SimplexGrid& grid,
              const EnvModel& env) {
  if (!env.HasKernel()) {
    throw MfgError(env.name + ": exact stage values need a transition kernel");
  }
  const MeanFieldState z_next = PropagateMeanField(z, gamma, *env.kernel);
  const std::vector<double> v = InterpolateValues(v_next, z_next, grid);
  QSlice q(env.n_types, env.n_actions);
  std::vector<double> row(env.n_types);
  for (int x = 0; x < env.n_types; ++x) {
    for (int a = 0; a < env.n_actions; ++a) {
      std::fill(row.begin(), row.end(), 0.0);
      (*env.kernel)(x, a, z, row);
      double future = 0.0;
      for (int y = 0; y < env.n_types; ++y) future += row[y] * v[y];
      q(x, a) = env.reward(x, a, z) + env.discount * future;
    }
  }
  return q;
}

Prescription BestResponse(const QSlice& q, double tie_tolerance) {
  std::vector<double> p(q.values.size(), 0.0);
  for (int x = 0; x < q.n_types; ++x) {
    const auto row = q.Row(x);
    const double best = *std::max_element(row.begin(), row.end());
    int ties = 0;
    for (double v : row) ties += v >= best - tie_tolerance;
    for (int a = 0; a < q.n_actions; ++a) {
      if (row[a] >= best - tie_tolerance) p[x * q.n_actions + a] = 1.0 / ties;
    }
  }
  return Prescription(q.n_types, q.n_actions, std::move(p));
}

std::vector<double> ProjectToSimplex(std::span<const double> v) {
  // Sort-based Euclidean projection (Held, Wolfe and Crowder 1974).
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) shift = candidate;
  }
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - shift, 0.0);
  return out;
}

StageFixedPoint SolveStageFixedPoint(const MeanFieldState& z,
                                     const StageTables& v_next,
                                     const SimplexGrid& grid,
                                     const EnvModel& env,
                                     const FixedPointConfig& cfg,
                                     const std::optional<Prescription>& initial) {
  const int n_types = env.n_types;
  const int n_actions = env.n_actions;
  StageFixedPoint out;
  Prescription gamma =
      initial ? *initial : Prescription::Uniform(n_types, n_actions);
  auto stage_q = [&](const Prescription& p) {
    return StageQ(z, p, v_next, grid, env);
  };
  auto finish = [&](Prescription p, bool converged) {
    out.converged = converged;
    out.q = stage_q(p);
    out.residual = FixedPointResidual(out.q, p);
    out.gamma = std::move(p);
    return out;
  };

  // Phase 1: damped best-response iteration.
  double beta = cfg.damping;
  std::optional<Prescription> gamma_prev, br_prev, br_prev2;
  int n = 0;
  while (n < cfg.max_iters) {
    ++n;
    const QSlice q = stage_q(gamma);
    Prescription br = BestResponse(q, cfg.tie_tolerance);
    std::vector<double> mixed(gamma.data().size());
    for (size_t i = 0; i < mixed.size(); ++i) {
      mixed[i] = (1.0 - beta) * gamma.data()[i] + beta * br.data()[i];
    }
    Prescription next =
        Prescription::Normalized(n_types, n_actions, std::move(mixed));
    out.iterations = n;
    out.policy_change = SupNorm(next.data(), gamma.data());
    out.final_damping = beta;
    if (out.policy_change < cfg.tol) return finish(std::move(next), true);

    const bool two_cycle =
        gamma_prev && SupNorm(next.data(), gamma_prev->data()) < cfg.tol;
    const bool target_flip = br_prev2 && br == *br_prev2 && !(br == *br_prev);
    if (beta > 0.5 && two_cycle) {
      beta = 0.5;
    } else if (beta <= 0.5 && target_flip) {
      // Still straddling an indifference point; a constant step cannot
      // settle on it.
      gamma = std::move(next);
      break;
    }
    gamma_prev = std::move(gamma);
    gamma = std::move(next);
    br_prev2 = std::move(br_prev);
    br_prev = std::move(br);
  }

  // Phase 2: extragradient projection on the variational inequality
  // <Q(gamma), p - gamma> <= 0 for all p, whose solutions are exactly the
  // fixed points above. The step is halved until
  //   step * |Q(y) - Q(gamma)| <= kShrink * |y - gamma|.
  constexpr double kShrink = 0.9;
  double step = 1.0;
  auto project = [&](const Prescription& from, const QSlice& q, double eta) {
    std::vector<double> p(from.data().size());
    std::vector<double> row(n_actions);
    for (int x = 0; x < n_types; ++x) {
      for (int a = 0; a < n_actions; ++a) row[a] = from(x, a) + eta * q(x, a);
      const auto projected = ProjectToSimplex(row);
      std::copy(projected.begin(), projected.end(), p.begin() + x * n_actions);
    }
    return Prescription::Normalized(n_types, n_actions, std::move(p));
  };
  while (n < cfg.max_iters) {
    ++n;
    const QSlice q = stage_q(gamma);
    Prescription trial = project(gamma, q, step);
    QSlice q_trial = stage_q(trial);
    for (int shrink = 0; shrink < 60; ++shrink) {
      const double moved = SupNorm(trial.data(), gamma.data());
      if (step * SupNorm(q_trial.values, q.values) <= kShrink * moved) break;
      step *= 0.5;
      trial = project(gamma, q, step);
      q_trial = stage_q(trial);
    }
    Prescription next = project(gamma, q_trial, step);
    out.iterations = n;
    out.policy_change = SupNorm(next.data(), gamma.data());
    out.final_damping = step;
    gamma = std::move(next);
    if (out.policy_change < cfg.tol) return finish(std::move(gamma), true);
  }
  return finish(std::move(gamma), false);
}

Solution BackwardSolve(const EnvModel& env,
                       std::shared_ptr<const SimplexGrid> grid,
                       const FixedPointConfig& cfg) {
  cfg.Validate();
  if (!env.HasKernel()) {
    throw MfgError(env.name + ": the exact solver needs a transition kernel");
  }
  if (grid->NumTypes() != env.n_types) {
    throw MfgError("BackwardSolve: grid and environment disagree on N_x");
  }
  const int horizon = env.horizon;
  const size_t n_grid = grid->size();
  Solution sol{PolicyAtlas(grid, horizon, env.n_actions), {}, {}};
  sol.tables.assign(horizon, StageTables(n_grid, env.n_types, env.n_actions));
  const StageTables terminal = StageTables::Zero(*grid, env.n_actions);

  struct PointResult {
    StageFixedPoint fp;
    bool non_unique = false;
  };
  std::vector<PointResult> results(n_grid);

  for (int t = horizon; t >= 1; --t) {
    const StageTables& v_next = t == horizon ? terminal : sol.tables[t];
    ParallelFor(n_grid, cfg.threads, [&](size_t g) {
      try {
        const MeanFieldState& z = grid->Point(g);
        PointResult r{SolveStageFixedPoint(z, v_next, *grid, env, cfg)};
        for (int k = 0; k < cfg.restarts && !r.non_unique; ++k) {
          RngStream rng(cfg.seed, {kRestartDomain, static_cast<uint32_t>(t),
                                   static_cast<uint32_t>(g),
                                   static_cast<uint32_t>(k), 0});
          const auto probe = SolveStageFixedPoint(
              z, v_next, *grid, env, cfg,
              RandomPrescription(env.n_types, env.n_actions, rng));
          r.non_unique = probe.converged && r.fp.converged &&
                         SupNorm(probe.gamma.data(), r.fp.gamma.data()) >
                             kDistinctFixedPoint;
        }
        results[g] = std::move(r);
      } catch (const std::exception& e) {
        throw MfgError("stage t=" + std::to_string(t) +
                       ", z_index=" + std::to_string(g) + ": " + e.what());
      }
    });
    // Single writer: the stage is frozen once every point is in.
    StageTables& stage = sol.tables[t - 1];
    for (size_t g = 0; g < n_grid; ++g) {
      PointResult& r = results[g];
      stage.Finalize(g, r.fp.q, r.fp.gamma);
      sol.diagnostics.records.push_back({t, g, r.fp.converged,
                                         r.fp.iterations, r.fp.policy_change,
                                         r.fp.residual});
      if (r.non_unique) sol.diagnostics.non_unique.emplace_back(t, g);
      sol.atlas.Set(t, g, std::move(r.fp.gamma));
    }
  }
  return sol;
}

}  // namespace mfgrl
