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


#include "mfgrl/rl_solver.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfgrl/parallel.h"

namespace mfgrl {
namespace {

std::vector<RngStream> PairStreams(uint64_t seed, uint32_t domain,
                                   uint32_t stage, uint32_t cell,
                                   uint32_t batch, int n_pairs) {
  std::vector<RngStream> out;
  out.reserve(n_pairs);
  for (int p = 0; p < n_pairs; ++p) {
    out.emplace_back(seed, StreamId{domain, stage, cell, batch,
                                    static_cast<uint32_t>(p)});
  }
  return out;
}

// Row-major (pair, next type) frequencies of sampled transitions.
std::vector<double> EmpiricalRows(const MeanFieldState& z, const EnvModel& env,
                                  const RlConfig& cfg, uint32_t stage,
                                  uint32_t cell) {
  const int n_pairs = env.n_types * env.n_actions;
  std::vector<double> rows(static_cast<size_t>(n_pairs) * env.n_types, 0.0);
  auto streams = PairStreams(cfg.seed, kPushforwardDomain, stage, cell, 0,
                             n_pairs);
  const double unit = 1.0 / cfg.next_state_samples;
  for (int p = 0; p < n_pairs; ++p) {
    const int x = p / env.n_actions;
    const int a = p % env.n_actions;
    for (int s = 0; s < cfg.next_state_samples; ++s) {
      const int y = SampleTransition(env, x, a, z, streams[p]);
      rows[static_cast<size_t>(p) * env.n_types + y] += unit;
    }
  }
  return rows;
}

MeanFieldState MixRows(const MeanFieldState& z, const Prescription& gamma,
                       std::span<const double> rows, int n_types,
                       int n_actions) {
  std::vector<double> next(n_types, 0.0);
  for (int x = 0; x < n_types; ++x) {
    for (int a = 0; a < n_actions; ++a) {
      const double w = z[x] * gamma(x, a);
      if (w == 0.0) continue;
      const auto row = rows.subspan(
          static_cast<size_t>(x * n_actions + a) * n_types, n_types);
      for (int y = 0; y < n_types; ++y) next[y] += w * row[y];
    }
  }
  double total = 0.0;
  for (double v : next) total += v;
  for (double& v : next) v /= total;
  return MeanFieldState(std::move(next));
}

}  // namespace

void RlConfig::Validate() const {
  if (batch_size < 1) throw MfgError("rl.batch_size must be >= 1");
  if (policy_iters < 1) throw MfgError("rl.policy_iters must be >= 1");
  if (!(sarsa_alpha > 0.0 && sarsa_alpha <= 1.0)) {
    throw MfgError("rl.sarsa_alpha must lie in (0, 1]");
  }
  if (pg_steps < 0) throw MfgError("rl.pg_steps must be >= 0");
  if (!(pg_lr > 0.0)) throw MfgError("rl.pg_lr must be > 0");
  if (!std::isfinite(q_init)) throw MfgError("rl.q_init must be finite");
  if (next_state_samples < 1) {
    throw MfgError("rl.next_state_samples must be >= 1");
  }
  if (!(tol > 0.0)) throw MfgError("rl.tol must be > 0");
}

QSlice ExpectedSarsaBatch(const MeanFieldState& z,
                          const MeanFieldState& z_next,
                          const StageTables& v_next, const SimplexGrid& grid,
                          const EnvModel& env, const QSlice& q_in,
                          const RlConfig& cfg,
                          std::span<RngStream> streams) {
  const int n_types = env.n_types;
  const int n_pairs = n_types * env.n_actions;
  if (static_cast<int>(streams.size()) != n_pairs) {
    throw MfgError("ExpectedSarsaBatch: need one stream per (x, a) pair");
  }
  const std::vector<double> v = InterpolateValues(v_next, z_next, grid);
  std::vector<double> reward(n_pairs);
  for (int p = 0; p < n_pairs; ++p) {
    reward[p] = env.reward(p / env.n_actions, p % env.n_actions, z);
  }
  // With a kernel the rows are fixed for the batch; drawing from them with
  // Categorical is exactly what the derived sampler does.
  std::vector<double> rows;
  if (env.HasKernel()) {
    rows.assign(static_cast<size_t>(n_pairs) * n_types, 0.0);
    for (int p = 0; p < n_pairs; ++p) {
      (*env.kernel)(p / env.n_actions, p % env.n_actions, z,
                    std::span<double>(rows).subspan(
                        static_cast<size_t>(p) * n_types, n_types));
    }
  }

  const double alpha = cfg.sarsa_alpha;
  const int length = cfg.batch_size;
  const int tail_start = cfg.tail_average ? length / 2 : length - 1;
  std::vector<double> q = q_in.values;
  std::vector<double> tail(n_pairs, 0.0);
  for (int l = 0; l < length; ++l) {
    for (int p = 0; p < n_pairs; ++p) {
      const int next =
          rows.empty()
              ? SampleTransition(env, p / env.n_actions, p % env.n_actions, z,
                                 streams[p])
              : streams[p].Categorical(std::span<const double>(rows).subspan(
                    static_cast<size_t>(p) * n_types, n_types));
      const double target = reward[p] + env.discount * v[next];
      q[p] = (1.0 - alpha) * q[p] + alpha * target;
    }
    if (l >= tail_start) {
      for (int p = 0; p < n_pairs; ++p) tail[p] += q[p];
    }
  }
  QSlice out(n_types, env.n_actions);
  const double count = length - tail_start;
  for (int p = 0; p < n_pairs; ++p) {
    out.values[p] = count == 1 ? q[p] : tail[p] / count;
  }
  return out;
}

double PolicyObjective(const QSlice& q, std::span<const double> logits) {
  const Prescription p = SoftmaxPrescription(q.n_types, q.n_actions, logits);
  double j = 0.0;
  for (size_t i = 0; i < q.values.size(); ++i) j += p.data()[i] * q.values[i];
  return j;
}

std::vector<double> PolicyGradient(const QSlice& q,
                                   std::span<const double> logits) {
  const Prescription p = SoftmaxPrescription(q.n_types, q.n_actions, logits);
  std::vector<double> grad(q.values.size());
  for (int x = 0; x < q.n_types; ++x) {
    double mean = 0.0;
    for (int a = 0; a < q.n_actions; ++a) mean += p(x, a) * q(x, a);
    for (int a = 0; a < q.n_actions; ++a) {
      grad[x * q.n_actions + a] = p(x, a) * (q(x, a) - mean);
    }
  }
  return grad;
}

std::vector<double> PolicyGradientAscent(const QSlice& q,
                                         std::vector<double> logits,
                                         int steps, double lr) {
  if (logits.size() != q.values.size()) {
    throw MfgError("PolicyGradientAscent: logits and q differ in size");
  }
  for (int step = 0; step < steps; ++step) {
    const auto grad = PolicyGradient(q, logits);
    for (size_t i = 0; i < logits.size(); ++i) logits[i] += lr * grad[i];
  }
  return logits;
}

MeanFieldState EmpiricalPushforward(const MeanFieldState& z,
                                    const Prescription& gamma,
                                    const EnvModel& env, const RlConfig& cfg,
                                    uint32_t stage, uint32_t cell) {
  const auto rows = EmpiricalRows(z, env, cfg, stage, cell);
  return MixRows(z, gamma, rows, env.n_types, env.n_actions);
}

StageRl SolveStageRl(const MeanFieldState& z, const StageTables& v_next,
                     const SimplexGrid& grid, const EnvModel& env,
                     const RlConfig& cfg, uint32_t stage, uint32_t cell) {
  const int n_types = env.n_types;
  const int n_actions = env.n_actions;
  const int n_pairs = n_types * n_actions;
  std::vector<double> empirical;
  if (!env.HasKernel()) empirical = EmpiricalRows(z, env, cfg, stage, cell);
  auto next_state = [&](const Prescription& gamma) {
    return env.HasKernel()
               ? PropagateMeanField(z, gamma, *env.kernel)
               : MixRows(z, gamma, empirical, n_types, n_actions);
  };
  auto sarsa = [&](const Prescription& gamma, const QSlice& q_in, int batch) {
    auto streams = PairStreams(cfg.seed, kSarsaDomain, stage, cell,
                               static_cast<uint32_t>(batch), n_pairs);
    return ExpectedSarsaBatch(z, next_state(gamma), v_next, grid, env, q_in,
                              cfg, streams);
  };

  StageRl out;
  out.gamma = Prescription::Uniform(n_types, n_actions);
  QSlice q(n_types, n_actions, cfg.q_init);
  std::vector<double> logits(n_pairs, 0.0);
  std::vector<double> row_lr(n_types, cfg.pg_lr);
  std::vector<double> grad_prev;
  for (int n = 1; n <= cfg.policy_iters; ++n) {
    q = sarsa(out.gamma, q, n);
    std::vector<double> grad = PolicyGradient(q, logits);
    for (int x = 0; x < n_types; ++x) {
      const std::span<const double> row(logits.data() + x * n_actions,
                                        n_actions);
      double agree = 0.0;
      for (int a = 0; a < n_actions && !grad_prev.empty(); ++a) {
        agree += grad[x * n_actions + a] * grad_prev[x * n_actions + a];
      }
      if (cfg.adaptive_lr && agree < 0.0) {
        row_lr[x] = std::max(0.5 * row_lr[x], cfg.pg_lr / n);
      }
      if (cfg.adaptive_lr && agree > 0.0) {
        row_lr[x] = std::min(1.2 * row_lr[x], cfg.pg_lr);
      }
      QSlice q_row(1, n_actions);
      for (int a = 0; a < n_actions; ++a) q_row(0, a) = q(x, a);
      const auto moved = PolicyGradientAscent(
          q_row, std::vector<double>(row.begin(), row.end()), cfg.pg_steps,
          row_lr[x]);
      std::copy(moved.begin(), moved.end(), logits.begin() + x * n_actions);
    }
    grad_prev = std::move(grad);
    Prescription next = SoftmaxPrescription(n_types, n_actions, logits);
    out.policy_change = SupNorm(next.data(), out.gamma.data());
    out.gamma = std::move(next);
    out.iterations = n;
  }
  out.q = sarsa(out.gamma, q, cfg.policy_iters + 1);
  out.residual = FixedPointResidual(out.q, out.gamma);
  out.converged = out.policy_change < cfg.tol;
  return out;
}

Solution RlBackwardSolve(const EnvModel& env,
                         std::shared_ptr<const SimplexGrid> grid,
                         const RlConfig& cfg) {
  cfg.Validate();
  env.Validate();
  if (grid->NumTypes() != env.n_types) {
    throw MfgError("RlBackwardSolve: grid and environment disagree on N_x");
  }
  const int horizon = env.horizon;
  const size_t n_grid = grid->size();
  Solution sol{PolicyAtlas(grid, horizon, env.n_actions), {}, {}};
  sol.tables.assign(horizon, StageTables(n_grid, env.n_types, env.n_actions));
  const StageTables terminal = StageTables::Zero(*grid, env.n_actions);
  std::vector<StageRl> results(n_grid);

  for (int t = horizon; t >= 1; --t) {
    const StageTables& v_next = t == horizon ? terminal : sol.tables[t];
    ParallelFor(n_grid, cfg.threads, [&](size_t g) {
      try {
        results[g] = SolveStageRl(grid->Point(g), v_next, *grid, env, cfg,
                                  static_cast<uint32_t>(t),
                                  static_cast<uint32_t>(g));
      } catch (const std::exception& e) {
        throw MfgError("stage t=" + std::to_string(t) +
                       ", z_index=" + std::to_string(g) + ": " + e.what());
      }
    });
    StageTables& stage = sol.tables[t - 1];
    for (size_t g = 0; g < n_grid; ++g) {
      StageRl& r = results[g];
      stage.Finalize(g, r.q, r.gamma);
      sol.diagnostics.records.push_back(
          {t, g, r.converged, r.iterations, r.policy_change, r.residual});
      sol.atlas.Set(t, g, std::move(r.gamma));
    }
  }
  return sol;
}

}  // namespace mfgrl
