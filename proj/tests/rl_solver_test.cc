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

#include <doctest.h>

#include <cmath>
#include <random>

#include "mfgrl/exact_solver.h"
#include "test_util.h"

namespace mfgrl {
namespace {

std::vector<RngStream> Streams(int n_pairs, uint64_t seed, uint32_t batch = 1) {
  std::vector<RngStream> out;
  for (int p = 0; p < n_pairs; ++p) {
    out.emplace_back(seed, StreamId{kSarsaDomain, 1, 0, batch, static_cast<uint32_t>(p)});
  }
  return out;
}

StageTables Constant(const SimplexGrid& grid, int n_actions, double c) {
  StageTables t(grid.size(), grid.NumTypes(), n_actions);
  for (size_t g = 0; g < grid.size(); ++g) {
    for (int x = 0; x < grid.NumTypes(); ++x) t.v(g, x) = c;
  }
  return t;
}

TEST_CASE("sarsa with unit step is the one-step target") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 10);
  const StageTables v_next = Constant(*grid, 2, -2.0);
  const MeanFieldState z({0.6, 0.4});
  RlConfig cfg;
  cfg.sarsa_alpha = 1.0;
  cfg.batch_size = 7;
  cfg.tail_average = false;
  auto streams = Streams(4, 3);
  const QSlice q = ExpectedSarsaBatch(z, z, v_next, *grid, env, QSlice(2, 2, 5.0), cfg, streams);
  for (int x = 0; x < 2; ++x) {
    for (int a = 0; a < 2; ++a) CHECK(q(x, a) == env.reward(x, a, z) + 0.9 * -2.0);
  }
}

TEST_CASE("single sarsa update") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 10);
  const StageTables zero = StageTables::Zero(*grid, 2);
  RlConfig cfg;
  cfg.batch_size = 1;
  auto streams = Streams(4, 3);
  const MeanFieldState z({0.5, 0.5});
  const QSlice q = ExpectedSarsaBatch(z, z, zero, *grid, env, QSlice(2, 2), cfg, streams);
  CHECK(q(1, 1) == doctest::Approx(-0.12).epsilon(1e-14));
  CHECK(q(0, 0) == 0.0);
  CHECK(q(0, 1) == doctest::Approx(-0.05).epsilon(1e-14));
}

TEST_CASE("deterministic rows follow the closed-form recursion") {
  // Repair always leads to the healthy type, so the repair entries see a
  // fixed target G and q_l = G + (q_0 - G)(1 - alpha)^l, whatever the
  // update order of the other pairs.
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 10);
  StageTables v_next(grid->size(), 2, 2);
  for (size_t g = 0; g < grid->size(); ++g) {
    v_next.v(g, 0) = -0.25;
    v_next.v(g, 1) = -3.0;
  }
  const MeanFieldState z({0.4, 0.6});
  RlConfig cfg;
  cfg.batch_size = 40;
  cfg.sarsa_alpha = 0.3;
  for (bool tail : {false, true}) {
    cfg.tail_average = tail;
    auto streams = Streams(4, 5);
    const QSlice q = ExpectedSarsaBatch(z, z, v_next, *grid, env, QSlice(2, 2, 1.0), cfg, streams);
    for (int x = 0; x < 2; ++x) {
      const double target = env.reward(x, 1, z) + 0.9 * -0.25;
      double sum = 0.0;
      int count = 0;
      for (int l = tail ? cfg.batch_size / 2 + 1 : cfg.batch_size; l <= cfg.batch_size; ++l) {
        sum += target + (1.0 - target) * std::pow(1.0 - cfg.sarsa_alpha, l);
        ++count;
      }
      CHECK(q(x, 1) == doctest::Approx(sum / count).epsilon(1e-13));
    }
  }
}

TEST_CASE("sarsa needs one stream per pair") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 4);
  auto streams = Streams(3, 1);
  CHECK_THROWS_AS(ExpectedSarsaBatch(MeanFieldState({1.0, 0.0}), MeanFieldState({1.0, 0.0}),
                                     StageTables::Zero(*grid, 2), *grid, env, QSlice(2, 2), {},
                                     streams),
                  MfgError);
}

TEST_CASE("sarsa matches the model-based values") {
  // Sarsa under the exact prescription and next-stage values should land
  // on the exact action values.
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 20);
  const Solution exact = BackwardSolve(env, grid, {});
  RlConfig cfg;
  cfg.batch_size = 2000;
  for (int t : {5, 40, 59}) {
    for (size_t g = 0; g < grid->size(); g += 4) {
      const MeanFieldState& z = grid->Point(g);
      const Prescription& gamma = exact.atlas.At(t, g);
      const MeanFieldState z_next = PropagateMeanField(z, gamma, *env.kernel);
      auto streams = Streams(4, 11, static_cast<uint32_t>(t * 100 + g));
      const QSlice q = ExpectedSarsaBatch(z, z_next, exact.tables[t], *grid, env,
                                          QSlice(2, 2), cfg, streams);
      const QSlice ref = exact.tables[t - 1].QAt(g);
      CHECK(SupNorm(q.values, ref.values) <= 0.03);
    }
  }
}

TEST_CASE("each pair only reads its own stream") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 10);
  const StageTables v_next = [&] {
    StageTables t(grid->size(), 2, 2);
    for (size_t g = 0; g < grid->size(); ++g) t.v(g, 1) = -1.0;
    return t;
  }();
  const MeanFieldState z({0.5, 0.5});
  RlConfig cfg;
  cfg.batch_size = 50;
  auto a = Streams(4, 1);
  auto b = Streams(4, 1);
  b[0] = RngStream(99, StreamId{kSarsaDomain, 9, 9, 9, 9});
  const QSlice qa = ExpectedSarsaBatch(z, z, v_next, *grid, env, QSlice(2, 2), cfg, a);
  const QSlice qb = ExpectedSarsaBatch(z, z, v_next, *grid, env, QSlice(2, 2), cfg, b);
  CHECK(qa(0, 0) != qb(0, 0));
  for (int p = 1; p < 4; ++p) CHECK(qa.values[p] == qb.values[p]);
}

TEST_CASE("cached kernel rows reproduce the sampler exactly") {
  const EnvModel with_kernel = testing::Crowded(4);
  EnvModel sampler_only = with_kernel;
  sampler_only.kernel.reset();
  const auto grid = BuildGrid(3, 6);
  StageTables v_next(grid->size(), 3, 2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (size_t g = 0; g < grid->size(); ++g) {
    for (int x = 0; x < 3; ++x) v_next.v(g, x) = normal(rng);
  }
  RlConfig cfg;
  cfg.batch_size = 300;
  for (size_t g = 0; g < grid->size(); g += 5) {
    const MeanFieldState& z = grid->Point(g);
    auto s1 = Streams(6, g);
    auto s2 = Streams(6, g);
    const QSlice a = ExpectedSarsaBatch(z, z, v_next, *grid, with_kernel, QSlice(3, 2), cfg, s1);
    const QSlice b = ExpectedSarsaBatch(z, z, v_next, *grid, sampler_only, QSlice(3, 2), cfg, s2);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("policy gradient") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  SUBCASE("vanishes on flat rows") {
    QSlice q(2, 3, -0.7);
    const std::vector<double> logits{0.3, -1.0, 2.0, 0.0, 0.5, -0.5};
    for (double g : PolicyGradient(q, logits)) CHECK(std::abs(g) <= 1e-15);
  }
  SUBCASE("matches finite differences") {
    constexpr double h = 1e-6;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const int nx = 1 + k % 3;
      const int na = 2 + k % 4;
      QSlice q(nx, na);
      std::vector<double> logits(nx * na);
      for (double& v : q.values) v = normal(rng);
      for (double& v : logits) v = 2.0 * normal(rng);
      const auto grad = PolicyGradient(q, logits);
      for (size_t i = 0; i < logits.size(); ++i) {
        auto up = logits, down = logits;
        up[i] += h;
        down[i] -= h;
        const double fd = (PolicyObjective(q, up) - PolicyObjective(q, down)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[i]));
      }
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("ascent does not decrease the objective") {
    for (int k = 0; k < 50; ++k) {
      QSlice q(2, 3);
      for (double& v : q.values) v = normal(rng);
      std::vector<double> logits(6, 0.0);
      double j = PolicyObjective(q, logits);
      for (int s = 0; s < 40; ++s) {
        logits = PolicyGradientAscent(q, std::move(logits), 1, 0.5);
        const double next = PolicyObjective(q, logits);
        CHECK(next >= j - 1e-12);
        j = next;
      }
    }
  }
  SUBCASE("zero steps leave the logits alone") {
    QSlice q(1, 2);
    q(0, 0) = 1.0;
    CHECK(PolicyGradientAscent(q, {0.1, 0.2}, 0, 1.0) == std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(PolicyGradientAscent(q, {0.1}, 1, 1.0), MfgError);
  }
}

TEST_CASE("last stage learns to do nothing") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 10);
  const StageTables zero = StageTables::Zero(*grid, 2);
  RlConfig cfg;
  cfg.seed = 3;
  for (size_t g = 0; g < grid->size(); g += 2) {
    const StageRl r = SolveStageRl(grid->Point(g), zero, *grid, env, cfg, 60, g);
    CHECK(r.gamma(0, 1) <= 0.02);
    CHECK(r.gamma(1, 1) <= 0.02);
    CHECK(r.iterations == cfg.policy_iters);
  }
}

TEST_CASE("no ascent keeps the uniform prescription") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 10);
  RlConfig cfg;
  cfg.policy_iters = 1;
  cfg.pg_steps = 0;
  const StageRl r =
      SolveStageRl(grid->Point(3), StageTables::Zero(*grid, 2), *grid, env, cfg, 60, 3);
  CHECK(r.gamma == Prescription::Uniform(2, 2));
  CHECK(r.policy_change == 0.0);
  CHECK(r.converged);
}

TEST_CASE("single stages agree with the exact solver") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 50);
  const Solution exact = BackwardSolve(env, grid, {});
  RlConfig cfg;
  cfg.seed = 17;
  for (int t : {30, 59}) {
    CAPTURE(t);
    double worst = 0.0, residual = 0.0;
    for (size_t g = 0; g < grid->size(); ++g) {
      const StageRl r = SolveStageRl(grid->Point(g), exact.tables[t], *grid, env, cfg, t, g);
      worst = std::max(worst, SupNorm(r.gamma.data(), exact.atlas.At(t, g).data()));
      residual = std::max(residual, r.residual);
    }
    CHECK(worst <= 0.05);
    CHECK(residual <= 0.05);
  }
}

TEST_CASE("null game learns zero values") {
  EnvModel env = testing::Crowded(3);
  env.reward = [](int, int, const MeanFieldState&) { return 0.0; };
  const auto grid = BuildGrid(3, 4);
  RlConfig cfg;
  cfg.batch_size = 50;
  cfg.policy_iters = 3;
  const Solution sol = RlBackwardSolve(env, grid, cfg);
  for (const StageTables& s : sol.tables) {
    for (size_t g = 0; g < grid->size(); ++g) {
      for (int x = 0; x < 3; ++x) CHECK(std::abs(s.v(g, x)) <= 1e-12);
    }
  }
}

TEST_CASE("output depends on the seed only") {
  const EnvModel env = testing::Malware(4);
  const auto grid = BuildGrid(2, 12);
  RlConfig cfg;
  cfg.batch_size = 100;
  cfg.policy_iters = 5;
  cfg.seed = 42;
  cfg.threads = 1;
  const Solution a = RlBackwardSolve(env, grid, cfg);
  cfg.threads = 4;
  const Solution b = RlBackwardSolve(env, grid, cfg);
  cfg.seed = 43;
  const Solution c = RlBackwardSolve(env, grid, cfg);
  bool differs = false;
  for (int t = 1; t <= 4; ++t) {
    for (size_t g = 0; g < grid->size(); ++g) {
      CHECK(a.atlas.At(t, g) == b.atlas.At(t, g));
      for (int x = 0; x < 2; ++x) CHECK(a.tables[t - 1].v(g, x) == b.tables[t - 1].v(g, x));
      differs |= !(a.atlas.At(t, g) == c.atlas.At(t, g));
    }
  }
  CHECK(differs);
  CHECK(a.diagnostics.records.size() == 4 * 13);
}

TEST_CASE("sampler-only environments") {
  EnvModel env = testing::Crowded(3);
  const TransitionKernel kernel = *env.kernel;
  env.kernel.reset();
  const auto grid = BuildGrid(3, 5);
  RlConfig cfg;
  cfg.next_state_samples = 20000;
  std::mt19937_64 rng(6);
  for (int k = 0; k < 10; ++k) {
    const MeanFieldState z(testing::RandomSimplex(3, rng));
    const Prescription gamma = testing::RandomPrescription(3, 2, rng);
    const MeanFieldState est = EmpiricalPushforward(z, gamma, env, cfg, 1, k);
    const MeanFieldState ref = PropagateMeanField(z, gamma, kernel);
    CHECK(SupNorm(est.probs(), ref.probs()) <= 3.0 / std::sqrt(20000.0));
    CHECK(EmpiricalPushforward(z, gamma, env, cfg, 1, k) == est);
  }
  cfg.batch_size = 100;
  cfg.policy_iters = 4;
  cfg.next_state_samples = 500;
  const Solution sol = RlBackwardSolve(env, grid, cfg);
  CHECK(sol.diagnostics.records.size() == 3 * grid->size());
}

TEST_CASE("config validation") {
  RlConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.sarsa_alpha = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), MfgError);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.Validate(), MfgError);
  cfg = {};
  cfg.pg_steps = -1;
  CHECK_THROWS_AS(cfg.Validate(), MfgError);
  cfg = {};
  cfg.next_state_samples = 0;
  CHECK_THROWS_AS(cfg.Validate(), MfgError);
}

}  // namespace
}  // namespace mfgrl
