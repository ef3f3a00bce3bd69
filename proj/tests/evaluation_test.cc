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

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mfgrl/exact_solver.h"
#include "test_util.h"

namespace mfgrl {
namespace {

PolicyAtlas Constant(std::shared_ptr<const SimplexGrid> grid, int horizon,
                     const Prescription& gamma) {
  PolicyAtlas atlas(grid, horizon, gamma.NumActions());
  for (int t = 1; t <= horizon; ++t) {
    for (size_t g = 0; g < grid->size(); ++g) atlas.Set(t, g, gamma);
  }
  return atlas;
}

PolicyAtlas Random(std::shared_ptr<const SimplexGrid> grid, int horizon, std::mt19937_64& rng) {
  PolicyAtlas atlas(grid, horizon, 2);
  for (int t = 1; t <= horizon; ++t) {
    for (size_t g = 0; g < grid->size(); ++g) {
      atlas.Set(t, g, testing::RandomPrescription(grid->NumTypes(), 2, rng));
    }
  }
  return atlas;
}

const Prescription kAlwaysRepair = Prescription::Deterministic({1, 1}, 2);
const Prescription kNeverRepair = Prescription::Deterministic({0, 0}, 2);

TEST_CASE("statistical flow under fixed prescriptions") {
  const EnvModel env = testing::Malware(8);
  const auto grid = BuildGrid(2, 10);
  SUBCASE("always repair heals everyone") {
    const auto flow = StatisticalTrajectory(MeanFieldState({0.3, 0.7}),
                                            Constant(grid, 8, kAlwaysRepair), env);
    REQUIRE(flow.size() == 8);
    CHECK(flow[0][1] == 0.7);
    for (int t = 1; t < 8; ++t) CHECK(flow[t][1] == doctest::Approx(0.0));
  }
  SUBCASE("never repair spreads geometrically") {
    const auto flow = StatisticalTrajectory(MeanFieldState({1.0, 0.0}),
                                            Constant(grid, 8, kNeverRepair), env);
    for (int t = 1; t <= 8; ++t) {
      CHECK(std::abs(flow[t - 1][1] - (1.0 - std::pow(0.1, t - 1))) <= 1e-12);
    }
  }
  SUBCASE("single stage") {
    const auto flow = StatisticalTrajectory(MeanFieldState({0.4, 0.6}),
                                            Constant(grid, 1, kNeverRepair), testing::Malware(1));
    REQUIRE(flow.size() == 1);
    CHECK(flow[0] == MeanFieldState({0.4, 0.6}));
  }
  SUBCASE("mass is conserved") {
    std::mt19937_64 rng(1);
    const auto grid3 = BuildGrid(3, 6);
    const EnvModel crowded = testing::Crowded(20);
    const auto flow = StatisticalTrajectory(MeanFieldState({0.2, 0.5, 0.3}),
                                            Random(grid3, 20, rng), crowded);
    for (const auto& z : flow) {
      const double total = std::accumulate(z.probs().begin(), z.probs().end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("population rollouts") {
  const EnvModel env = testing::Malware(10);
  const auto grid = BuildGrid(2, 20);
  SUBCASE("a single agent is reproducible") {
    RolloutOptions opt;
    opt.n_agents = 1;
    opt.seed = 9;
    const auto atlas = Constant(grid, 10, Prescription::Uniform(2, 2));
    const auto a = RolloutPopulation(MeanFieldState({0.5, 0.5}), atlas, env, opt);
    const auto b = RolloutPopulation(MeanFieldState({0.5, 0.5}), atlas, env, opt);
    CHECK(a.counts == b.counts);
    CHECK(a.mean_return == b.mean_return);
    CHECK(a.counts[0] == std::vector<int>{1, 0});  // ties go to the lower type
    for (const auto& c : a.counts) CHECK(c[0] + c[1] == 1);
  }
  SUBCASE("a lone repairing agent earns the hand-computed return") {
    RolloutOptions opt;
    opt.n_agents = 1;
    const auto r = RolloutPopulation(MeanFieldState({0.0, 1.0}),
                                     Constant(grid, 10, kAlwaysRepair), env, opt);
    double expected = -(0.2 + 1.0) - 0.5;
    for (int t = 2; t <= 10; ++t) expected += std::pow(0.9, t - 1) * -0.5;
    CHECK(r.mean_return == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.counts[1] == std::vector<int>{1, 0});
  }
  SUBCASE("initial counts round by largest remainder") {
    RolloutOptions opt;
    opt.n_agents = 7;
    const auto atlas = Constant(grid, 10, kNeverRepair);
    const auto r = RolloutPopulation(MeanFieldState({0.3, 0.7}), atlas, env, opt);
    CHECK(r.counts[0] == std::vector<int>{2, 5});
    CHECK(r.empirical_z[0][1] == doctest::Approx(5.0 / 7.0));
  }
  SUBCASE("never repair infects nine in ten per stage") {
    RolloutOptions opt;
    opt.seed = 2;
    const auto r = RolloutPopulation(MeanFieldState({1.0, 0.0}),
                                     Constant(grid, 10, kNeverRepair), env, opt);
    CHECK(std::abs(r.empirical_z[1][1] - 0.9) <= 0.01);
    CHECK(r.return_ci > 0.0);
  }
}

TEST_CASE("large populations follow the statistical flow") {
  const EnvModel env = testing::Malware();
  const auto grid = BuildGrid(2, 50);
  const Solution sol = BackwardSolve(env, grid, {});
  const MeanFieldState z1({0.7, 0.3});
  RolloutOptions opt;
  opt.n_agents = 10000;
  const double bound = 3.0 / std::sqrt(opt.n_agents);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    opt.seed = seed;
    const auto r = RolloutPopulation(z1, sol.atlas, env, opt);
    REQUIRE(r.empirical_z.size() == r.statistical_z.size());
    for (size_t t = 0; t < r.statistical_z.size(); ++t) {
      const double gap = SupNorm(r.empirical_z[t].probs(), r.statistical_z[t].probs());
      CHECK(gap <= bound);
      CHECK(gap <= 0.02);
    }
  }
}

TEST_CASE("tagged agent value matches the solved values") {
  const EnvModel env = testing::Malware(20);
  const auto grid = BuildGrid(2, 50);
  const Solution sol = BackwardSolve(env, grid, {});
  for (size_t g : {0, 20, 45}) {
    for (int x = 0; x < 2; ++x) {
      const auto mc = TaggedAgentValue(grid->Point(g), x, sol.atlas, env, 20000, 5 + g);
      CHECK(mc.episodes == 20000);
      CHECK(std::abs(mc.mean - sol.tables[0].v(g, x)) <= mc.ci + 2e-3);
    }
  }
  const auto once = TaggedAgentValue(grid->Point(3), 1, sol.atlas, env, 500, 1, 1);
  const auto again = TaggedAgentValue(grid->Point(3), 1, sol.atlas, env, 500, 1, 4);
  CHECK(once.mean == again.mean);
}

TEST_CASE("exploitability") {
  const EnvModel env = testing::Malware();
  SUBCASE("equilibria are nearly unexploitable and refine with the grid") {
    auto coarse_grid = BuildGrid(2, 25);
    auto fine_grid = BuildGrid(2, 100);
    const double coarse = Exploitability(BackwardSolve(env, coarse_grid, {}).atlas, env).max_gap;
    const double fine = Exploitability(BackwardSolve(env, fine_grid, {}).atlas, env).max_gap;
    CHECK(fine <= 5e-3);
    CHECK(fine <= coarse);
  }
  SUBCASE("uniform play is exploitable") {
    const auto grid = BuildGrid(2, 10);
    const auto report = Exploitability(Constant(grid, 60, Prescription::Uniform(2, 2)), env);
    CHECK(report.max_gap > 0.1);
    REQUIRE(report.gaps.size() == 60 * 11 * 2);
    CHECK(report.gaps[0].t == 1);
    CHECK(report.gaps[1].x == 1);
    for (const auto& e : report.gaps) CHECK(e.gap >= 0.0);
  }
  SUBCASE("single-stage best response has no gap") {
    const EnvModel one = testing::Malware(1);
    const auto grid = BuildGrid(2, 10);
    const auto report = Exploitability(BackwardSolve(one, grid, {}).atlas, one);
    CHECK(report.max_gap <= 1e-12);
  }
}

TEST_CASE("atlas distance") {
  const auto grid = BuildGrid(2, 6);
  const auto never = Constant(grid, 3, kNeverRepair);
  const auto always = Constant(grid, 3, kAlwaysRepair);
  const auto uniform = Constant(grid, 3, Prescription::Uniform(2, 2));
  CHECK(AtlasDistance(never, never, 1) == 0.0);
  CHECK(AtlasDistance(never, always, 2) == doctest::Approx(1.0));
  CHECK(AtlasDistance(never, uniform, 3) == doctest::Approx(0.5));
  std::mt19937_64 rng(12);
  for (int k = 0; k < 20; ++k) {
    const auto a = Random(grid, 3, rng);
    const auto b = Random(grid, 3, rng);
    const auto c = Random(grid, 3, rng);
    for (int t = 1; t <= 3; ++t) {
      const double ab = AtlasDistance(a, b, t);
      CHECK(ab == AtlasDistance(b, a, t));
      CHECK(ab <= AtlasDistance(a, c, t) + AtlasDistance(c, b, t) + 1e-12);
      CHECK(ab <= 1.0);
    }
  }
}

}  // namespace
}  // namespace mfgrl
