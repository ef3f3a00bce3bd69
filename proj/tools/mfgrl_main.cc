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


// mfgrl: solve, evaluate and compare mean-field equilibria from a YAML
// experiment config.
//
// Exit status: 0 success; 1 a stage did not converge or a configured
// threshold was exceeded; 2 bad command line or config; 3 unknown
// environment; 4 output not writable; 5 missing or malformed input
// artifacts; 6 any other failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "experiment_config.h"
#include "mfgrl/csv_io.h"
#include "mfgrl/environment.h"
#include "mfgrl/evaluation.h"
#include "mfgrl/exact_solver.h"
#include "mfgrl/rl_solver.h"
#include "mfgrl/simplex_grid.h"

namespace fs = std::filesystem;

namespace mfgrl {
namespace {

enum ExitCode {
  kOk = 0,
  kFailed = 1,
  kConfigError = 2,
  kUnknownEnvironment = 3,
  kOutputError = 4,
  kInputError = 5,
  kOtherError = 6,
};

constexpr char kOutDirEnv[] = "MFGRL_OUT_DIR";

class InputError : public MfgError {
 public:
  using MfgError::MfgError;
};

struct Options {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::string eval_solver;
  std::string compare_a = "exact";
  std::string compare_b = "rl";
};

fs::path OutputDir(const Options& opts, const ExperimentConfig& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "out";
}

EnvModel BuildEnv(const ExperimentConfig& cfg) {
  try {
    return MakeEnvironment(cfg.env_name, cfg.env_params, cfg.horizon);
  } catch (const UnknownEnvironmentError&) {
    throw;
  } catch (const MfgError& e) {
    throw ConfigError("config field 'environment' (line " +
                      std::to_string(cfg.env_line) + "): " + e.what());
  }
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       since)
      .count();
}

void WriteSolution(const fs::path& dir, const Solution& sol) {
  WriteFileAtomic(dir / "atlas.csv",
                  [&](std::ostream& out) { WriteAtlasCsv(out, sol.atlas); });
  WriteFileAtomic(dir / "values.csv",
                  [&](std::ostream& out) { WriteValuesCsv(out, sol.tables); });
  WriteFileAtomic(dir / "diagnostics.csv", [&](std::ostream& out) {
    WriteDiagnosticsCsv(out, sol.diagnostics);
  });
}

int ReportSolve(const char* name, const Solution& sol, const fs::path& dir,
                double seconds) {
  const auto failed = sol.diagnostics.NonConverged();
  double worst_residual = 0.0;
  for (const StageRecord& r : sol.diagnostics.records) {
    worst_residual = std::max(worst_residual, r.residual);
  }
  std::cout << name << ": " << sol.diagnostics.records.size()
            << " stage points, " << failed.size() << " not converged, "
            << "max fixed-point residual " << worst_residual << ", "
            << seconds << " s\n";
  if (!sol.diagnostics.non_unique.empty()) {
    std::cout << name << ": " << sol.diagnostics.non_unique.size()
              << " stage points with more than one fixed point\n";
  }
  for (size_t i = 0; i < std::min<size_t>(failed.size(), 5); ++i) {
    std::cout << "  not converged: t=" << failed[i].t
              << " z_index=" << failed[i].z_index
              << " change=" << failed[i].policy_change << "\n";
  }
  std::cout << name << ": wrote " << dir.string() << "\n";
  return failed.empty() ? kOk : kFailed;
}

int RunSolveExact(const Options& opts, ExperimentConfig cfg) {
  const EnvModel env = BuildEnv(cfg);
  cfg.fixed_point.threads = opts.threads;
  const auto start = std::chrono::steady_clock::now();
  const Solution sol =
      BackwardSolve(env, BuildGrid(env.n_types, cfg.resolution), cfg.fixed_point);
  const fs::path dir = OutputDir(opts, cfg) / "exact";
  WriteSolution(dir, sol);
  return ReportSolve("solve-exact", sol, dir, Seconds(start));
}

int RunSolveRl(const Options& opts, ExperimentConfig cfg) {
  const EnvModel env = BuildEnv(cfg);
  cfg.rl.threads = opts.threads;
  const auto start = std::chrono::steady_clock::now();
  const Solution sol =
      RlBackwardSolve(env, BuildGrid(env.n_types, cfg.resolution), cfg.rl);
  const fs::path dir = OutputDir(opts, cfg) / "rl";
  WriteSolution(dir, sol);
  return ReportSolve("solve-rl", sol, dir, Seconds(start));
}

std::ifstream OpenInput(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot read " + path.string() +
                     " (run the matching solve command first)");
  }
  return in;
}

PolicyAtlas LoadAtlas(const fs::path& dir, const ExperimentConfig& cfg,
                      const EnvModel& env) {
  std::ifstream in = OpenInput(dir / "atlas.csv");
  try {
    PolicyAtlas atlas = ReadAtlasCsv(in);
    if (atlas.grid().Resolution() != cfg.resolution ||
        atlas.Horizon() != env.horizon || atlas.NumTypes() != env.n_types ||
        atlas.NumActions() != env.n_actions) {
      throw InputError((dir / "atlas.csv").string() +
                       " does not match the config (grid, horizon or sizes)");
    }
    return atlas;
  } catch (const CsvError& e) {
    throw InputError((dir / "atlas.csv").string() + ": " + e.what());
  }
}

std::vector<StageTables> LoadValues(const fs::path& dir, int n_actions) {
  std::ifstream in = OpenInput(dir / "values.csv");
  try {
    return ReadValuesCsv(in, n_actions);
  } catch (const CsvError& e) {
    throw InputError((dir / "values.csv").string() + ": " + e.what());
  }
}

int RunEvaluate(const Options& opts, const ExperimentConfig& cfg) {
  const EnvModel env = BuildEnv(cfg);
  const std::string solver =
      opts.eval_solver.empty() ? cfg.evaluation.solver : opts.eval_solver;
  const fs::path dir = OutputDir(opts, cfg) / solver;
  const PolicyAtlas atlas = LoadAtlas(dir, cfg, env);

  const ExploitabilityReport expl = Exploitability(atlas, env, opts.threads);
  const MeanFieldState z1 =
      cfg.evaluation.initial_state.empty()
          ? MeanFieldState::Uniform(env.n_types)
          : MeanFieldState(cfg.evaluation.initial_state);
  if (z1.NumTypes() != env.n_types) {
    throw ConfigError("config field 'evaluation.initial_state': expected " +
                      std::to_string(env.n_types) + " entries");
  }
  RolloutOptions ro;
  ro.n_agents = cfg.evaluation.n_agents;
  ro.seed = cfg.seed;
  ro.condition_on_statistical = cfg.evaluation.condition_on_statistical;
  const TrajectoryReport traj = RolloutPopulation(z1, atlas, env, ro);

  WriteFileAtomic(dir / "exploitability.csv", [&](std::ostream& out) {
    WriteExploitabilityCsv(out, expl);
  });
  WriteFileAtomic(dir / "trajectory.csv", [&](std::ostream& out) {
    WriteTrajectoryCsv(out, traj.statistical_z, traj.empirical_z);
  });
  double drift = 0.0;
  for (size_t t = 0; t < traj.statistical_z.size(); ++t) {
    drift = std::max(drift, SupNorm(traj.statistical_z[t].probs(),
                                    traj.empirical_z[t].probs()));
  }
  std::cout << "evaluate " << solver << ": max exploitability "
            << expl.max_gap << "\n"
            << "evaluate " << solver << ": " << traj.n_agents
            << " agents, mean discounted return " << traj.mean_return
            << " +- " << traj.return_ci << " (99%), max |z_emp - z_stat| "
            << drift << "\n"
            << "evaluate " << solver << ": wrote " << dir.string() << "\n";
  const auto& limit = cfg.thresholds.max_exploitability;
  if (limit && expl.max_gap > *limit) {
    std::cout << "evaluate " << solver << ": exploitability above "
              << *limit << "\n";
    return kFailed;
  }
  return kOk;
}

int RunCompare(const Options& opts, const ExperimentConfig& cfg) {
  const EnvModel env = BuildEnv(cfg);
  const fs::path root = OutputDir(opts, cfg);
  const PolicyAtlas a = LoadAtlas(root / opts.compare_a, cfg, env);
  const PolicyAtlas b = LoadAtlas(root / opts.compare_b, cfg, env);
  const auto va = LoadValues(root / opts.compare_a, env.n_actions);
  const auto vb = LoadValues(root / opts.compare_b, env.n_actions);
  if (va.size() != static_cast<size_t>(env.horizon) || vb.size() != va.size() ||
      va.front().NumGrid() != a.grid().size() ||
      vb.front().NumGrid() != a.grid().size()) {
    throw InputError("values.csv does not match atlas.csv");
  }
  std::vector<CompareRow> rows;
  for (int t = 1; t <= env.horizon; ++t) {
    CompareRow row{t, AtlasDistance(a, b, t), 0.0};
    for (size_t g = 0; g < a.grid().size(); ++g) {
      for (int x = 0; x < env.n_types; ++x) {
        row.max_value_diff = std::max(
            row.max_value_diff, std::abs(va[t - 1].v(g, x) - vb[t - 1].v(g, x)));
      }
    }
    rows.push_back(row);
  }
  const fs::path path = root / "compare.csv";
  WriteFileAtomic(path, [&](std::ostream& out) { WriteCompareCsv(out, rows); });

  const int stage = cfg.thresholds.stage;
  const CompareRow& r = rows[stage - 1];
  double worst_distance = 0.0, worst_value = 0.0;
  for (const CompareRow& row : rows) {
    worst_distance = std::max(worst_distance, row.atlas_distance);
    worst_value = std::max(worst_value, row.max_value_diff);
  }
  std::cout << "compare " << opts.compare_a << " " << opts.compare_b
            << ": stage " << stage << " atlas distance " << r.atlas_distance
            << ", max value difference " << r.max_value_diff << "\n"
            << "compare " << opts.compare_a << " " << opts.compare_b
            << ": over all stages " << worst_distance << " and "
            << worst_value << "\n"
            << "compare: wrote " << path.string() << "\n";
  bool ok = true;
  if (cfg.thresholds.max_atlas_distance &&
      r.atlas_distance > *cfg.thresholds.max_atlas_distance) {
    std::cout << "compare: atlas distance above "
              << *cfg.thresholds.max_atlas_distance << "\n";
    ok = false;
  }
  if (cfg.thresholds.max_value_diff &&
      r.max_value_diff > *cfg.thresholds.max_value_diff) {
    std::cout << "compare: value difference above "
              << *cfg.thresholds.max_value_diff << "\n";
    ok = false;
  }
  return ok ? kOk : kFailed;
}

int RunExport(const Options& opts, const ExperimentConfig& cfg) {
  const EnvModel env = BuildEnv(cfg);
  const fs::path root = OutputDir(opts, cfg);
  const auto grid = BuildGrid(env.n_types, cfg.resolution);
  WriteFileAtomic(root / "grid.csv",
                  [&](std::ostream& out) { WriteGridCsv(out, *grid); });
  WriteFileAtomic(root / "config.yaml",
                  [&](std::ostream& out) { out << EmitConfig(cfg); });
  std::cout << "export: wrote " << (root / "grid.csv").string() << " and "
            << (root / "config.yaml").string() << "\n";
  return kOk;
}

}  // namespace
}  // namespace mfgrl

int main(int argc, char** argv) {
  using namespace mfgrl;
  CLI::App app{"Mean-field equilibrium solvers for finite-horizon games"};
  app.require_subcommand(0, 1);
  Options opts;
  bool print_default = false;
  app.add_flag("--print-default-config", print_default,
               "Print the shipped malware experiment config and exit");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opts.config_path, "Experiment config (YAML)")
        ->required();
    sub->add_option("-o,--out", opts.out_dir,
                    std::string("Output directory (default: config "
                                "output_dir, then $") +
                        kOutDirEnv + ", then ./out)");
    sub->add_option("-j,--threads", opts.threads,
                    "Worker threads; 0 uses every hardware thread")
        ->check(CLI::NonNegativeNumber);
  };
  CLI::App* solve_exact =
      app.add_subcommand("solve-exact", "Backward recursion with the kernel");
  CLI::App* solve_rl = app.add_subcommand(
      "solve-rl", "Backward recursion with Expected Sarsa and policy gradient");
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Exploitability and population rollout of a solved atlas");
  CLI::App* compare = app.add_subcommand(
      "compare", "Per-stage atlas distance and value gap of two solutions");
  CLI::App* exporter = app.add_subcommand(
      "export", "Write the grid and the resolved config");
  for (CLI::App* sub : {solve_exact, solve_rl, evaluate, compare, exporter}) {
    add_common(sub);
  }
  evaluate->add_option("--solver", opts.eval_solver,
                       "Which solution to evaluate (default from config)")
      ->check(CLI::IsMember({"exact", "rl"}));
  compare->add_option("first", opts.compare_a, "First solution (exact|rl)")
      ->check(CLI::IsMember({"exact", "rl"}));
  compare->add_option("second", opts.compare_b, "Second solution (exact|rl)")
      ->check(CLI::IsMember({"exact", "rl"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (print_default) {
    std::cout << kDefaultConfig;
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kConfigError;
  }

  try {
    const ExperimentConfig cfg = LoadConfig(opts.config_path);
    if (solve_exact->parsed()) return RunSolveExact(opts, cfg);
    if (solve_rl->parsed()) return RunSolveRl(opts, cfg);
    if (evaluate->parsed()) return RunEvaluate(opts, cfg);
    if (compare->parsed()) return RunCompare(opts, cfg);
    return RunExport(opts, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnknownEnvironmentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnknownEnvironment;
  } catch (const OutputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOutputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOtherError;
  }
}
