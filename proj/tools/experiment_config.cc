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


#include "experiment_config.h"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mfgrl {
namespace {

int LineOf(const YAML::Node& node) { return node.Mark().line + 1; }

[[noreturn]] void Fail(const std::string& field, const YAML::Node& node,
                       const std::string& what) {
  throw ConfigError("config field '" + field + "' (line " +
                    std::to_string(LineOf(node)) + "): " + what);
}

void RequireMap(const YAML::Node& node, const std::string& field,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) Fail(field, node, "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string path = field.empty() ? key : field + "." + key;
      Fail(path, kv.first, "unknown key");
    }
  }
}

std::string Join(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

template <typename T>
T Scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) Fail(field, node, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    Fail(field, node, "cannot read '" + node.Scalar() + "'");
  }
}

template <typename T>
void Read(const YAML::Node& map, const std::string& section,
          const std::string& key, T& out) {
  const YAML::Node node = map[key];
  if (node) out = Scalar<T>(node, Join(section, key));
}

void Check(bool ok, const YAML::Node& map, const std::string& section,
           const std::string& key, const std::string& what) {
  if (ok) return;
  const YAML::Node node = map[key];
  Fail(Join(section, key), node ? node : map, what);
}

void ReadOptional(const YAML::Node& map, const std::string& section,
                  const std::string& key, std::optional<double>& out) {
  const YAML::Node node = map[key];
  if (!node) return;
  out = Scalar<double>(node, Join(section, key));
  Check(*out >= 0.0 && std::isfinite(*out), map, section, key,
        "must be a finite value >= 0");
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config syntax error (line " +
                      std::to_string(e.mark.line + 1) + "): " + e.msg);
  }
  ExperimentConfig cfg;
  if (!root || root.IsNull()) throw ConfigError("config is empty");
  RequireMap(root, "",
             {"environment", "horizon", "grid", "seed", "output_dir",
              "fixed_point", "rl", "evaluation", "thresholds"});

  const YAML::Node env = root["environment"];
  if (!env) Fail("environment", root, "missing section");
  RequireMap(env, "environment", {"name", "params"});
  cfg.env_line = LineOf(env);
  Read(env, "environment", "name", cfg.env_name);
  if (const YAML::Node params = env["params"]) {
    if (!params.IsMap()) Fail("environment.params", params, "expected a mapping");
    for (const auto& kv : params) {
      const std::string key = kv.first.as<std::string>();
      const double v = Scalar<double>(kv.second, "environment.params." + key);
      if (!std::isfinite(v)) {
        Fail("environment.params." + key, kv.second, "must be finite");
      }
      cfg.env_params[key] = v;
    }
  }

  Read(root, "", "horizon", cfg.horizon);
  Check(cfg.horizon >= 1, root, "", "horizon", "must be >= 1");
  if (const YAML::Node grid = root["grid"]) {
    RequireMap(grid, "grid", {"resolution"});
    Read(grid, "grid", "resolution", cfg.resolution);
    Check(cfg.resolution >= 1, grid, "grid", "resolution", "must be >= 1");
  }
  Read(root, "", "seed", cfg.seed);
  Read(root, "", "output_dir", cfg.output_dir);

  if (const YAML::Node fp = root["fixed_point"]) {
    const std::string s = "fixed_point";
    RequireMap(fp, s, {"max_iters", "tol", "damping", "tie_tolerance",
                       "restarts"});
    FixedPointConfig& c = cfg.fixed_point;
    Read(fp, s, "max_iters", c.max_iters);
    Read(fp, s, "tol", c.tol);
    Read(fp, s, "damping", c.damping);
    Read(fp, s, "tie_tolerance", c.tie_tolerance);
    Read(fp, s, "restarts", c.restarts);
    Check(c.max_iters >= 1, fp, s, "max_iters", "must be >= 1");
    Check(c.tol > 0.0, fp, s, "tol", "must be > 0");
    Check(c.damping > 0.0 && c.damping <= 1.0, fp, s, "damping",
          "must lie in (0, 1]");
    Check(c.tie_tolerance >= 0.0, fp, s, "tie_tolerance", "must be >= 0");
    Check(c.restarts >= 0, fp, s, "restarts", "must be >= 0");
  }

  if (const YAML::Node rl = root["rl"]) {
    const std::string s = "rl";
    RequireMap(rl, s, {"batch_size", "policy_iters", "sarsa_alpha", "pg_steps",
                       "pg_lr", "adaptive_lr", "q_init", "tail_average",
                       "next_state_samples", "tol"});
    RlConfig& c = cfg.rl;
    Read(rl, s, "batch_size", c.batch_size);
    Read(rl, s, "policy_iters", c.policy_iters);
    Read(rl, s, "sarsa_alpha", c.sarsa_alpha);
    Read(rl, s, "pg_steps", c.pg_steps);
    Read(rl, s, "pg_lr", c.pg_lr);
    Read(rl, s, "adaptive_lr", c.adaptive_lr);
    Read(rl, s, "q_init", c.q_init);
    Read(rl, s, "tail_average", c.tail_average);
    Read(rl, s, "next_state_samples", c.next_state_samples);
    Read(rl, s, "tol", c.tol);
    Check(c.batch_size >= 1, rl, s, "batch_size", "must be >= 1");
    Check(c.policy_iters >= 1, rl, s, "policy_iters", "must be >= 1");
    Check(c.sarsa_alpha > 0.0 && c.sarsa_alpha <= 1.0, rl, s, "sarsa_alpha",
          "must lie in (0, 1]");
    Check(c.pg_steps >= 0, rl, s, "pg_steps", "must be >= 0");
    Check(c.pg_lr > 0.0, rl, s, "pg_lr", "must be > 0");
    Check(std::isfinite(c.q_init), rl, s, "q_init", "must be finite");
    Check(c.next_state_samples >= 1, rl, s, "next_state_samples",
          "must be >= 1");
    Check(c.tol > 0.0, rl, s, "tol", "must be > 0");
  }
  cfg.rl.seed = cfg.seed;
  cfg.fixed_point.seed = cfg.seed;

  if (const YAML::Node ev = root["evaluation"]) {
    const std::string s = "evaluation";
    RequireMap(ev, s, {"solver", "initial_state", "n_agents",
                       "condition_on_statistical"});
    EvaluationConfig& c = cfg.evaluation;
    Read(ev, s, "solver", c.solver);
    Check(c.solver == "exact" || c.solver == "rl", ev, s, "solver",
          "must be 'exact' or 'rl'");
    if (const YAML::Node z = ev["initial_state"]) {
      if (!z.IsSequence()) Fail("evaluation.initial_state", z, "expected a list");
      double total = 0.0;
      for (const auto& item : z) {
        const double p = Scalar<double>(item, "evaluation.initial_state");
        if (!(p >= 0.0)) Fail("evaluation.initial_state", item, "must be >= 0");
        c.initial_state.push_back(p);
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        Fail("evaluation.initial_state", z, "entries must sum to 1");
      }
    }
    Read(ev, s, "n_agents", c.n_agents);
    Check(c.n_agents >= 1, ev, s, "n_agents", "must be >= 1");
    Read(ev, s, "condition_on_statistical", c.condition_on_statistical);
  }

  if (const YAML::Node th = root["thresholds"]) {
    const std::string s = "thresholds";
    RequireMap(th, s, {"stage", "max_atlas_distance", "max_value_diff",
                       "max_exploitability"});
    Read(th, s, "stage", cfg.thresholds.stage);
    Check(cfg.thresholds.stage >= 1 && cfg.thresholds.stage <= cfg.horizon,
          th, s, "stage", "must lie in [1, horizon]");
    ReadOptional(th, s, "max_atlas_distance",
                 cfg.thresholds.max_atlas_distance);
    ReadOptional(th, s, "max_value_diff", cfg.thresholds.max_value_diff);
    ReadOptional(th, s, "max_exploitability",
                 cfg.thresholds.max_exploitability);
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string EmitConfig(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "environment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.env_name;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [key, v] : cfg.env_params) out << YAML::Key << key << YAML::Value << v;
  out << YAML::EndMap << YAML::EndMap;
  out << YAML::Key << "horizon" << YAML::Value << cfg.horizon;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap
      << YAML::Key << "resolution" << YAML::Value << cfg.resolution
      << YAML::EndMap;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  if (!cfg.output_dir.empty()) {
    out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  }
  const FixedPointConfig& fp = cfg.fixed_point;
  out << YAML::Key << "fixed_point" << YAML::Value << YAML::BeginMap
      << YAML::Key << "max_iters" << YAML::Value << fp.max_iters
      << YAML::Key << "tol" << YAML::Value << fp.tol
      << YAML::Key << "damping" << YAML::Value << fp.damping
      << YAML::Key << "tie_tolerance" << YAML::Value << fp.tie_tolerance
      << YAML::Key << "restarts" << YAML::Value << fp.restarts
      << YAML::EndMap;
  const RlConfig& rl = cfg.rl;
  out << YAML::Key << "rl" << YAML::Value << YAML::BeginMap
      << YAML::Key << "batch_size" << YAML::Value << rl.batch_size
      << YAML::Key << "policy_iters" << YAML::Value << rl.policy_iters
      << YAML::Key << "sarsa_alpha" << YAML::Value << rl.sarsa_alpha
      << YAML::Key << "pg_steps" << YAML::Value << rl.pg_steps
      << YAML::Key << "pg_lr" << YAML::Value << rl.pg_lr
      << YAML::Key << "adaptive_lr" << YAML::Value << rl.adaptive_lr
      << YAML::Key << "q_init" << YAML::Value << rl.q_init
      << YAML::Key << "tail_average" << YAML::Value << rl.tail_average
      << YAML::Key << "next_state_samples" << YAML::Value
      << rl.next_state_samples
      << YAML::Key << "tol" << YAML::Value << rl.tol << YAML::EndMap;
  const EvaluationConfig& ev = cfg.evaluation;
  out << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap
      << YAML::Key << "solver" << YAML::Value << ev.solver;
  if (!ev.initial_state.empty()) {
    out << YAML::Key << "initial_state" << YAML::Value << YAML::Flow
        << ev.initial_state;
  }
  out << YAML::Key << "n_agents" << YAML::Value << ev.n_agents
      << YAML::Key << "condition_on_statistical" << YAML::Value
      << ev.condition_on_statistical << YAML::EndMap;
  const Thresholds& th = cfg.thresholds;
  out << YAML::Key << "thresholds" << YAML::Value << YAML::BeginMap
      << YAML::Key << "stage" << YAML::Value << th.stage;
  if (th.max_atlas_distance) {
    out << YAML::Key << "max_atlas_distance" << YAML::Value
        << *th.max_atlas_distance;
  }
  if (th.max_value_diff) {
    out << YAML::Key << "max_value_diff" << YAML::Value << *th.max_value_diff;
  }
  if (th.max_exploitability) {
    out << YAML::Key << "max_exploitability" << YAML::Value
        << *th.max_exploitability;
  }
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace mfgrl
