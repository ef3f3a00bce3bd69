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


// Python bindings. Tables come back as numpy arrays; configs are plain
// attribute bags mirroring the C++ structs.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "mfgrl/csv_io.h"
#include "mfgrl/environment.h"
#include "mfgrl/evaluation.h"
#include "mfgrl/exact_solver.h"
#include "mfgrl/rl_solver.h"

namespace py = pybind11;

namespace mfgrl {
namespace {

using Array = py::array_t<double>;

Array ToArray(std::vector<py::ssize_t> shape, std::span<const double> data) {
  Array out(shape);
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

QSlice QFromArray(const py::array_t<double, py::array::c_style | py::array::forcecast>& q) {
  if (q.ndim() != 2) throw MfgError("q must be a 2-d array (types x actions)");
  QSlice out(static_cast<int>(q.shape(0)), static_cast<int>(q.shape(1)));
  std::copy(q.data(), q.data() + q.size(), out.values.begin());
  return out;
}

Array AtlasArray(const PolicyAtlas& atlas) {
  const auto n_grid = static_cast<py::ssize_t>(atlas.grid().size());
  std::vector<double> data;
  for (int t = 1; t <= atlas.Horizon(); ++t) {
    for (size_t g = 0; g < atlas.grid().size(); ++g) {
      const auto p = atlas.At(t, g).data();
      data.insert(data.end(), p.begin(), p.end());
    }
  }
  return ToArray({atlas.Horizon(), n_grid, atlas.NumTypes(), atlas.NumActions()}, data);
}

Array PrescriptionArray(const Prescription& p) {
  return ToArray({p.NumTypes(), p.NumActions()}, p.data());
}

Array FlowArray(const std::vector<MeanFieldState>& flow) {
  std::vector<double> data;
  for (const auto& z : flow) data.insert(data.end(), z.probs().begin(), z.probs().end());
  const py::ssize_t n_types = flow.empty() ? 0 : flow.front().NumTypes();
  return ToArray({static_cast<py::ssize_t>(flow.size()), n_types}, data);
}

}  // namespace
}  // namespace mfgrl

PYBIND11_MODULE(_mfgrl, m) {
  using namespace mfgrl;
  m.doc() = "Finite-horizon mean-field equilibria by backward recursion";

  auto base = py::register_exception<MfgError>(m, "MfgError", PyExc_ValueError);
  py::register_exception<UnknownEnvironmentError>(m, "UnknownEnvironmentError", base.ptr());
  py::register_exception<CsvError>(m, "CsvError", base.ptr());

  py::class_<EnvModel>(m, "Environment")
      .def_readonly("name", &EnvModel::name)
      .def_readonly("n_types", &EnvModel::n_types)
      .def_readonly("n_actions", &EnvModel::n_actions)
      .def_readonly("discount", &EnvModel::discount)
      .def_readonly("horizon", &EnvModel::horizon)
      .def_property_readonly("has_kernel", &EnvModel::HasKernel)
      .def(
          "reward",
          [](const EnvModel& env, int x, int a, std::vector<double> z) {
            return env.reward(x, a, MeanFieldState(std::move(z)));
          },
          py::arg("x"), py::arg("a"), py::arg("z"))
      .def(
          "kernel_row",
          [](const EnvModel& env, int x, int a, std::vector<double> z) {
            return env.KernelRow(x, a, MeanFieldState(std::move(z)));
          },
          py::arg("x"), py::arg("a"), py::arg("z"));

  m.def(
      "make_environment",
      [](const std::string& name, const EnvParams& params, int horizon) {
        return MakeEnvironment(name, params, horizon);
      },
      py::arg("name"), py::arg("params") = EnvParams{}, py::arg("horizon") = 60);
  m.def("environment_names", &EnvironmentNames);

  py::class_<SimplexGrid, std::shared_ptr<SimplexGrid>>(m, "SimplexGrid")
      .def_property_readonly("n_types", &SimplexGrid::NumTypes)
      .def_property_readonly("resolution", &SimplexGrid::Resolution)
      .def("__len__", &SimplexGrid::size)
      .def("points", [](const SimplexGrid& g) { return FlowArray(g.Points()); });
  m.def(
      "build_grid",
      [](int n_types, int resolution) {
        return std::const_pointer_cast<SimplexGrid>(BuildGrid(n_types, resolution));
      },
      py::arg("n_types"), py::arg("resolution"));

  py::class_<FixedPointConfig>(m, "FixedPointConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &FixedPointConfig::max_iters)
      .def_readwrite("tol", &FixedPointConfig::tol)
      .def_readwrite("damping", &FixedPointConfig::damping)
      .def_readwrite("tie_tolerance", &FixedPointConfig::tie_tolerance)
      .def_readwrite("restarts", &FixedPointConfig::restarts)
      .def_readwrite("seed", &FixedPointConfig::seed)
      .def_readwrite("threads", &FixedPointConfig::threads);

  py::class_<RlConfig>(m, "RlConfig")
      .def(py::init<>())
      .def_readwrite("batch_size", &RlConfig::batch_size)
      .def_readwrite("policy_iters", &RlConfig::policy_iters)
      .def_readwrite("sarsa_alpha", &RlConfig::sarsa_alpha)
      .def_readwrite("pg_steps", &RlConfig::pg_steps)
      .def_readwrite("pg_lr", &RlConfig::pg_lr)
      .def_readwrite("adaptive_lr", &RlConfig::adaptive_lr)
      .def_readwrite("seed", &RlConfig::seed)
      .def_readwrite("q_init", &RlConfig::q_init)
      .def_readwrite("tail_average", &RlConfig::tail_average)
      .def_readwrite("next_state_samples", &RlConfig::next_state_samples)
      .def_readwrite("tol", &RlConfig::tol)
      .def_readwrite("threads", &RlConfig::threads);

  py::class_<PolicyAtlas>(m, "PolicyAtlas")
      .def_property_readonly("horizon", &PolicyAtlas::Horizon)
      .def_property_readonly("n_types", &PolicyAtlas::NumTypes)
      .def_property_readonly("n_actions", &PolicyAtlas::NumActions)
      .def_property_readonly("resolution",
                             [](const PolicyAtlas& a) { return a.grid().Resolution(); })
      .def(
          "at", [](const PolicyAtlas& a, int t, size_t g) { return PrescriptionArray(a.At(t, g)); },
          py::arg("t"), py::arg("z_index"))
      .def(
          "lookup",
          [](const PolicyAtlas& a, int t, std::vector<double> z) {
            return PrescriptionArray(a.Lookup(t, MeanFieldState(std::move(z))));
          },
          py::arg("t"), py::arg("z"))
      .def("to_array", &AtlasArray, "Prescriptions as a (T, G, N_x, N_a) array.")
      .def("to_csv", [](const PolicyAtlas& a) {
        std::ostringstream out;
        WriteAtlasCsv(out, a);
        return out.str();
      });
  m.def(
      "read_atlas_csv",
      [](const std::string& text) {
        std::istringstream in(text);
        return ReadAtlasCsv(in);
      },
      py::arg("text"));

  py::class_<Solution>(m, "Solution")
      .def_readonly("atlas", &Solution::atlas)
      .def("values", [](const Solution& s) {
        const StageTables& first = s.tables.front();
        std::vector<double> data;
        for (const StageTables& st : s.tables) {
          for (size_t g = 0; g < st.NumGrid(); ++g) {
            for (int x = 0; x < st.NumTypes(); ++x) data.push_back(st.v(g, x));
          }
        }
        return ToArray({static_cast<py::ssize_t>(s.tables.size()),
                        static_cast<py::ssize_t>(first.NumGrid()), first.NumTypes()},
                       data);
      }, "State values as a (T, G, N_x) array.")
      .def("action_values", [](const Solution& s) {
        const StageTables& first = s.tables.front();
        std::vector<double> data;
        for (const StageTables& st : s.tables) {
          for (size_t g = 0; g < st.NumGrid(); ++g) {
            const QSlice q = st.QAt(g);
            data.insert(data.end(), q.values.begin(), q.values.end());
          }
        }
        return ToArray({static_cast<py::ssize_t>(s.tables.size()),
                        static_cast<py::ssize_t>(first.NumGrid()), first.NumTypes(),
                        first.NumActions()},
                       data);
      }, "Action values as a (T, G, N_x, N_a) array.")
      .def_property_readonly("n_not_converged",
                             [](const Solution& s) { return s.diagnostics.NonConverged().size(); })
      .def_property_readonly("max_residual", [](const Solution& s) {
        double worst = 0.0;
        for (const StageRecord& r : s.diagnostics.records) worst = std::max(worst, r.residual);
        return worst;
      });

  m.def(
      "solve_exact",
      [](const EnvModel& env, int resolution, const FixedPointConfig& cfg) {
        return BackwardSolve(env, BuildGrid(env.n_types, resolution), cfg);
      },
      py::arg("env"), py::arg("resolution"), py::arg("config") = FixedPointConfig{},
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_rl",
      [](const EnvModel& env, int resolution, const RlConfig& cfg) {
        return RlBackwardSolve(env, BuildGrid(env.n_types, resolution), cfg);
      },
      py::arg("env"), py::arg("resolution"), py::arg("config") = RlConfig{},
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "exploitability",
      [](const PolicyAtlas& atlas, const EnvModel& env, int threads) {
        ExploitabilityReport r;
        {
          py::gil_scoped_release release;
          r = Exploitability(atlas, env, threads);
        }
        std::vector<double> gaps;
        for (const auto& e : r.gaps) gaps.push_back(e.gap);
        const auto n_grid = static_cast<py::ssize_t>(atlas.grid().size());
        return py::make_tuple(r.max_gap,
                              ToArray({atlas.Horizon(), n_grid, atlas.NumTypes()}, gaps));
      },
      py::arg("atlas"), py::arg("env"), py::arg("threads") = 0,
      "Returns (max_gap, gaps) with gaps shaped (T, G, N_x).");
  m.def(
      "statistical_trajectory",
      [](std::vector<double> z1, const PolicyAtlas& atlas, const EnvModel& env) {
        return FlowArray(StatisticalTrajectory(MeanFieldState(std::move(z1)), atlas, env));
      },
      py::arg("z1"), py::arg("atlas"), py::arg("env"));
  m.def(
      "rollout",
      [](std::vector<double> z1, const PolicyAtlas& atlas, const EnvModel& env, int n_agents,
         uint64_t seed, bool condition_on_statistical) {
        RolloutOptions opt{n_agents, seed, condition_on_statistical};
        TrajectoryReport r;
        {
          py::gil_scoped_release release;
          r = RolloutPopulation(MeanFieldState(std::move(z1)), atlas, env, opt);
        }
        py::dict out;
        out["statistical"] = FlowArray(r.statistical_z);
        out["empirical"] = FlowArray(r.empirical_z);
        out["mean_return"] = r.mean_return;
        out["return_ci"] = r.return_ci;
        return out;
      },
      py::arg("z1"), py::arg("atlas"), py::arg("env"), py::arg("n_agents") = 10000,
      py::arg("seed") = 0, py::arg("condition_on_statistical") = false);
  m.def(
      "tagged_agent_value",
      [](std::vector<double> z1, int x, const PolicyAtlas& atlas, const EnvModel& env,
         int episodes, uint64_t seed) {
        MonteCarloEstimate e;
        {
          py::gil_scoped_release release;
          e = TaggedAgentValue(MeanFieldState(std::move(z1)), x, atlas, env, episodes, seed);
        }
        return py::make_tuple(e.mean, e.ci);
      },
      py::arg("z1"), py::arg("x"), py::arg("atlas"), py::arg("env"), py::arg("episodes"),
      py::arg("seed") = 0, "Returns (mean, 99% CI half-width).");
  m.def("atlas_distance", &AtlasDistance, py::arg("a"), py::arg("b"), py::arg("t"));

  m.def(
      "policy_objective",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
         std::vector<double> logits) { return PolicyObjective(QFromArray(q), logits); },
      py::arg("q"), py::arg("logits"));
  m.def(
      "policy_gradient",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& q,
         std::vector<double> logits) {
        const QSlice qs = QFromArray(q);
        if (logits.size() != qs.values.size()) throw MfgError("logits and q differ in size");
        return ToArray({qs.n_types, qs.n_actions}, PolicyGradient(qs, logits));
      },
      py::arg("q"), py::arg("logits"));
}
