# Copyright 2026 The mfgrl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Mean-field equilibria of finite-horizon discrete games.

Thin wrapper over the compiled ``_mfgrl`` extension.
"""

from ._mfgrl import (
    Environment,
    FixedPointConfig,
    MfgError,
    CsvError,
    PolicyAtlas,
    RlConfig,
    SimplexGrid,
    Solution,
    UnknownEnvironmentError,
    atlas_distance,
    build_grid,
    environment_names,
    exploitability,
    make_environment,
    policy_gradient,
    policy_objective,
    read_atlas_csv,
    rollout,
    solve_exact,
    solve_rl,
    statistical_trajectory,
    tagged_agent_value,
)

__all__ = [
    "Environment",
    "FixedPointConfig",
    "MfgError",
    "CsvError",
    "PolicyAtlas",
    "RlConfig",
    "SimplexGrid",
    "Solution",
    "UnknownEnvironmentError",
    "atlas_distance",
    "build_grid",
    "environment_names",
    "exploitability",
    "make_environment",
    "policy_gradient",
    "policy_objective",
    "read_atlas_csv",
    "rollout",
    "solve_exact",
    "solve_rl",
    "statistical_trajectory",
    "tagged_agent_value",
]
