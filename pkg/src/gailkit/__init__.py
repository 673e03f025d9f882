"""Occupancy-measure imitation learning: exact tabular tools and sampled GAIL.

Subpackages: ``envs`` (gridworld, cartpole, mountain car), ``policy_opt``
(MLP policies, GAE, TRPO), ``imitation`` (GAIL, FEM/GTAL, BC) and
``harness`` (sweeps, scoring, CLI). The tabular modules ``mdp``,
``soft_rl``, ``regularizers`` and ``irl_dual`` work on dense arrays.
"""
from gailkit.errors import ConvergenceError, InvalidMeasureError
from gailkit.mdp import TabularMdp, occupancy_measure, policy_from_occupancy, random_mdp
from gailkit.soft_rl import soft_value_iteration

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "InvalidMeasureError", "TabularMdp", "occupancy_measure",
    "policy_from_occupancy", "random_mdp", "soft_value_iteration",
]
