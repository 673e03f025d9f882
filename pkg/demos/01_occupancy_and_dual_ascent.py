"""Occupancy measures, causal entropy and exact occupancy matching on a gridworld.

Run:  python3 demos/01_occupancy_and_dual_ascent.py
"""
import numpy as np

from gailkit.envs import GridworldConfig, tabularize
from gailkit.harness.experiments import soft_optimal_expert
from gailkit.irl_dual import irl_dual_ascent
from gailkit.mdp import (
    causal_entropy_occupancy,
    causal_entropy_policy,
    occupancy_measure,
    policy_from_occupancy,
)

cfg = GridworldConfig(width=5, height=5, slip=0.1, discount=0.95)
mdp = tabularize(cfg)
print(f"5x5 gridworld: {mdp.n_states} states, {mdp.n_actions} actions, gamma={mdp.discount}")

# A policy and its occupancy measure determine each other.
uniform = np.full(mdp.shape, 0.25)
rho = occupancy_measure(mdp, uniform)
print(f"uniform policy: occupancy mass {rho.sum():.4f} (1/(1-gamma) = {mdp.total_mass:.4f})")
back = policy_from_occupancy(rho)
print(f"policy recovered from its occupancy measure, max error {np.abs(back - uniform).max():.1e}")
print(f"causal entropy from the policy {causal_entropy_policy(mdp, uniform):.6f}, "
      f"from the measure {causal_entropy_occupancy(rho):.6f}")

# The expert is the soft-optimal policy for the true cost (1 per step off the goal).
rho_e = soft_optimal_expert(mdp)
print(f"\nexpert entropy {causal_entropy_occupancy(rho_e):.3f}; L1 distance from uniform "
      f"{np.abs(rho - rho_e).sum():.3f}")

# With a constant cost regularizer, dual ascent on the cost recovers the expert's
# occupancy measure exactly: each step nudges the cost by rho_pi - rho_E.
state = irl_dual_ascent(mdp, rho_e, iters=5000, tol=1e-3 * mdp.total_mass)
for it, gap in state.history[:: max(1, len(state.history) // 8)]:
    print(f"  iter {it:5d}  L1 gap {gap:.3e}")
print(f"stopped after {state.iterate} iterations at gap {state.primal_gap:.2e} "
      f"(target {1e-3 * mdp.total_mass:.2e})")
