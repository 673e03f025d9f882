"""Exact tabular version of the adversarial imitation game.

Each round uses the optimal discriminator D* = rho_pi / (rho_pi + rho_E) in
closed form, computes the entropy-regularized best response to the cost
log D*, and moves the learner's occupancy measure toward the best
response's (a conditional-gradient step on the Jensen-Shannon objective).
The learner policy is read back from the mixed occupancy measure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gailkit.imitation.discriminator import CLAMP
from gailkit.mdp import TabularMdp, occupancy_measure, policy_from_occupancy
from gailkit.regularizers import jsd_occupancy, optimal_discriminator
from gailkit.soft_rl import soft_value_iteration


@dataclass
class TabularGailResult:
    policy: np.ndarray
    rho: np.ndarray
    gap_history: list = field(default_factory=list)  # JSD(rho_pi, rho_E) per round


def tabular_gail_oracle(mdp: TabularMdp, rho_expert, iters=200, lam=1e-2, policy_init=None,
                        step_rule="harmonic") -> TabularGailResult:
    """Run ``iters`` exact rounds; ``lam`` > 0 weights the causal entropy.

    The best response to log D* is RL(log D* / lam), i.e. the minimizer of
    -lam H(pi) + E_pi[log D*]. With ``step_rule="harmonic"`` round k mixes
    with weight 2 / (k + 2); ``"full"`` jumps straight to the best response.
    """
    if lam <= 0:
        raise ValueError("lam must be positive for the soft best response")
    rho_expert = np.asarray(rho_expert, dtype=np.float64)
    policy = (np.full(mdp.shape, 1.0 / mdp.n_actions) if policy_init is None
              else np.asarray(policy_init, dtype=np.float64))
    rho = occupancy_measure(mdp, policy)
    history = [jsd_occupancy(rho, rho_expert)]
    v = None
    for k in range(iters):
        d_star = np.clip(optimal_discriminator(rho, rho_expert), CLAMP, 1.0 - CLAMP)
        sol = soft_value_iteration(mdp, np.log(d_star) / lam, tol=1e-8, v_init=v)
        v = sol.v_values
        rho_br = occupancy_measure(mdp, sol.policy)
        step = 1.0 if step_rule == "full" else 2.0 / (k + 2.0)
        rho = (1.0 - step) * rho + step * rho_br
        history.append(jsd_occupancy(rho, rho_expert))
    return TabularGailResult(policy_from_occupancy(rho), rho, history)
