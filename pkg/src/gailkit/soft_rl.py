"""Entropy-regularized optimal control on tabular MDPs.

Costs are minimized, so the soft backup uses V(s) = -log sum_a exp(-Q(s, a))
and the optimal policy is pi(a|s) = exp(V(s) - Q(s, a)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from gailkit.errors import ConvergenceError
from gailkit.mdp import TabularMdp, causal_entropy_policy, occupancy_measure

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 100_000


@dataclass
class SoftSolution:
    q_values: np.ndarray
    v_values: np.ndarray
    policy: np.ndarray
    residual: float
    iterations: int = 0


def soft_min(q, axis=-1):
    """-log sum exp(-q), stabilized by max-subtraction (via scipy)."""
    return -logsumexp(-np.asarray(q), axis=axis)


def soft_value_iteration(
    mdp: TabularMdp,
    cost,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    v_init=None,
) -> SoftSolution:
    """Solve RL(c) = argmin_pi -H(pi) + E_pi[c] by soft value iteration.

    ``v_init`` warm-starts the iteration (the fixed point does not depend on
    it). Raises ConvergenceError if the sup-norm change is still above
    ``tol`` after ``max_iters`` backups.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cost = np.asarray(cost, dtype=np.float64)
    if cost.shape != mdp.shape:
        raise ValueError(f"cost shape {cost.shape} != {mdp.shape}")
    gamma = mdp.discount
    P = mdp.transition.reshape(-1, mdp.n_states)
    v = np.zeros(mdp.n_states) if v_init is None else np.array(v_init, dtype=np.float64)
    residual = np.inf
    for it in range(1, max_iters + 1):
        q = cost + gamma * (P @ v).reshape(mdp.shape)
        v_new = soft_min(q)
        residual = float(np.abs(v_new - v).max())
        v = v_new
        if residual <= tol:
            break
    else:
        raise ConvergenceError(
            f"soft value iteration did not reach tol={tol} in {max_iters} iterations",
            residual=residual,
        )
    q = cost + gamma * (P @ v).reshape(mdp.shape)
    v = soft_min(q)
    policy = np.exp(v[:, None] - q)
    policy /= policy.sum(1, keepdims=True)
    return SoftSolution(q, v, policy, residual, it)


def exact_policy_objective(mdp: TabularMdp, policy, cost) -> float:
    """-H(pi) + E_pi[c], computed exactly from the occupancy measure."""
    rho = occupancy_measure(mdp, policy)
    return -causal_entropy_policy(mdp, policy) + float(np.sum(rho * cost))


def start_value(mdp: TabularMdp, solution: SoftSolution) -> float:
    return float(mdp.start_dist @ solution.v_values)
