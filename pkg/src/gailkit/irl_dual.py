"""Max-causal-entropy IRL as dual ascent on costs, and RL after IRL.

Each ascent step solves the inner soft RL problem exactly, then moves the
cost along rho_{pi(c)} - rho_E - (a subgradient of psi). With a constant
regularizer the fixed point reproduces the expert occupancy measure.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from gailkit.errors import ConvergenceError
from gailkit.mdp import TabularMdp, flow_residual, lagrangian_value, occupancy_measure
from gailkit.regularizers import ConstantRegularizer, IndicatorRegularizer, Regularizer
from gailkit.soft_rl import soft_value_iteration

log = logging.getLogger(__name__)


@dataclass
class DualState:
    cost: np.ndarray
    iterate: int
    primal_gap: float
    history: list = field(default_factory=list)  # (iterate, primal_gap)
    policy: np.ndarray | None = None
    rho: np.ndarray | None = None


def default_step_size(mdp: TabularMdp) -> float:
    return 0.5 * (1.0 - mdp.discount)


def irl_dual_ascent(
    mdp: TabularMdp,
    rho_expert,
    psi: Regularizer | None = None,
    step_size: float | None = None,
    iters: int = 5000,
    tol: float = 0.0,
    cost_init=None,
    inner_tol: float = 1e-10,
    record_every: int = 1,
) -> DualState:
    """Run dual ascent for ``iters`` steps (or until the L1 gap drops to ``tol``).

    For an indicator regularizer the ascent runs on the class weights and is
    projected back onto the ball / simplex after every step.

    Raises ConvergenceError (with the gap history) if the gap grows beyond ten
    times its initial value.
    """
    rho_expert = np.asarray(rho_expert, dtype=np.float64)
    psi = ConstantRegularizer() if psi is None else psi
    eta = default_step_size(mdp) if step_size is None else float(step_size)
    indicator = isinstance(psi, IndicatorRegularizer)
    if indicator:
        cls = psi.cost_class
        weights = np.zeros(cls.dim)
        cost = cls.cost(weights)
    else:
        cost = np.zeros(mdp.shape) if cost_init is None else np.array(cost_init, dtype=np.float64)

    history = []
    v = None
    first_gap = None
    gap = np.inf
    it = 0
    for it in range(iters + 1):
        sol = soft_value_iteration(mdp, cost, tol=inner_tol, v_init=v)
        v = sol.v_values
        rho = occupancy_measure(mdp, sol.policy)
        gap = float(np.abs(rho - rho_expert).sum())
        if first_gap is None:
            first_gap = gap
        if it % record_every == 0 or gap <= tol or it == iters:
            history.append((it, gap))
        if first_gap > 0 and gap > 10.0 * first_gap:
            raise ConvergenceError(
                f"dual ascent diverged at iterate {it}: gap {gap:.3e}", residual=gap, history=history
            )
        if gap <= tol or it == iters:
            break
        grad = rho - rho_expert
        if indicator:
            weights = cls.project(weights + eta * np.einsum("sa,sad->d", grad, cls.features))
            cost = cls.cost(weights)
        else:
            cost = cost + eta * (grad - psi.subgradient(cost))
    log.debug("dual ascent stopped at iterate %d with gap %.3e", it, gap)
    return DualState(cost, it, gap, history, sol.policy, rho)


def rl_after_irl(mdp: TabularMdp, rho_expert, tol=None, iters=5000, step_size=None):
    """pi_tilde = RL(c_tilde) for c_tilde from unregularized dual ascent.

    ``tol`` is the L1 occupancy tolerance (default 1e-3 / (1 - gamma)).
    Raises ConvergenceError if it is not met within ``iters`` steps.
    """
    tol = 1e-3 * mdp.total_mass if tol is None else tol
    state = irl_dual_ascent(mdp, rho_expert, ConstantRegularizer(), step_size, iters, tol=tol)
    if state.primal_gap > tol:
        raise ConvergenceError(
            f"occupancy gap {state.primal_gap:.3e} above tolerance {tol:.3e}",
            residual=state.primal_gap,
            history=state.history,
        )
    return state.policy


@dataclass
class SaddleReport:
    max_violation: float
    primal_violation: float  # max of L(rho_A, c_tilde) - L(rho, c_tilde)
    dual_violation: float  # max of L(rho_A, c) - L(rho_A, c_tilde)
    max_flow_residual: float
    n_probes: int


def _regularized_lagrangian(rho, cost, rho_expert, psi):
    return lagrangian_value(rho, cost, rho_expert) - psi(cost)


def saddle_check(
    mdp: TabularMdp, rho_a, c_tilde, rho_expert, psi=None, n_probes=100, rng=None, scale=1.0
) -> SaddleReport:
    """Probe L(rho_A, c) <= L(rho_A, c_tilde) <= L(rho, c_tilde) with random feasible rho and c.

    Probe measures come from random policies mixed toward pi_A, so they are
    exactly feasible; probe costs are bounded perturbations of c_tilde.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    psi = ConstantRegularizer() if psi is None else psi
    rho_a = np.asarray(rho_a, dtype=np.float64)
    c_tilde = np.asarray(c_tilde, dtype=np.float64)
    base = _regularized_lagrangian(rho_a, c_tilde, rho_expert, psi)
    mass = rho_a.sum(1, keepdims=True)
    pi_a = np.where(mass > 0, rho_a / np.where(mass > 0, mass, 1.0), 1.0 / mdp.n_actions)
    primal = dual = -np.inf
    worst_flow = 0.0
    for k in range(n_probes):
        rand_pi = rng.dirichlet(np.ones(mdp.n_actions), size=mdp.n_states)
        mix = rng.uniform(0.0, 1.0) ** 2 if k % 2 else 1.0
        probe_pi = (1 - mix) * pi_a + mix * rand_pi
        rho = occupancy_measure(mdp, probe_pi)
        worst_flow = max(worst_flow, flow_residual(mdp, rho))
        primal = max(primal, base - _regularized_lagrangian(rho, c_tilde, rho_expert, psi))
        cost = c_tilde + scale * rng.uniform(-1.0, 1.0, size=c_tilde.shape)
        dual = max(dual, _regularized_lagrangian(rho_a, cost, rho_expert, psi) - base)
    primal = max(primal, 0.0)
    dual = max(dual, 0.0)
    return SaddleReport(max(primal, dual), primal, dual, worst_flow, n_probes)
