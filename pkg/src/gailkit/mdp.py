"""Finite MDPs, occupancy measures and causal entropy.

Occupancy measures are plain ``(S, A)`` float arrays holding unnormalized
discounted visitation mass (total mass ``1 / (1 - gamma)``). Tabular policies
are ``(S, A)`` row-stochastic arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from gailkit.errors import InvalidMeasureError

INPUT_TOL = 1e-12
DERIVED_TOL = 1e-9


@dataclass
class TabularMdp:
    transition: np.ndarray  # [S, A, S']
    start_dist: np.ndarray  # [S]
    discount: float
    true_cost: Optional[np.ndarray] = None  # [S, A]
    n_states: int = field(init=False)
    n_actions: int = field(init=False)

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.start_dist = np.asarray(self.start_dist, dtype=np.float64)
        if self.transition.ndim != 3 or self.transition.shape[0] != self.transition.shape[2]:
            raise ValueError(f"transition must have shape (S, A, S), got {self.transition.shape}")
        self.n_states, self.n_actions = self.transition.shape[:2]
        if self.start_dist.shape != (self.n_states,):
            raise ValueError("start_dist must have shape (S,)")
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must lie in (0, 1), got {self.discount}")
        if np.any(self.transition < 0) or np.abs(self.transition.sum(-1) - 1).max() > INPUT_TOL:
            raise ValueError("transition rows must be probability vectors")
        if np.any(self.start_dist < 0) or abs(self.start_dist.sum() - 1) > INPUT_TOL:
            raise ValueError("start_dist must be a probability vector")
        if self.true_cost is not None:
            self.true_cost = np.asarray(self.true_cost, dtype=np.float64)
            if self.true_cost.shape != (self.n_states, self.n_actions):
                raise ValueError("true_cost must have shape (S, A)")

    @property
    def shape(self):
        return (self.n_states, self.n_actions)

    @property
    def total_mass(self) -> float:
        return 1.0 / (1.0 - self.discount)

    def to_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "transition": self.transition.tolist(),
            "start_dist": self.start_dist.tolist(),
            "discount": self.discount,
            "true_cost": None if self.true_cost is None else self.true_cost.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "TabularMdp":
        mdp = cls(
            transition=np.array(doc["transition"], dtype=np.float64),
            start_dist=np.array(doc["start_dist"], dtype=np.float64),
            discount=float(doc["discount"]),
            true_cost=None if doc.get("true_cost") is None else np.array(doc["true_cost"]),
        )
        if mdp.n_states != doc.get("n_states", mdp.n_states) or mdp.n_actions != doc.get(
            "n_actions", mdp.n_actions
        ):
            raise ValueError("n_states / n_actions disagree with the transition tensor")
        return mdp

    @classmethod
    def from_json(cls, text: str) -> "TabularMdp":
        return cls.from_dict(json.loads(text))


def random_mdp(n_states, n_actions, discount, rng, sparse=False) -> TabularMdp:
    """Random MDP with Dirichlet transition rows and start distribution."""
    transition = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    if sparse:
        mask = rng.random(transition.shape) < 0.5
        mask[..., 0] |= ~mask.any(-1)
        transition = transition * mask
        transition /= transition.sum(-1, keepdims=True)
    start = rng.dirichlet(np.ones(n_states))
    cost = rng.normal(size=(n_states, n_actions))
    return TabularMdp(transition, start, discount, cost)


def random_policy(n_states, n_actions, rng, concentration=1.0) -> np.ndarray:
    return rng.dirichlet(np.full(n_actions, concentration), size=n_states)


def check_policy(policy, shape=None) -> np.ndarray:
    policy = np.asarray(policy, dtype=np.float64)
    if shape is not None and policy.shape != tuple(shape):
        raise ValueError(f"policy shape {policy.shape} != {tuple(shape)}")
    if np.any(policy < 0) or np.abs(policy.sum(-1) - 1).max() > INPUT_TOL:
        raise InvalidMeasureError("policy rows must be probability vectors")
    return policy


def state_visitation(mdp: TabularMdp, policy) -> np.ndarray:
    """Discounted state visitation d = p0 + gamma P_pi^T d, by dense LU solve."""
    policy = check_policy(policy, mdp.shape)
    p_pi = np.einsum("sa,sat->st", policy, mdp.transition)
    system = np.eye(mdp.n_states) - mdp.discount * p_pi.T
    d = scipy.linalg.solve(system, mdp.start_dist)
    residual = np.abs(system @ d - mdp.start_dist).max()
    if residual > 1e-8:
        raise RuntimeError(f"occupancy solve residual {residual:.3e} exceeds 1e-8")
    return d


def occupancy_measure(mdp: TabularMdp, policy) -> np.ndarray:
    """Exact rho_pi(s, a) = d(s) pi(a|s)."""
    policy = np.asarray(policy, dtype=np.float64)
    d = state_visitation(mdp, policy)
    return np.clip(d, 0.0, None)[:, None] * policy


def flow_residual(mdp: TabularMdp, rho) -> float:
    """Max violation of the Bellman-flow constraints defining the feasible set."""
    rho = np.asarray(rho, dtype=np.float64)
    inflow = mdp.start_dist + mdp.discount * np.einsum("sat,sa->t", mdp.transition, rho)
    return float(np.abs(rho.sum(1) - inflow).max())


def check_occupancy(mdp: TabularMdp, rho, tol=DERIVED_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != mdp.shape:
        raise ValueError(f"occupancy shape {rho.shape} != {mdp.shape}")
    if np.any(rho < 0):
        raise InvalidMeasureError("occupancy measure has negative entries")
    if abs(rho.sum() - mdp.total_mass) > tol:
        raise InvalidMeasureError(f"occupancy mass {rho.sum()} != {mdp.total_mass}")
    if flow_residual(mdp, rho) > tol:
        raise InvalidMeasureError("occupancy measure violates the Bellman-flow constraints")
    return rho


def policy_from_occupancy(rho) -> np.ndarray:
    """pi_rho(a|s) = rho(s, a) / sum_a' rho(s, a'); zero-mass states get uniform rows."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise InvalidMeasureError("occupancy measure has negative entries")
    mass = rho.sum(1, keepdims=True)
    uniform = np.full_like(rho, 1.0 / rho.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        policy = np.where(mass > 0, rho / np.where(mass > 0, mass, 1.0), uniform)
    return policy


def expected_cost(rho, cost) -> float:
    rho = np.asarray(rho, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    if rho.shape != cost.shape:
        raise ValueError(f"shape mismatch: rho {rho.shape} vs cost {cost.shape}")
    return float(np.sum(rho * cost))


def _xlogy_neg(x, y):
    # -x log y with the 0 log 0 = 0 convention
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log(np.where(x > 0, y, 1.0))
    return np.where(x > 0, out, 0.0)


def causal_entropy_occupancy(rho) -> float:
    """H_bar(rho) = -sum rho log(rho / sum_a' rho)."""
    rho = np.asarray(rho, dtype=np.float64)
    mass = rho.sum(1, keepdims=True)
    return float(np.sum(_xlogy_neg(rho, rho / np.where(mass > 0, mass, 1.0))))


def causal_entropy_policy(mdp: TabularMdp, policy) -> float:
    """Discounted causal entropy E_pi[-log pi(a|s)]."""
    policy = check_policy(policy, mdp.shape)
    rho = occupancy_measure(mdp, policy)
    return float(np.sum(_xlogy_neg(rho, policy)))


def lagrangian_value(rho, cost, rho_expert=None) -> float:
    """-H_bar(rho) + sum (rho - rho_E) c. Leave ``rho_expert`` unset for the plain form."""
    rho = np.asarray(rho, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    if rho_expert is None:
        rho_expert = np.zeros_like(rho)
    rho_expert = np.asarray(rho_expert, dtype=np.float64)
    if not rho.shape == cost.shape == rho_expert.shape:
        raise ValueError("rho, cost and rho_expert must share a shape")
    return -causal_entropy_occupancy(rho) + float(np.sum((rho - rho_expert) * cost))


def policy_lagrangian(mdp: TabularMdp, policy, cost) -> float:
    """L(pi, c) = -H(pi) + E_pi[c], evaluated through the policy (no rho_bar path)."""
    d = state_visitation(mdp, policy)
    per_state = np.sum(_xlogy_neg(policy, policy) * -1.0 + policy * cost, axis=1)
    return float(d @ per_state)
