"""Environment plumbing shared by the gridworld and the classic control tasks.

All tasks report costs (cost = -reward). Dynamics are written over a batch of
independent instances so rollout code can step many episodes at once;
:class:`Env` is the single-instance view.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    name: str
    obs_dim: int
    action_kind: str  # "discrete" | "continuous"
    action_dim: int  # k for discrete(k), d for continuous(d)
    horizon_cap: int
    cost_convention: str = "cost = -reward"

    def __post_init__(self):
        if self.horizon_cap < 1:
            raise ValueError("horizon_cap must be >= 1")
        if self.action_kind == "discrete" and self.action_dim < 2:
            raise ValueError("discrete action spaces need at least 2 actions")
        if self.action_kind == "continuous" and self.action_dim < 1:
            raise ValueError("continuous action spaces need at least 1 dimension")
        if self.action_kind not in ("discrete", "continuous"):
            raise ValueError(f"unknown action kind {self.action_kind!r}")

    @property
    def discrete(self) -> bool:
        return self.action_kind == "discrete"


class EpisodeFinishedError(RuntimeError):
    pass


class BatchDynamics:
    """Vectorized dynamics. Subclasses define ``spec`` and the three hooks below."""

    spec: EnvSpec

    def sample_start(self, rngs) -> np.ndarray:
        """One start state per generator in ``rngs``."""
        raise NotImplementedError

    def transition(self, states, actions, rngs):
        """Returns ``(next_states, costs, terminal)`` for a batch."""
        raise NotImplementedError

    def observe(self, states) -> np.ndarray:
        return np.asarray(states, dtype=np.float64)

    def check_actions(self, actions):
        actions = np.asarray(actions)
        if self.spec.discrete:
            if np.any((actions < 0) | (actions >= self.spec.action_dim)) or np.any(
                actions != np.round(actions)
            ):
                raise ValueError(f"action out of range for {self.spec.name}: {actions}")
            return actions.astype(np.int64)
        return actions.astype(np.float64)


class Env:
    """Single-instance environment with seedable resets.

    >>> env = make_env("cartpole")  # doctest: +SKIP
    >>> obs = env.reset(seed=0)
    >>> obs, cost, done = env.step(1)
    """

    def __init__(self, dynamics: BatchDynamics):
        self.dynamics = dynamics
        self.spec = dynamics.spec
        self._state = None
        self._rng = None
        self.step_count = 0
        self.done = True

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.default_rng(seed)
        self._state = self.dynamics.sample_start([self._rng])
        self.step_count = 0
        self.done = False
        return self.dynamics.observe(self._state)[0]

    def step(self, action):
        if self.done:
            raise EpisodeFinishedError("step() called on a finished episode; call reset()")
        action = np.asarray(action)
        batch = action.reshape(1) if self.spec.discrete else action.reshape(1, -1)
        batch = self.dynamics.check_actions(batch)
        self._state, cost, terminal = self.dynamics.transition(self._state, batch, [self._rng])
        self.step_count += 1
        self.done = bool(terminal[0]) or self.step_count >= self.spec.horizon_cap
        return self.dynamics.observe(self._state)[0], float(cost[0]), self.done

    @property
    def observation(self):
        return None if self._state is None else self.dynamics.observe(self._state)[0]
