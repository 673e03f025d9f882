"""Discriminator D_w(s, a) in (0, 1): probability that a pair came from the learner.

The learner is trained against the cost log D(s, a), which is low on pairs
the discriminator attributes to the expert.

With ``absorbing=True`` the input carries one extra flag column marking
pairs from the absorbing state that follows termination; those rows have
their observation and action encodings zeroed. Pair tuples may then be
``(obs, actions, flags)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from gailkit.policy_opt.mlp import Adam, Mlp

CLAMP = 1e-8


class Discriminator:
    def __init__(self, obs_dim, n_actions=None, act_dim=None, hidden=(64, 64),
                 obs_shift=None, obs_scale=None, absorbing=False):
        if (n_actions is None) == (act_dim is None):
            raise ValueError("give n_actions for discrete or act_dim for continuous actions")
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.act_width = n_actions if n_actions is not None else act_dim
        self.obs_shift = np.zeros(obs_dim) if obs_shift is None else np.asarray(obs_shift, float)
        self.obs_scale = np.ones(obs_dim) if obs_scale is None else np.asarray(obs_scale, float)
        self.absorbing = absorbing
        width = obs_dim + self.act_width + int(absorbing)
        self.mlp = Mlp((width, *hidden, 1), output_gain=1.0)

    @classmethod
    def for_env(cls, dynamics, hidden=(64, 64), absorbing=False):
        spec = dynamics.spec
        kw = {"n_actions": spec.action_dim} if spec.discrete else {"act_dim": spec.action_dim}
        return cls(spec.obs_dim, hidden=hidden, obs_shift=getattr(dynamics, "obs_shift", None),
                   obs_scale=getattr(dynamics, "obs_scale", None), absorbing=absorbing, **kw)

    def init_params(self, rng):
        return self.mlp.init_params(rng)

    def inputs(self, obs, actions, flags=None):
        x = (np.atleast_2d(np.asarray(obs, dtype=np.float64)) - self.obs_shift) / self.obs_scale
        if self.n_actions is not None:
            enc = np.eye(self.n_actions)[np.asarray(actions, dtype=np.int64)]
        else:
            enc = np.asarray(actions, dtype=np.float64).reshape(len(x), -1)
        out = np.hstack([x, enc])
        if not self.absorbing:
            if flags is not None and np.any(flags):
                raise ValueError("absorbing pairs given to a discriminator built without them")
            return out
        flags = np.zeros(len(x)) if flags is None else np.asarray(flags, dtype=np.float64)
        out[flags > 0] = 0.0
        return np.hstack([out, flags[:, None]])

    def logits(self, w, obs, actions, flags=None):
        return self.mlp(w, self.inputs(obs, actions, flags))[:, 0]

    def prob(self, w, obs, actions, flags=None):
        return np.clip(expit(self.logits(w, obs, actions, flags)), CLAMP, 1.0 - CLAMP)

    def cost(self, w, obs, actions, flags=None):
        """log D, bounded below by log(1e-8)."""
        return np.log(self.prob(w, obs, actions, flags))

    def absorbing_cost(self, w):
        """log D on the absorbing pair."""
        if not self.absorbing:
            raise ValueError("discriminator has no absorbing input")
        return float(self.cost(w, np.zeros((1, self.obs_dim)), self._null_action(), np.ones(1))[0])

    def _null_action(self):
        if self.n_actions is not None:
            return np.zeros(1, dtype=np.int64)
        return np.zeros((1, self.act_width))

    def objective(self, w, learner, expert):
        """Mean log D on learner pairs plus mean log(1 - D) on expert pairs."""
        lo = self.logits(w, *learner)
        le = self.logits(w, *expert)
        return float(np.mean(log_expit(lo)) + np.mean(log_expit(-le)))

    def objective_grad(self, w, learner, expert):
        x_l = self.inputs(*learner)
        x_e = self.inputs(*expert)
        out_l, cache_l = self.mlp.forward(w, x_l)
        out_e, cache_e = self.mlp.forward(w, x_e)
        # d log sigma(z) / dz = 1 - sigma(z); d log(1 - sigma(z)) / dz = -sigma(z)
        g_l = (1.0 - expit(out_l)) / len(x_l)
        g_e = -expit(out_e) / len(x_e)
        return self.mlp.vjp(w, cache_l, g_l) + self.mlp.vjp(w, cache_e, g_e)


@dataclass
class DiscriminatorState:
    params: np.ndarray
    optimizer: Adam


def make_discriminator_state(disc: Discriminator, rng, lr) -> DiscriminatorState:
    w = disc.init_params(rng)
    return DiscriminatorState(w, Adam(len(w), lr=lr))


def discriminator_update(disc: Discriminator, state: DiscriminatorState, learner, expert,
                         step_size=None):
    """One Adam ascent step on the classification objective.

    ``learner`` and ``expert`` are ``(obs, actions)`` tuples. ``step_size``
    overrides the optimizer's learning rate for this step. Returns the
    objective value before the step.
    """
    if len(learner[0]) == 0 or len(expert[0]) == 0:
        raise ValueError("discriminator update needs learner and expert samples")
    value = disc.objective(state.params, learner, expert)
    if not np.isfinite(value):
        raise FloatingPointError("non-finite discriminator objective")
    if step_size is not None:
        state.optimizer.lr = step_size
    if state.optimizer.lr == 0:
        return value
    grad = disc.objective_grad(state.params, learner, expert)
    state.params = state.optimizer.step(state.params, -grad)
    return value
