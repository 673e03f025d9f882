"""Parametric policies over an MLP: categorical logits or a diagonal Gaussian.

A policy object is stateless; its flat parameter vector ``theta`` is passed
to every method. Observations are normalized by a fixed affine map before
entering the network.
"""
from __future__ import annotations

import json

import numpy as np
from scipy.special import log_softmax

from gailkit.policy_opt.mlp import Mlp

DEFAULT_HIDDEN = (64, 64)
PAPER_HIDDEN = (100, 100)
LOG_2PI = np.log(2 * np.pi)


class Policy:
    kind = "base"

    def __init__(self, obs_dim, act_dim, hidden=DEFAULT_HIDDEN, obs_shift=None, obs_scale=None):
        self.obs_dim = int(obs_dim)
        self.act_dim = int(act_dim)
        self.hidden = tuple(hidden)
        self.obs_shift = np.zeros(obs_dim) if obs_shift is None else np.asarray(obs_shift, float)
        self.obs_scale = np.ones(obs_dim) if obs_scale is None else np.asarray(obs_scale, float)
        self.mlp = Mlp((self.obs_dim, *self.hidden, self.act_dim), output_gain=0.01)

    def normalize(self, obs):
        return (np.atleast_2d(np.asarray(obs, dtype=np.float64)) - self.obs_shift) / self.obs_scale

    # serialization -----------------------------------------------------
    def to_dict(self, theta) -> dict:
        return {
            "kind": self.kind,
            "obs_dim": self.obs_dim,
            "act_dim": self.act_dim,
            "hidden": list(self.hidden),
            "obs_shift": self.obs_shift.tolist(),
            "obs_scale": self.obs_scale.tolist(),
            "theta": np.asarray(theta).tolist(),
        }

    def save(self, theta, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(theta), fh)


class CategoricalPolicy(Policy):
    kind = "categorical"

    @property
    def n_params(self):
        return self.mlp.n_params

    def init_params(self, rng):
        return self.mlp.init_params(rng)

    def _forward(self, theta, obs):
        logits, cache = self.mlp.forward(theta, self.normalize(obs))
        return log_softmax(logits, axis=1), cache

    def probs(self, theta, obs):
        return np.exp(self._forward(theta, obs)[0])

    def log_prob(self, theta, obs, actions):
        logp, _ = self._forward(theta, obs)
        return logp[np.arange(len(logp)), np.asarray(actions, dtype=np.int64)]

    def sample(self, theta, obs, rng, deterministic=False):
        p = self.probs(theta, obs)
        if deterministic:
            return p.argmax(1)
        u = rng.random(len(p))[:, None]
        return np.minimum((np.cumsum(p, axis=1) < u).sum(1), self.act_dim - 1)

    def entropy(self, theta, obs):
        logp, _ = self._forward(theta, obs)
        return -(np.exp(logp) * logp).sum(1)

    def score_grad(self, theta, obs, actions, weights):
        """sum_i weights[i] * grad_theta log pi(a_i | s_i)."""
        logp, cache = self._forward(theta, obs)
        g = -np.exp(logp)
        g[np.arange(len(g)), np.asarray(actions, dtype=np.int64)] += 1.0
        return self.mlp.vjp(theta, cache, g * np.asarray(weights)[:, None])

    def kl(self, theta_old, theta_new, obs):
        """Mean over states of KL(pi_old || pi_new)."""
        lp_old, _ = self._forward(theta_old, obs)
        lp_new, _ = self._forward(theta_new, obs)
        return float(np.mean(np.sum(np.exp(lp_old) * (lp_old - lp_new), axis=1)))

    def fisher_vector_product(self, theta, obs, v):
        """Mean-KL Hessian at theta applied to v: J^T (diag(p) - p p^T) J v / N."""
        logp, cache = self._forward(theta, obs)
        p = np.exp(logp)
        jv = self.mlp.jvp(theta, cache, v)
        mjv = p * jv - p * (p * jv).sum(1, keepdims=True)
        return self.mlp.vjp(theta, cache, mjv) / len(p)


class GaussianPolicy(Policy):
    """Diagonal Gaussian with a state-independent log standard deviation.

    ``theta`` is the MLP parameters followed by ``act_dim`` log-std entries.
    """

    kind = "gaussian"

    @property
    def n_params(self):
        return self.mlp.n_params + self.act_dim

    def init_params(self, rng):
        return np.concatenate([self.mlp.init_params(rng), np.zeros(self.act_dim)])

    def _split(self, theta):
        return theta[: self.mlp.n_params], theta[self.mlp.n_params :]

    def _forward(self, theta, obs):
        net, log_std = self._split(theta)
        if not np.all(np.isfinite(log_std)):
            raise FloatingPointError("non-finite log-std")
        mean, cache = self.mlp.forward(net, self.normalize(obs))
        return mean, log_std, cache

    def log_prob(self, theta, obs, actions):
        mean, log_std, _ = self._forward(theta, obs)
        z = (np.atleast_2d(actions).reshape(mean.shape) - mean) / np.exp(log_std)
        return -0.5 * np.sum(z**2, axis=1) - np.sum(log_std) - 0.5 * self.act_dim * LOG_2PI

    def sample(self, theta, obs, rng, deterministic=False):
        mean, log_std, _ = self._forward(theta, obs)
        if deterministic:
            return mean
        return mean + np.exp(log_std) * rng.normal(size=mean.shape)

    def entropy(self, theta, obs):
        _, log_std, _ = self._forward(theta, obs)
        n = len(np.atleast_2d(obs))
        return np.full(n, np.sum(log_std) + 0.5 * self.act_dim * (1.0 + LOG_2PI))

    def score_grad(self, theta, obs, actions, weights):
        net, _ = self._split(theta)
        mean, log_std, cache = self._forward(theta, obs)
        std = np.exp(log_std)
        z = (np.atleast_2d(actions).reshape(mean.shape) - mean) / std
        w = np.asarray(weights)[:, None]
        g_net = self.mlp.vjp(net, cache, w * z / std)
        g_log_std = np.sum(w * (z**2 - 1.0), axis=0)
        return np.concatenate([g_net, g_log_std])

    def kl(self, theta_old, theta_new, obs):
        m0, ls0, _ = self._forward(theta_old, obs)
        m1, ls1, _ = self._forward(theta_new, obs)
        var0, var1 = np.exp(2 * ls0), np.exp(2 * ls1)
        per = ls1 - ls0 + (var0 + (m0 - m1) ** 2) / (2 * var1) - 0.5
        return float(np.mean(per.sum(1)))

    def fisher_vector_product(self, theta, obs, v):
        net, log_std = self._split(theta)
        v_net, v_log_std = self._split(np.asarray(v, dtype=np.float64))
        _, _, cache = self._forward(theta, obs)
        jv = self.mlp.jvp(net, cache, v_net)
        n = len(jv)
        f_net = self.mlp.vjp(net, cache, jv / np.exp(2 * log_std)) / n
        return np.concatenate([f_net, 2.0 * v_log_std])


def make_policy(spec, hidden=DEFAULT_HIDDEN, obs_shift=None, obs_scale=None) -> Policy:
    cls = CategoricalPolicy if spec.discrete else GaussianPolicy
    return cls(spec.obs_dim, spec.action_dim, hidden, obs_shift, obs_scale)


def load_policy(path):
    """Returns ``(policy, theta)`` from a JSON file written by ``Policy.save``."""
    with open(path) as fh:
        doc = json.load(fh)
    cls = {"categorical": CategoricalPolicy, "gaussian": GaussianPolicy}[doc["kind"]]
    policy = cls(doc["obs_dim"], doc["act_dim"], doc["hidden"], doc["obs_shift"], doc["obs_scale"])
    return policy, np.array(doc["theta"], dtype=np.float64)
