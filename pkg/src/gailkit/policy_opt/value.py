"""State-value baseline: the policy's MLP family with a scalar head.

Inputs are the normalized observation plus the fraction of the horizon
already elapsed, since truncated episodes make values time-dependent.
Fitting is full-batch L-BFGS on squared error, so the training loss never
increases across iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from gailkit.policy_opt.mlp import Mlp


@dataclass
class FitReport:
    loss_before: float
    loss_after: float
    losses: list = field(default_factory=list)


class ValueFn:
    def __init__(self, obs_dim, hidden=(64, 64), horizon=200, obs_shift=None, obs_scale=None):
        self.obs_dim = obs_dim
        self.horizon = horizon
        self.obs_shift = np.zeros(obs_dim) if obs_shift is None else np.asarray(obs_shift, float)
        self.obs_scale = np.ones(obs_dim) if obs_scale is None else np.asarray(obs_scale, float)
        self.mlp = Mlp((obs_dim + 1, *hidden, 1), output_gain=1.0)
        # output = out_shift + out_scale * net(x); refreshed on every fit
        self.out_shift = 0.0
        self.out_scale = 1.0

    def init_params(self, rng):
        return self.mlp.init_params(rng)

    def features(self, obs, timesteps):
        x = (np.atleast_2d(np.asarray(obs, dtype=np.float64)) - self.obs_shift) / self.obs_scale
        t = np.asarray(timesteps, dtype=np.float64).reshape(-1, 1) / self.horizon
        return np.hstack([x, t])

    def predict(self, params, obs, timesteps):
        raw = self.mlp(params, self.features(obs, timesteps))[:, 0]
        return self.out_shift + self.out_scale * raw

    def _rescale(self, params, shift, scale):
        """Change output normalization without changing predictions."""
        params = params.copy()
        w, b = self.mlp.unpack(params)[-1]
        w *= self.out_scale / scale
        b[...] = (b * self.out_scale + self.out_shift - shift) / scale
        self.out_shift, self.out_scale = shift, scale
        return params


def fit_value_fn(value_fn: ValueFn, params, obs, timesteps, targets, epochs=25):
    """Regress ``targets`` (e.g. empirical discounted returns) for up to ``epochs`` L-BFGS steps.

    Returns ``(new_params, FitReport)``.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if len(targets) == 0:
        raise ValueError("cannot fit a value function on an empty batch")
    scale = max(float(targets.std()), 1e-6)
    params = value_fn._rescale(params, float(targets.mean()), scale)
    x = value_fn.features(obs, timesteps)
    y = (targets - value_fn.out_shift) / value_fn.out_scale
    n = len(y)
    mlp = value_fn.mlp

    def loss_and_grad(p):
        out, cache = mlp.forward(p, x)
        err = out[:, 0] - y
        return float(err @ err / n), mlp.vjp(p, cache, (2.0 / n) * err[:, None])

    losses = [loss_and_grad(params)[0]]

    def record(intermediate_result):
        losses.append(float(intermediate_result.fun))

    res = minimize(
        loss_and_grad, params, jac=True, method="L-BFGS-B", callback=record,
        options={"maxiter": epochs},
    )
    new = res.x if res.fun <= losses[0] else params
    scale2 = value_fn.out_scale**2
    return new, FitReport(losses[0] * scale2, min(res.fun, losses[0]) * scale2,
                          [l * scale2 for l in losses])
