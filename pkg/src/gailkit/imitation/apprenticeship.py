"""Model-free apprenticeship learning (FEM and GTAL).

Each iteration fits the worst-case linear cost in closed form from
discounted feature expectations, then takes a TRPO step against it.

Feature basis for classic-control tasks: the normalized observation
components clipped to [-1, 1], all their pairwise products (squares
included) and a constant. For the convex-hull class the basis is doubled
with negated copies, so the worst case covers both directions of every
feature gap.
"""
from __future__ import annotations

import time

import numpy as np

from gailkit.imitation.dataset import ExpertDataset
from gailkit.imitation.gail import TrainResult, batch_reward_return
from gailkit.policy_opt.rollout import evaluate_policy
from gailkit.policy_opt.trainer import PolicyOptimizer, TrpoConfig
from gailkit.regularizers import max_cost_weights
from dataclasses import dataclass


@dataclass
class ApprenticeshipConfig:
    kind: str = "linear_ball"  # FEM; "convex_hull" for GTAL
    iters: int = 300
    pairs_per_iter: int = 5000
    max_kl: float = 0.01
    hidden: tuple = (64, 64)
    gamma: float = 0.995
    gae_lambda: float = 0.97
    seed: int = 0
    eval_episodes: int = 50


class QuadraticFeatures:
    """f(s) = [x, x_i x_j (i <= j), 1] with x the normalized, clipped observation."""

    def __init__(self, obs_dim, obs_shift=None, obs_scale=None, signed_copies=False):
        self.obs_dim = obs_dim
        self.obs_shift = np.zeros(obs_dim) if obs_shift is None else np.asarray(obs_shift, float)
        self.obs_scale = np.ones(obs_dim) if obs_scale is None else np.asarray(obs_scale, float)
        self.signed_copies = signed_copies
        self._iu = np.triu_indices(obs_dim)

    @classmethod
    def for_env(cls, dynamics, signed_copies=False):
        return cls(dynamics.spec.obs_dim, getattr(dynamics, "obs_shift", None),
                   getattr(dynamics, "obs_scale", None), signed_copies)

    @property
    def dim(self):
        base = self.obs_dim + len(self._iu[0]) + 1
        return 2 * base if self.signed_copies else base

    def __call__(self, obs, actions=None):
        x = np.clip((np.atleast_2d(obs) - self.obs_shift) / self.obs_scale, -1.0, 1.0)
        quad = (x[:, :, None] * x[:, None, :])[:, self._iu[0], self._iu[1]]
        f = np.hstack([x, quad, np.ones((len(x), 1))])
        return np.hstack([f, -f]) if self.signed_copies else f


def discounted_feature_expectations(features, obs, timesteps, bounds, gamma):
    """(1 / n_traj) sum_traj sum_t gamma^t f(s_t)."""
    f = features(obs) * (gamma ** np.asarray(timesteps, dtype=float))[:, None]
    return f.sum(0) / len(bounds)


def apprenticeship_train(dynamics, expert: ExpertDataset, config: ApprenticeshipConfig | None = None,
                         features=None, callback=None) -> TrainResult:
    cfg = config or ApprenticeshipConfig()
    start = time.time()
    features = features or QuadraticFeatures.for_env(
        dynamics, signed_copies=cfg.kind == "convex_hull"
    )
    opt = PolicyOptimizer(
        dynamics,
        TrpoConfig(gamma=cfg.gamma, lam=cfg.gae_lambda, max_kl=cfg.max_kl, hidden=tuple(cfg.hidden)),
        seed=cfg.seed,
    )
    e_obs, _, e_t = expert.pairs()
    fe_expert = discounted_feature_expectations(features, e_obs, e_t, expert.bounds(), cfg.gamma)
    metrics, gaps = [], []
    for it in range(cfg.iters):
        batch = opt.sample(cfg.pairs_per_iter, seed=cfg.seed * 1_000_003 + it)
        done = batch.terminal | (batch.lengths() >= dynamics.spec.horizon_cap)
        sub = batch.select(np.nonzero(done)[0]) if done.any() else batch
        fe_pi = discounted_feature_expectations(features, sub.obs, sub.timesteps, sub.bounds, cfg.gamma)
        w, value = max_cost_weights(fe_pi, fe_expert, cfg.kind)
        gaps.append(value)
        cost = features(batch.obs) @ w
        rec = opt.step(batch, cost)
        row = {
            "iter": it,
            "true_return": batch_reward_return(batch, dynamics.spec.horizon_cap),
            "disc_loss": value,
            "mean_kl": rec.mean_kl,
            "entropy": rec.entropy,
        }
        metrics.append(row)
        if callback is not None:
            callback(row)
    result = TrainResult(opt, metrics, list(opt.kl_log), seconds=time.time() - start)
    result.extra["feature_gaps"] = gaps
    if cfg.eval_episodes:
        result.eval_mean, result.eval_std = evaluate_policy(
            dynamics, opt.policy, opt.theta, cfg.eval_episodes, seed=10_000 + cfg.seed
        )
    return result
