"""GAIL training loop: a discriminator-defined cost minimized by TRPO.

Each iteration samples learner pairs, takes one Adam step on the
discriminator, then one TRPO step on the policy against the cost log D
(optionally with the causal-entropy bonus weighted by ``lam``).

Episodes that end early are continued, up to the horizon cap, in an
absorbing state the discriminator can recognize. Both occupancy measures
then have the same total mass, and the learner is charged the discounted
absorbing cost when it terminates. Without this, log D <= 0 makes every
extra step look cheap and biases the learner towards long episodes, which
is fatal on tasks where reaching a terminal state is the goal.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from gailkit.imitation.dataset import ExpertDataset
from gailkit.imitation.discriminator import (
    Discriminator,
    discriminator_update,
    make_discriminator_state,
)
from gailkit.policy_opt.rollout import evaluate_policy
from gailkit.policy_opt.trainer import PolicyOptimizer, TrpoConfig

log = logging.getLogger(__name__)

METRIC_FIELDS = ("iter", "true_return", "disc_loss", "mean_kl", "entropy")


@dataclass
class GailConfig:
    lam: float = 0.0
    iters: int = 300
    pairs_per_iter: int = 5000
    max_kl: float = 0.01
    disc_lr: float = 0.01
    disc_steps: int = 1
    hidden: tuple = (64, 64)
    gamma: float = 0.995
    gae_lambda: float = 0.97
    seed: int = 0
    eval_episodes: int = 50
    absorbing: bool = True


@dataclass
class TrainResult:
    optimizer: PolicyOptimizer
    metrics: list = field(default_factory=list)  # dicts keyed by METRIC_FIELDS
    kl_log: list = field(default_factory=list)
    eval_mean: float = float("nan")
    eval_std: float = float("nan")
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def policy(self):
        return self.optimizer.policy

    @property
    def theta(self):
        return self.optimizer.theta


def batch_reward_return(batch, horizon_cap):
    """Mean negative-cost return over the batch's finished episodes (nan if none)."""
    done = batch.terminal | (batch.lengths() >= horizon_cap)
    return float(-batch.returns()[done].mean()) if done.any() else float("nan")


def absorbing_pad(obs, actions, lengths, terminal, horizon_cap):
    """Append (cap - length) absorbing pairs per terminated episode.

    Returns ``(obs, actions, flags)`` with the padding rows zero-filled.
    """
    lengths = np.asarray(lengths)
    n_pad = int(np.sum(np.where(terminal, np.maximum(horizon_cap - lengths, 0), 0)))
    pad_obs = np.zeros((n_pad,) + obs.shape[1:])
    pad_act = np.zeros((n_pad,) + np.asarray(actions).shape[1:], dtype=np.asarray(actions).dtype)
    flags = np.concatenate([np.zeros(len(obs)), np.ones(n_pad)])
    return np.concatenate([obs, pad_obs]), np.concatenate([actions, pad_act]), flags


def terminal_charge(batch, c_abs, gamma, horizon_cap):
    """Per-pair cost addition carrying the absorbing tail onto each terminal step."""
    extra = np.zeros(len(batch))
    for (a, b), term in zip(batch.bounds, batch.terminal):
        n = horizon_cap - (b - a)
        if term and n > 0:
            extra[b - 1] = c_abs * gamma * (1.0 - gamma**n) / (1.0 - gamma)
    return extra


def gail_train(dynamics, expert: ExpertDataset, config: GailConfig | None = None,
               callback=None) -> TrainResult:
    cfg = config or GailConfig()
    start = time.time()
    trpo_cfg = TrpoConfig(gamma=cfg.gamma, lam=cfg.gae_lambda, max_kl=cfg.max_kl,
                          hidden=tuple(cfg.hidden))
    opt = PolicyOptimizer(dynamics, trpo_cfg, seed=cfg.seed)
    cap = dynamics.spec.horizon_cap
    disc = Discriminator.for_env(dynamics, tuple(cfg.hidden), absorbing=cfg.absorbing)
    dstate = make_discriminator_state(disc, np.random.default_rng(cfg.seed + 7919), cfg.disc_lr)
    exp_obs, exp_act, _ = expert.pairs()
    exp_pairs = (exp_obs, exp_act)
    if cfg.absorbing:
        # a stored episode shorter than the cap ended in a terminal state
        exp_len = np.array([len(t) for t in expert.trajectories])
        exp_pairs = absorbing_pad(exp_obs, exp_act, exp_len, exp_len < cap, cap)
    metrics = []
    for it in range(cfg.iters):
        batch = opt.sample(cfg.pairs_per_iter, seed=cfg.seed * 1_000_003 + it)
        learner = (batch.obs, batch.actions)
        if cfg.absorbing:
            learner = absorbing_pad(batch.obs, batch.actions, batch.lengths(), batch.terminal, cap)
        for _ in range(cfg.disc_steps):
            disc_obj = discriminator_update(disc, dstate, learner, exp_pairs)
        cost = disc.cost(dstate.params, batch.obs, batch.actions)
        if cfg.absorbing:
            cost = cost + terminal_charge(batch, disc.absorbing_cost(dstate.params), cfg.gamma, cap)
        rec = opt.step(batch, cost, lam_entropy=cfg.lam)
        row = {
            "iter": it,
            "true_return": batch_reward_return(batch, cap),
            "disc_loss": -disc_obj,
            "mean_kl": rec.mean_kl,
            "entropy": rec.entropy,
        }
        metrics.append(row)
        if callback is not None:
            callback(row)
        log.debug("gail iter %d: %s", it, row)
    result = TrainResult(opt, metrics, list(opt.kl_log), seconds=time.time() - start)
    result.extra["disc_params"] = dstate.params
    if cfg.eval_episodes:
        result.eval_mean, result.eval_std = evaluate_policy(
            dynamics, opt.policy, opt.theta, cfg.eval_episodes, seed=10_000 + cfg.seed
        )
    return result


def config_dict(cfg) -> dict:
    out = asdict(cfg)
    out["hidden"] = list(out["hidden"])
    return out
