"""Behavioral cloning: maximum-likelihood fit of expert actions, no environment access."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gailkit.imitation.dataset import ExpertDataset
from gailkit.policy_opt.mlp import Adam
from gailkit.policy_opt.policies import CategoricalPolicy, GaussianPolicy


@dataclass
class BcConfig:
    train_frac: float = 0.7
    batch_size: int = 128
    lr: float = 1e-3
    max_epochs: int = 500
    patience: int = 20
    hidden: tuple = (64, 64)
    seed: int = 0
    discrete: bool = True
    n_actions: int | None = None
    obs_shift: np.ndarray | None = None
    obs_scale: np.ndarray | None = None


@dataclass
class BcResult:
    policy: object
    theta: np.ndarray
    best_epoch: int
    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)


def split_dataset(dataset: ExpertDataset, train_frac, rng):
    """Trajectory-level split; a single trajectory is split at the step level."""
    obs, acts, _ = dataset.pairs()
    if len(dataset) >= 2:
        order = rng.permutation(len(dataset))
        n_train = min(max(1, int(round(train_frac * len(dataset)))), len(dataset) - 1)
        bounds = dataset.bounds()
        pick = lambda ids: np.concatenate([np.arange(*bounds[i]) for i in ids])
        tr, va = pick(order[:n_train]), pick(order[n_train:])
    else:
        order = rng.permutation(len(obs))
        n_train = min(max(1, int(round(train_frac * len(obs)))), max(len(obs) - 1, 1))
        tr, va = order[:n_train], order[n_train:]
        if len(va) == 0:
            va = tr
    return (obs[tr], acts[tr]), (obs[va], acts[va])


def behavioral_cloning(dataset: ExpertDataset, config: BcConfig | None = None) -> BcResult:
    """Adam on minibatches of the training split until validation NLL stops improving.

    Returns the parameters from the epoch with the lowest validation loss.
    """
    cfg = config or BcConfig()
    if len(dataset) == 0 or dataset.n_pairs == 0:
        raise ValueError("behavioral cloning needs a non-empty dataset")
    rng = np.random.default_rng(cfg.seed)
    obs, acts, _ = dataset.pairs()
    obs_dim = obs.shape[1]
    if cfg.discrete:
        n_actions = cfg.n_actions or int(acts.max()) + 1
        policy = CategoricalPolicy(obs_dim, n_actions, cfg.hidden, cfg.obs_shift, cfg.obs_scale)
    else:
        act_dim = np.asarray(acts).reshape(len(acts), -1).shape[1]
        policy = GaussianPolicy(obs_dim, act_dim, cfg.hidden, cfg.obs_shift, cfg.obs_scale)
    theta = policy.init_params(rng)
    (x_tr, a_tr), (x_va, a_va) = split_dataset(dataset, cfg.train_frac, rng)
    adam = Adam(len(theta), lr=cfg.lr)

    nll = lambda th, x, a: -float(np.mean(policy.log_prob(th, x, a)))
    best, best_theta, best_epoch, stale = nll(theta, x_va, a_va), theta.copy(), 0, 0
    train_losses, val_losses = [nll(theta, x_tr, a_tr)], [best]
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(x_tr))
        for k in range(0, len(order), cfg.batch_size):
            idx = order[k : k + cfg.batch_size]
            grad = policy.score_grad(theta, x_tr[idx], a_tr[idx], np.full(len(idx), 1.0 / len(idx)))
            theta = adam.step(theta, -grad)
        train_losses.append(nll(theta, x_tr, a_tr))
        val = nll(theta, x_va, a_va)
        val_losses.append(val)
        if val < best:
            best, best_theta, best_epoch, stale = val, theta.copy(), epoch, 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    return BcResult(policy, best_theta, best_epoch, train_losses, val_losses)
