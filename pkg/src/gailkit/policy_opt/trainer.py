"""One policy-optimization iteration: GAE advantages, a TRPO step, a value refit.

The per-step signal is whatever cost the caller wants minimized (true task
cost for experts, log D for GAIL, the fitted linear cost for apprenticeship
learning). A causal-entropy bonus with weight ``lam_entropy`` enters as the
extra per-step cost ``lam_entropy * log pi(a|s)``, whose policy gradient is
``-lam_entropy * grad H``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gailkit.policy_opt.estimators import batch_gae, discounted_cost_to_go, policy_gradient
from gailkit.policy_opt.policies import DEFAULT_HIDDEN, make_policy
from gailkit.policy_opt.rollout import RolloutBatch, sample_batch
from gailkit.policy_opt.trpo import DEFAULT_CG_ITERS, DEFAULT_DAMPING, DEFAULT_MAX_KL, trpo_step
from gailkit.policy_opt.value import ValueFn, fit_value_fn

GAE_GAMMA = 0.995
GAE_LAMBDA = 0.97


@dataclass
class TrpoConfig:
    gamma: float = GAE_GAMMA
    lam: float = GAE_LAMBDA
    max_kl: float = DEFAULT_MAX_KL
    damping: float = DEFAULT_DAMPING
    cg_iters: int = DEFAULT_CG_ITERS
    value_epochs: int = 25
    normalize_advantages: bool = True
    hidden: tuple = DEFAULT_HIDDEN


@dataclass
class StepRecord:
    accepted: bool
    mean_kl: float
    entropy: float
    value_loss: float
    surrogate_improvement: float
    extra: dict = field(default_factory=dict)


class PolicyOptimizer:
    """Holds a policy, its value baseline and their parameters across iterations."""

    def __init__(self, dynamics, config: TrpoConfig | None = None, seed=0, policy=None, theta=None):
        self.dynamics = dynamics
        self.config = config or TrpoConfig()
        spec = dynamics.spec
        shift = getattr(dynamics, "obs_shift", None)
        scale = getattr(dynamics, "obs_scale", None)
        rng = np.random.default_rng(seed)
        self.policy = policy or make_policy(spec, self.config.hidden, shift, scale)
        self.theta = self.policy.init_params(rng) if theta is None else np.array(theta, float)
        self.value_fn = ValueFn(spec.obs_dim, self.config.hidden, spec.horizon_cap, shift, scale)
        self.vparams = self.value_fn.init_params(rng)
        self.kl_log: list[float] = []

    def sample(self, n_pairs, seed) -> RolloutBatch:
        return sample_batch(self.dynamics, self.policy, self.theta, seed, n_pairs=n_pairs)

    def step(self, batch: RolloutBatch, signal, lam_entropy=0.0) -> StepRecord:
        cfg = self.config
        signal = np.asarray(signal, dtype=np.float64)
        if lam_entropy:
            signal = signal + lam_entropy * batch.logp
        adv, values = batch_gae(batch, signal, self.value_fn, self.vparams, cfg.gamma, cfg.lam)
        # targets: discounted cost-to-go, bootstrapped only where the episode was cut
        last = self.value_fn.predict(
            self.vparams, batch.final_obs, [batch.timesteps[b - 1] + 1 for _, b in batch.bounds]
        )
        targets = discounted_cost_to_go(
            signal, batch.bounds, cfg.gamma, np.where(batch.terminal, 0.0, last)
        )
        if cfg.normalize_advantages and len(adv) > 1:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)

        policy, theta_old = self.policy, self.theta
        weights = cfg.gamma ** batch.timesteps.astype(float) * adv / batch.n_traj
        grad = policy_gradient(policy, theta_old, batch, adv, cfg.gamma)
        if not np.any(signal):
            # a zero cost has zero gradient; the baseline alone would only add noise
            grad = np.zeros_like(grad)

        def surrogate(th):
            ratio = np.exp(policy.log_prob(th, batch.obs, batch.actions) - batch.logp)
            return float(np.sum(weights * ratio))

        self.theta, info = trpo_step(
            policy, theta_old, grad, batch.obs, surrogate, cfg.max_kl, cfg.damping, cfg.cg_iters
        )
        if info.accepted:
            self.kl_log.append(info.kl)
        self.vparams, fit = fit_value_fn(
            self.value_fn, self.vparams, batch.obs, batch.timesteps, targets, cfg.value_epochs
        )
        entropy = float(np.mean(policy.entropy(self.theta, batch.obs)))
        return StepRecord(info.accepted, info.kl, entropy, fit.loss_after, info.improvement)


def train_expert(dynamics, iters, pairs_per_iter=5000, seed=0, config=None, callback=None,
                 cost_fn=None):
    """TRPO on the task's true cost (or on ``cost_fn(batch)`` when given)."""
    opt = PolicyOptimizer(dynamics, config, seed=seed)
    history = []
    for it in range(iters):
        batch = opt.sample(pairs_per_iter, seed=seed * 100_003 + it)
        signal = batch.costs if cost_fn is None else cost_fn(batch)
        rec = opt.step(batch, signal)
        complete = batch.terminal | (batch.lengths() >= dynamics.spec.horizon_cap)
        ret = float(batch.returns()[complete].mean()) if complete.any() else float("nan")
        history.append((it, ret, rec.mean_kl, rec.entropy))
        if callback is not None:
            callback(it, batch, rec)
    return opt, history
