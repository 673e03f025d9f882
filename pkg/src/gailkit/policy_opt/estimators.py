"""Score-function gradient estimators, GAE and discounted cost-to-go.

Sign convention: every per-step signal here is a *cost* to be minimized.
Advantages are advantages of cost, so a policy improves by moving against
``policy_gradient(batch, advantages)``.
"""
from __future__ import annotations

import numpy as np

from gailkit.policy_opt.rollout import RolloutBatch


def discounted_cost_to_go(signal, bounds, gamma, bootstrap=None) -> np.ndarray:
    """Q_t = sum_{k >= t} gamma^(k - t) signal_k within each trajectory.

    ``bootstrap[i]`` (default 0) is added as the value after the last step of
    trajectory ``i``.
    """
    signal = np.asarray(signal, dtype=np.float64)
    out = np.zeros_like(signal)
    for i, (a, b) in enumerate(bounds):
        acc = 0.0 if bootstrap is None else float(bootstrap[i])
        for t in range(b - 1, a - 1, -1):
            acc = signal[t] + gamma * acc
            out[t] = acc
    return out


def gae_advantages(signal, values, bounds, last_values, gamma, lam) -> np.ndarray:
    """A_t = sum_k (gamma lam)^k delta_{t+k}, delta_t = signal_t + gamma V(s_{t+1}) - V(s_t).

    ``values`` holds V(s_t) for every step; ``last_values[i]`` is V of the
    state after the final step of trajectory ``i`` (0 for terminal states).
    """
    if not (0.0 <= gamma <= 1.0 and 0.0 <= lam <= 1.0):
        raise ValueError("gamma and lambda must lie in [0, 1]")
    signal = np.asarray(signal, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    adv = np.zeros_like(signal)
    for i, (a, b) in enumerate(bounds):
        nxt = np.append(values[a + 1 : b], last_values[i])
        delta = signal[a:b] + gamma * nxt - values[a:b]
        acc = 0.0
        for t in range(b - a - 1, -1, -1):
            acc = delta[t] + gamma * lam * acc
            adv[a + t] = acc
    return adv


def batch_gae(batch: RolloutBatch, signal, value_fn, value_params, gamma, lam):
    """GAE over a rollout batch; truncated episodes bootstrap from the value function."""
    values = value_fn.predict(value_params, batch.obs, batch.timesteps)
    last_t = np.array([batch.timesteps[b - 1] + 1 for _, b in batch.bounds])
    last = value_fn.predict(value_params, batch.final_obs, last_t)
    last = np.where(batch.terminal, 0.0, last)
    return gae_advantages(signal, values, batch.bounds, last, gamma, lam), values


def discount_weights(batch: RolloutBatch, gamma) -> np.ndarray:
    return gamma ** batch.timesteps.astype(np.float64)


def policy_gradient(policy, theta, batch: RolloutBatch, q_estimates, gamma=1.0) -> np.ndarray:
    """(1 / n_traj) sum_i sum_t gamma^t grad log pi(a_t | s_t) Q_t.

    An unbiased estimate of the gradient of E_pi[c] when ``Q_t`` estimates the
    discounted cost-to-go of the sampled pair.
    """
    q = np.asarray(q_estimates, dtype=np.float64)
    if q.shape != (len(batch),):
        raise ValueError(f"q_estimates has length {q.shape} but batch has {len(batch)} steps")
    weights = discount_weights(batch, gamma) * q / batch.n_traj
    return policy.score_grad(theta, batch.obs, batch.actions, weights)


def log_cost(policy, theta, batch: RolloutBatch) -> np.ndarray:
    """Per-step -log pi(a_t | s_t), the cost whose value is the causal entropy."""
    return -policy.log_prob(theta, batch.obs, batch.actions)


def entropy_gradient(policy, theta, batch: RolloutBatch, gamma, baseline=None) -> np.ndarray:
    """Score-function estimate of grad_theta H(pi_theta).

    Q_log is the empirical discounted future sum of -log pi along each sampled
    trajectory. ``baseline`` (per-step, action-independent) may be subtracted.
    """
    if len(batch) == 0:
        raise ValueError("empty batch")
    q_log = discounted_cost_to_go(log_cost(policy, theta, batch), batch.bounds, gamma)
    if baseline is not None:
        q_log = q_log - baseline
    return policy_gradient(policy, theta, batch, q_log, gamma)


def shaped_cost(batch: RolloutBatch, potential, gamma) -> np.ndarray:
    """Potential-based shaping: c(s,a) + gamma*phi(s') - phi(s).

    phi plays the role of a cost-to-go guess (low where things are good).
    Leaves the optimal policy unchanged. phi is taken as 0 at terminal states;
    a truncated episode uses the potential of its final observation.
    """
    phi = np.asarray(potential(batch.obs), dtype=np.float64)
    phi_final = np.where(batch.terminal, 0.0, potential(batch.final_obs))
    nxt = np.empty_like(phi)
    for i, (a, b) in enumerate(batch.bounds):
        nxt[a:b - 1] = phi[a + 1:b]
        nxt[b - 1] = phi_final[i]
    return batch.costs + gamma * nxt - phi
