"""Batched trajectory sampling.

Episodes run in ``n_slots`` parallel lanes that step in lock-step; a lane
that finishes starts a fresh episode. All randomness flows from one master
seed: each new episode draws its environment seed from it, and action noise
comes from a single generator, so (seed, policy) fixes the whole batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RolloutBatch:
    obs: np.ndarray  # [N, obs_dim]
    actions: np.ndarray  # [N] (discrete) or [N, act_dim]
    costs: np.ndarray  # [N] true task costs
    logp: np.ndarray  # [N] log-probabilities under the sampling policy
    timesteps: np.ndarray  # [N] step index within the episode
    bounds: list  # (start, end) half-open index ranges, one per trajectory
    terminal: np.ndarray  # [n_traj] True if the episode ended in a terminal state
    final_obs: np.ndarray  # [n_traj, obs_dim] observation after the last step
    seed: int = 0
    episode_seeds: list = field(default_factory=list)

    def __len__(self):
        return len(self.costs)

    @property
    def n_traj(self):
        return len(self.bounds)

    def returns(self) -> np.ndarray:
        """Undiscounted true-cost return of each trajectory."""
        return np.array([self.costs[a:b].sum() for a, b in self.bounds])

    def lengths(self) -> np.ndarray:
        return np.array([b - a for a, b in self.bounds])

    def select(self, traj_idx) -> "RolloutBatch":
        """Sub-batch made of the listed trajectories (re-indexed)."""
        idx, bounds, pos = [], [], 0
        for i in traj_idx:
            a, b = self.bounds[i]
            idx.append(np.arange(a, b))
            bounds.append((pos, pos + b - a))
            pos += b - a
        idx = np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)
        return RolloutBatch(
            self.obs[idx], self.actions[idx], self.costs[idx], self.logp[idx],
            self.timesteps[idx], bounds, self.terminal[list(traj_idx)],
            self.final_obs[list(traj_idx)], self.seed,
            [self.episode_seeds[i] for i in traj_idx] if self.episode_seeds else [],
        )


def _new_rngs(master, n):
    seeds = master.integers(0, 2**63 - 1, size=n)
    return [np.random.default_rng(int(s)) for s in seeds], [int(s) for s in seeds]


def sample_batch(
    dynamics, policy, theta, seed, n_pairs=None, n_episodes=None, n_slots=None,
    deterministic=False,
) -> RolloutBatch:
    """Sample ``n_pairs`` state-action pairs or ``n_episodes`` full episodes.

    With ``n_pairs`` the batch is cut after the step that reaches the budget;
    episodes still running at that moment are kept as truncated.
    """
    if (n_pairs is None) == (n_episodes is None):
        raise ValueError("give exactly one of n_pairs / n_episodes")
    cap = dynamics.spec.horizon_cap
    if n_episodes is not None:
        if n_episodes < 1:
            raise ValueError("n_episodes must be >= 1")
        n_slots = n_episodes
    else:
        if n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        n_slots = n_slots or max(1, min(32, int(np.ceil(n_pairs / cap))))
    master = np.random.default_rng(seed)
    act_rng = np.random.default_rng(master.integers(0, 2**63 - 1))

    env_rngs, env_seeds = _new_rngs(master, n_slots)
    state = dynamics.sample_start(env_rngs)
    t = np.zeros(n_slots, dtype=np.int64)
    active = np.ones(n_slots, dtype=bool)  # lane still allowed to produce steps
    lanes = [[] for _ in range(n_slots)]  # per-lane list of finished episode records
    cur = [dict(obs=[], act=[], cost=[], logp=[], t=[], seed=env_seeds[i]) for i in range(n_slots)]
    total = 0

    while active.any():
        idx = np.nonzero(active)[0]
        obs = dynamics.observe(state[idx])
        act = policy.sample(theta, obs, act_rng, deterministic=deterministic)
        logp = policy.log_prob(theta, obs, act)
        nxt, cost, term = dynamics.transition(state[idx], act, [env_rngs[i] for i in idx])
        state[idx] = nxt
        t[idx] += 1
        total += len(idx)
        for j, i in enumerate(idx):
            rec = cur[i]
            rec["obs"].append(obs[j])
            rec["act"].append(act[j])
            rec["cost"].append(cost[j])
            rec["logp"].append(logp[j])
            rec["t"].append(t[i] - 1)
        ended = term | (t[idx] >= cap)
        budget_hit = n_pairs is not None and total >= n_pairs
        for j, i in enumerate(idx):
            if ended[j] or budget_hit:
                rec = cur[i]
                rec["terminal"] = bool(term[j])
                rec["final_obs"] = dynamics.observe(state[i : i + 1])[0]
                lanes[i].append(rec)
                if n_episodes is not None or budget_hit:
                    active[i] = False
                else:
                    rngs, seeds = _new_rngs(master, 1)
                    env_rngs[i] = rngs[0]
                    state[i : i + 1] = dynamics.sample_start(rngs)
                    t[i] = 0
                    cur[i] = dict(obs=[], act=[], cost=[], logp=[], t=[], seed=seeds[0])
    episodes = [rec for lane in lanes for rec in lane]
    return _assemble(episodes, dynamics.spec, seed)


def _assemble(episodes, spec, seed) -> RolloutBatch:
    bounds, pos = [], 0
    for rec in episodes:
        bounds.append((pos, pos + len(rec["cost"])))
        pos += len(rec["cost"])
    cat = lambda key: np.concatenate([np.asarray(r[key]) for r in episodes])
    actions = cat("act")
    actions = actions.astype(np.int64) if spec.discrete else actions.reshape(pos, -1)
    return RolloutBatch(
        obs=np.stack([o for r in episodes for o in r["obs"]]),
        actions=actions,
        costs=cat("cost").astype(np.float64),
        logp=cat("logp").astype(np.float64),
        timesteps=cat("t").astype(np.int64),
        bounds=bounds,
        terminal=np.array([r["terminal"] for r in episodes]),
        final_obs=np.stack([r["final_obs"] for r in episodes]),
        seed=seed,
        episode_seeds=[r["seed"] for r in episodes],
    )


def evaluate_policy(dynamics, policy, theta, n_episodes=50, seed=0, deterministic=False):
    """Mean and std of episode returns, reported as negative total cost (reward)."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    batch = sample_batch(dynamics, policy, theta, seed, n_episodes=n_episodes,
                         deterministic=deterministic)
    returns = -batch.returns()
    return float(returns.mean()), float(returns.std())
