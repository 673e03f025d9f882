"""Any TabularMdp as a sampled environment with one-hot observations."""
from __future__ import annotations

import numpy as np

from gailkit.envs.base import BatchDynamics, EnvSpec
from gailkit.mdp import TabularMdp


class TabularDynamics(BatchDynamics):
    """Samples the MDP's own kernel; episodes never terminate, only hit the cap.

    With ``horizon_cap`` large compared with 1/(1-gamma) the discounted
    returns of sampled episodes are unbiased up to gamma**cap, which makes this
    the bridge between exact tabular quantities and the sampled estimators.
    """

    def __init__(self, mdp: TabularMdp, horizon_cap=200, name="tabular"):
        if mdp.n_actions < 2:
            raise ValueError("sampled environments need at least 2 actions")
        self.mdp = mdp
        self.spec = EnvSpec(name, mdp.n_states, "discrete", mdp.n_actions, horizon_cap)
        self._cdf = np.cumsum(mdp.transition, axis=-1)
        self._start_cdf = np.cumsum(mdp.start_dist)
        self._cost = np.zeros(mdp.shape) if mdp.true_cost is None else mdp.true_cost

    def sample_start(self, rngs):
        idx = [min(int(np.searchsorted(self._start_cdf, rng.random(), side="right")),
                   self.mdp.n_states - 1) for rng in rngs]
        return np.array(idx, dtype=np.int64)

    def _step(self, states, actions, rngs):
        u = np.array([rng.random() for rng in rngs])
        cdf = self._cdf[states, actions]
        nxt = np.minimum((cdf <= u[:, None]).sum(1), self.mdp.n_states - 1)
        return nxt, self._cost[states, actions]

    def transition(self, states, actions, rngs):
        nxt, costs = self._step(states, actions, rngs)
        return nxt, costs, np.zeros(len(nxt), dtype=bool)

    def observe(self, states):
        return np.eye(self.mdp.n_states)[np.asarray(states)]
