"""A slippery gridworld with an absorbing goal, usable exactly or by sampling."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gailkit.envs.tabular import TabularDynamics
from gailkit.mdp import TabularMdp

# action index -> (dx, dy); perpendicular pairs are {0, 1} <-> {2, 3}
MOVES = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])  # right, left, down, up
PERPENDICULAR = {0: (2, 3), 1: (2, 3), 2: (0, 1), 3: (0, 1)}


@dataclass
class GridworldConfig:
    width: int = 5
    height: int = 5
    goal: tuple | None = None  # (x, y); defaults to the bottom-right cell
    slip: float = 0.1
    discount: float = 0.95
    start: str = "uniform"  # "uniform" over non-goal cells, or "corner" (cell 0)
    horizon_cap: int = 100
    extra: dict = field(default_factory=dict)

    def goal_cell(self):
        gx, gy = (self.width - 1, self.height - 1) if self.goal is None else self.goal
        if not (0 <= gx < self.width and 0 <= gy < self.height):
            raise ValueError(f"goal cell {(gx, gy)} outside a {self.width}x{self.height} grid")
        return gy * self.width + gx


def tabularize(config: GridworldConfig) -> TabularMdp:
    """Exact tabular MDP; states are y * width + x, moves off the grid stay put."""
    if not 0.0 <= config.slip <= 1.0:
        raise ValueError("slip must lie in [0, 1]")
    w, h = config.width, config.height
    n = w * h
    goal = config.goal_cell()
    P = np.zeros((n, 4, n))
    for s in range(n):
        x, y = s % w, s // w
        for a in range(4):
            if s == goal:
                P[s, a, s] = 1.0
                continue
            outcomes = [(a, 1.0 - config.slip)] + [(p, config.slip / 2) for p in PERPENDICULAR[a]]
            for move, prob in outcomes:
                nx = min(max(x + MOVES[move, 0], 0), w - 1)
                ny = min(max(y + MOVES[move, 1], 0), h - 1)
                P[s, a, ny * w + nx] += prob
    if config.start == "corner":
        start = np.zeros(n)
        start[0] = 1.0
    else:
        start = np.ones(n)
        if n > 1:
            start[goal] = 0.0
        start /= start.sum()
    cost = np.ones((n, 4))
    cost[goal] = 0.0
    return TabularMdp(P, start, config.discount, cost)


class Gridworld(TabularDynamics):
    """Sampled gridworld; observations are one-hot state vectors, done at the goal."""

    def __init__(self, config: GridworldConfig | None = None):
        self.config = config or GridworldConfig()
        super().__init__(tabularize(self.config), self.config.horizon_cap,
                         f"gridworld{self.config.width}x{self.config.height}")
        self.goal = self.config.goal_cell()

    def transition(self, states, actions, rngs):
        nxt, costs = self._step(states, actions, rngs)
        return nxt, costs, nxt == self.goal
