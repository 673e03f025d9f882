"""Expert trajectory datasets and their JSON-lines file format.

One trajectory per line::

    {"observations": [[...], ...], "actions": [...], "costs": [...], "seed": 123}

Dataset-level metadata (source policy id, sampling seed) goes to a sidecar
``<path>.meta.json``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    observations: np.ndarray
    actions: np.ndarray
    costs: np.ndarray
    seed: int = 0

    def __len__(self):
        return len(self.costs)


@dataclass
class ExpertDataset:
    trajectories: list
    source: str = "unknown"
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.trajectories:
            raise ValueError("an expert dataset needs at least one trajectory")
        dims = {np.asarray(t.observations).shape[1:] for t in self.trajectories}
        if len(dims) != 1:
            raise ValueError(f"inconsistent observation dimensions: {dims}")
        for t in self.trajectories:
            if not len(t.observations) == len(t.actions) == len(t.costs):
                raise ValueError("observations, actions and costs must have equal lengths")

    def __len__(self):
        return len(self.trajectories)

    @property
    def n_pairs(self):
        return sum(len(t) for t in self.trajectories)

    def pairs(self):
        """Stacked ``(observations, actions, timesteps)`` over every trajectory."""
        obs = np.concatenate([np.asarray(t.observations, dtype=np.float64) for t in self.trajectories])
        acts = np.concatenate([np.asarray(t.actions) for t in self.trajectories])
        steps = np.concatenate([np.arange(len(t)) for t in self.trajectories])
        return obs, acts, steps

    def bounds(self):
        out, pos = [], 0
        for t in self.trajectories:
            out.append((pos, pos + len(t)))
            pos += len(t)
        return out

    def returns(self):
        return np.array([float(np.sum(t.costs)) for t in self.trajectories])

    def subset(self, n):
        if not 1 <= n <= len(self):
            raise ValueError(f"cannot take {n} of {len(self)} trajectories")
        return ExpertDataset(self.trajectories[:n], self.source, self.seed, dict(self.meta))

    @classmethod
    def from_batch(cls, batch, source="unknown", seed=0):
        trajs = []
        for i, (a, b) in enumerate(batch.bounds):
            trajs.append(
                Trajectory(
                    batch.obs[a:b].copy(), batch.actions[a:b].copy(), batch.costs[a:b].copy(),
                    batch.episode_seeds[i] if batch.episode_seeds else 0,
                )
            )
        return cls(trajs, source, seed)


def _to_json_action(a):
    a = np.asarray(a)
    return a.tolist()


def save_jsonl(dataset: ExpertDataset, path) -> None:
    lines = []
    for t in dataset.trajectories:
        lines.append(json.dumps({
            "observations": np.asarray(t.observations, dtype=np.float64).tolist(),
            "actions": _to_json_action(t.actions),
            "costs": np.asarray(t.costs, dtype=np.float64).tolist(),
            "seed": int(t.seed),
        }))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump({"source": dataset.source, "seed": dataset.seed, "n_traj": len(dataset),
                   **dataset.meta}, fh, sort_keys=True)


def load_jsonl(path) -> ExpertDataset:
    trajs = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            trajs.append(Trajectory(
                np.array(doc["observations"], dtype=np.float64),
                np.array(doc["actions"]),
                np.array(doc["costs"], dtype=np.float64),
                int(doc.get("seed", 0)),
            ))
    meta_path = str(path) + ".meta.json"
    meta = {}
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
    source = meta.pop("source", "unknown")
    seed = meta.pop("seed", 0)
    meta.pop("n_traj", None)
    return ExpertDataset(trajs, source, seed, meta)
