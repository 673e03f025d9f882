"""Experiment orchestration: experts, datasets, scoring and dataset-size sweeps.

A sweep config is a JSON object; ``RunConfig.from_dict`` lists the accepted
keys. Every output directory gets the resolved config, one metrics CSV and
saved policy per run, a scores CSV and an SVG chart.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import traceback
from dataclasses import asdict, dataclass, field

import numpy as np

from gailkit.envs import make_dynamics, tabularize
from gailkit.envs.classic import MountainCar
from gailkit.envs.gridworld import GridworldConfig
from gailkit.harness.plot import emit_plot
from gailkit.imitation.apprenticeship import ApprenticeshipConfig, apprenticeship_train
from gailkit.imitation.bc import BcConfig, behavioral_cloning
from gailkit.imitation.dataset import ExpertDataset, load_jsonl, save_jsonl
from gailkit.imitation.gail import METRIC_FIELDS, GailConfig, gail_train
from gailkit.imitation.tabular import tabular_gail_oracle
from gailkit.irl_dual import irl_dual_ascent
from gailkit.mdp import occupancy_measure
from gailkit.policy_opt import (
    TrpoConfig,
    evaluate_policy,
    load_policy,
    make_policy,
    sample_batch,
    shaped_cost,
    train_expert,
)
from gailkit.soft_rl import soft_value_iteration

log = logging.getLogger(__name__)

ALGORITHMS = ("bc", "fem", "gtal", "gail", "exact-match", "tabular-gail")
SAMPLED = ("bc", "fem", "gtal", "gail")
TABULAR = ("exact-match", "tabular-gail")
EXPERT_ITERS = {"cartpole": 60, "mountaincar": 100}


# --- scoring ---------------------------------------------------------------

def scaled_score(raw, random_ref, expert_ref):
    """0 for the random policy, 1 for the expert."""
    if not np.isfinite(random_ref) or not np.isfinite(expert_ref) or expert_ref == random_ref:
        raise ValueError(f"degenerate references: random={random_ref}, expert={expert_ref}")
    return (raw - random_ref) / (expert_ref - random_ref)


def evaluate(dynamics, policy, theta, n_episodes=50, seed=0):
    """Mean and std of the per-episode return (negative summed true cost)."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    return evaluate_policy(dynamics, policy, theta, n_episodes, seed)


def random_reference(dynamics, hidden=(64, 64), n_episodes=50, seed=0):
    policy = make_policy(dynamics.spec, hidden, getattr(dynamics, "obs_shift", None),
                         getattr(dynamics, "obs_scale", None))
    theta = policy.init_params(np.random.default_rng(seed))
    return evaluate(dynamics, policy, theta, n_episodes, seed)


# --- experts and datasets --------------------------------------------------

def expert_cost_fn(dynamics, gamma):
    """Training signal for the expert: the true cost, shaped where it is too sparse.

    Mountain car pays +1 per step until the goal, which random exploration
    essentially never reaches; a potential on mechanical energy is added.
    Potential shaping leaves the optimal policy unchanged.
    """
    if isinstance(dynamics, MountainCar):
        return lambda batch: shaped_cost(batch, MountainCar.energy_potential, gamma)
    return None


def train_env_expert(dynamics, iters=None, seed=0, pairs_per_iter=5000, hidden=(64, 64),
                     callback=None):
    iters = EXPERT_ITERS.get(dynamics.spec.name, 60) if iters is None else iters
    cfg = TrpoConfig(hidden=tuple(hidden))
    opt, history = train_expert(dynamics, iters, pairs_per_iter, seed, cfg, callback,
                                cost_fn=expert_cost_fn(dynamics, cfg.gamma))
    return opt.policy, opt.theta, history


def sample_trajectories(dynamics, policy, theta, n, seed, path=None, source="unknown"):
    """``n`` complete episodes; written as JSON lines when ``path`` is given."""
    if int(n) < 1:
        raise ValueError("need at least one trajectory")
    batch = sample_batch(dynamics, policy, theta, seed, n_episodes=int(n))
    dataset = ExpertDataset.from_batch(batch, source, seed)
    dataset.meta["env"] = dynamics.spec.name
    if path is not None:
        save_jsonl(dataset, path)
    return dataset


# --- single runs -----------------------------------------------------------

def imitate(dynamics, algo, dataset, lam=0.0, iters=300, pairs_per_iter=5000, seed=0,
            hidden=(64, 64), eval_episodes=50, callback=None, **extra):
    """Train one imitation learner. Returns ``(policy, theta, metrics, kl_log, eval)``."""
    hidden = tuple(hidden)
    if algo == "gail":
        res = gail_train(dynamics, dataset, GailConfig(
            lam=lam, iters=iters, pairs_per_iter=pairs_per_iter, hidden=hidden, seed=seed,
            eval_episodes=eval_episodes, **extra), callback=callback)
    elif algo in ("fem", "gtal"):
        kind = "linear_ball" if algo == "fem" else "convex_hull"
        res = apprenticeship_train(dynamics, dataset, ApprenticeshipConfig(
            kind=kind, iters=iters, pairs_per_iter=pairs_per_iter, hidden=hidden, seed=seed,
            eval_episodes=eval_episodes, **extra), callback=callback)
    elif algo == "bc":
        spec = dynamics.spec
        bc = behavioral_cloning(dataset, BcConfig(
            hidden=hidden, seed=seed, discrete=spec.discrete,
            n_actions=spec.action_dim if spec.discrete else None,
            obs_shift=getattr(dynamics, "obs_shift", None),
            obs_scale=getattr(dynamics, "obs_scale", None), **extra))
        ev = evaluate(dynamics, bc.policy, bc.theta, eval_episodes, 10_000 + seed)
        metrics = [{"iter": i, "true_return": float("nan"), "disc_loss": v,
                    "mean_kl": float("nan"), "entropy": float("nan")}
                   for i, v in enumerate(bc.val_losses)]
        return bc.policy, bc.theta, metrics, [], ev
    else:
        raise ValueError(f"unknown sampled algorithm {algo!r}; expected one of {SAMPLED}")
    return res.policy, res.theta, res.metrics, res.kl_log, (res.eval_mean, res.eval_std)


def soft_optimal_expert(mdp):
    """Occupancy of the soft-optimal policy for the MDP's own true cost."""
    sol = soft_value_iteration(mdp, mdp.true_cost)
    return occupancy_measure(mdp, sol.policy)


def exact_match(config: GridworldConfig, iters=5000, tol_rel=1e-3, step_size=None):
    """Dual ascent with a constant regularizer against the exact soft-optimal expert.

    Stops once the L1 occupancy gap is at most ``tol_rel`` times the total
    mass. Returns the final dual state and the MDP.
    """
    mdp = tabularize(config)
    rho_e = soft_optimal_expert(mdp)
    state = irl_dual_ascent(mdp, rho_e, step_size=step_size, iters=iters,
                            tol=tol_rel * mdp.total_mass)
    return state, mdp


def write_gap_csv(path, history, mass):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "primal_gap", "normalized_gap"])
        for it, gap in history:
            w.writerow([it, repr(float(gap)), repr(float(gap / mass))])


def write_metrics_csv(path, metrics):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRIC_FIELDS)
        for row in metrics:
            w.writerow([row["iter"]] + [repr(float(row[k])) for k in METRIC_FIELDS[1:]])


# --- sweeps ----------------------------------------------------------------

@dataclass
class RunConfig:
    env: str = "cartpole"
    algorithms: list = field(default_factory=lambda: ["gail"])
    dataset: str | None = None  # JSONL path; sampled from the expert when absent
    trajectory_counts: list = field(default_factory=lambda: [1, 4, 7, 10])
    lam: float = 0.0
    iters: int = 300
    pairs_per_iter: int = 5000
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    hidden: list = field(default_factory=lambda: [64, 64])
    out_dir: str = "runs/sweep"
    expert_policy: str | None = None  # policy JSON; trained when absent
    expert_iters: int | None = None
    expert_seed: int = 0
    dataset_seed: int = 12345
    ref_episodes: int = 50
    eval_episodes: int = 50
    grid: dict = field(default_factory=dict)  # GridworldConfig fields for tabular algorithms
    tabular_iters: int | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "algorithm" in doc:
            doc.setdefault("algorithms", [doc.pop("algorithm")])
        if "trajectories" in doc:
            n = doc.pop("trajectories")
            doc.setdefault("trajectory_counts", n if isinstance(n, list) else [n])
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def validate(self):
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.algorithms:
            raise ValueError("algorithms must be non-empty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms {bad}; expected a subset of {ALGORITHMS}")
        if any(a in SAMPLED for a in self.algorithms):
            if not self.trajectory_counts or min(self.trajectory_counts) < 1:
                raise ValueError("trajectory_counts must be positive integers")
            if self.iters < 1 or self.pairs_per_iter < 1:
                raise ValueError("iters and pairs_per_iter must be positive")
        if any(a in TABULAR for a in self.algorithms) and not self.env.startswith("gridworld"):
            raise ValueError("exact-match and tabular-gail need the gridworld environment")

    def to_dict(self):
        return asdict(self)


@dataclass
class ScoreRecord:
    algorithm: str
    n_traj: int
    raw_mean: float
    raw_std: float
    scaled: float
    n_seeds: int

    FIELDS = ("algorithm", "n_traj", "raw_mean", "raw_std", "scaled", "n_seeds")

    def row(self):
        return [self.algorithm, self.n_traj, repr(float(self.raw_mean)),
                repr(float(self.raw_std)), repr(float(self.scaled)), self.n_seeds]


def write_scores_csv(path, scores):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ScoreRecord.FIELDS)
        for s in scores:
            w.writerow(s.row())


def read_scores_csv(path):
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ScoreRecord(row["algorithm"], int(row["n_traj"]), float(row["raw_mean"]),
                                   float(row["raw_std"]), float(row["scaled"]), int(row["n_seeds"])))
    return out


def aggregate(algo, n_traj, evals, random_ref, expert_ref) -> ScoreRecord:
    """Across seeds: mean and std of the per-seed evaluation means."""
    means = np.array([m for m, _ in evals], dtype=np.float64)
    raw = float(means.mean())
    return ScoreRecord(algo, int(n_traj), raw, float(means.std()),
                       scaled_score(raw, random_ref, expert_ref), len(means))


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _record_failure(failures, cell, exc):
    log.error("cell %s failed: %s", cell, exc)
    failures.append({"cell": cell, "error": type(exc).__name__, "message": str(exc),
                     "traceback": traceback.format_exc()})


def _run_tabular(cfg: RunConfig, out, failures):
    grid = GridworldConfig(**cfg.grid)
    for algo in [a for a in cfg.algorithms if a in TABULAR]:
        cell = algo
        try:
            if algo == "exact-match":
                state, mdp = exact_match(grid, iters=cfg.tabular_iters or 5000)
                write_gap_csv(os.path.join(out, "exact_match_gap.csv"), state.history,
                              mdp.total_mass)
            else:
                mdp = tabularize(grid)
                res = tabular_gail_oracle(mdp, soft_optimal_expert(mdp),
                                          iters=cfg.tabular_iters or 200)
                with open(os.path.join(out, "tabular_gail_jsd.csv"), "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["iter", "jsd"])
                    for i, v in enumerate(res.gap_history):
                        w.writerow([i, repr(float(v))])
        except Exception as exc:  # noqa: BLE001 - isolate per cell
            _record_failure(failures, cell, exc)


def _expert_and_dataset(cfg: RunConfig, dynamics, out):
    if cfg.expert_policy:
        policy, theta = load_policy(cfg.expert_policy)
    else:
        policy, theta, _ = train_env_expert(dynamics, cfg.expert_iters, cfg.expert_seed,
                                            cfg.pairs_per_iter, cfg.hidden)
        policy.save(theta, os.path.join(out, "expert_policy.json"))
    if cfg.dataset:
        dataset = load_jsonl(cfg.dataset)
    else:
        dataset = sample_trajectories(dynamics, policy, theta, max(cfg.trajectory_counts),
                                      cfg.dataset_seed, os.path.join(out, "expert.jsonl"),
                                      source="expert_policy")
    return policy, theta, dataset


def run_experiment(cfg: RunConfig | dict) -> str:
    """Run the sweep described by ``cfg`` and return its output directory."""
    if isinstance(cfg, dict):
        cfg = RunConfig.from_dict(cfg)
    cfg.validate()
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, "config.json"), cfg.to_dict())
    failures: list = []
    _run_tabular(cfg, out, failures)

    sampled = [a for a in cfg.algorithms if a in SAMPLED]
    scores = []
    if sampled:
        dynamics = make_dynamics(cfg.env, **cfg.grid) if cfg.env.startswith("gridworld") \
            else make_dynamics(cfg.env)
        policy, theta, dataset = _expert_and_dataset(cfg, dynamics, out)
        random_ref = random_reference(dynamics, cfg.hidden, cfg.ref_episodes, cfg.expert_seed)
        expert_ref = evaluate(dynamics, policy, theta, cfg.ref_episodes, cfg.expert_seed)
        _write_json(os.path.join(out, "references.json"), {
            "random_mean": random_ref[0], "random_std": random_ref[1],
            "expert_mean": expert_ref[0], "expert_std": expert_ref[1],
        })
        for algo in sampled:
            for n in cfg.trajectory_counts:
                if n > len(dataset):
                    _record_failure(failures, f"{algo}/n{n}",
                                    ValueError(f"dataset has only {len(dataset)} trajectories"))
                    continue
                subset = dataset.subset(n)
                evals = []
                for seed in cfg.seeds:
                    cell = f"{algo}/n{n}/s{seed}"
                    try:
                        pol, th, metrics, _, ev = imitate(
                            dynamics, algo, subset, cfg.lam, cfg.iters, cfg.pairs_per_iter,
                            seed, cfg.hidden, cfg.eval_episodes)
                        run_dir = os.path.join(out, "runs", f"{algo}_n{n}_s{seed}")
                        os.makedirs(run_dir, exist_ok=True)
                        write_metrics_csv(os.path.join(run_dir, "metrics.csv"), metrics)
                        pol.save(th, os.path.join(run_dir, "policy.json"))
                        evals.append(ev)
                    except Exception as exc:  # noqa: BLE001 - isolate per cell
                        _record_failure(failures, cell, exc)
                if evals:
                    scores.append(aggregate(algo, n, evals, random_ref[0], expert_ref[0]))
        write_scores_csv(os.path.join(out, "scores.csv"), scores)
        if scores:
            emit_plot(scores, os.path.join(out, "scores.svg"))
    if failures:
        _write_json(os.path.join(out, "failures.json"), failures)
    return out
