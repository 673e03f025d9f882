"""Command-line entry point.

Each subcommand prints one JSON line describing its result on stdout. On
failure it prints ``{"error": ..., "message": ...}`` on stderr and exits 1.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from gailkit.envs import make_dynamics
from gailkit.envs.gridworld import GridworldConfig
from gailkit.harness.experiments import (
    SAMPLED,
    RunConfig,
    evaluate,
    exact_match,
    imitate,
    read_scores_csv,
    run_experiment,
    sample_trajectories,
    train_env_expert,
    write_gap_csv,
    write_metrics_csv,
)
from gailkit.harness.plot import emit_plot
from gailkit.imitation.dataset import load_jsonl
from gailkit.policy_opt import load_policy


def _hidden(text):
    return tuple(int(h) for h in text.split(","))


def _grid(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return w, h


def _parent(path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def cmd_expert(args):
    dyn = make_dynamics(args.env)

    def progress(it, batch, rec):
        logging.info("expert iter %d: return %.2f", it, -batch.returns().mean())

    policy, theta, _ = train_env_expert(dyn, args.iters, args.seed, args.pairs,
                                        args.hidden, progress)
    _parent(args.out)
    policy.save(theta, args.out)
    mean, std = evaluate(dyn, policy, theta, 50, args.seed)
    return {"policy": args.out, "eval_mean": mean, "eval_std": std}


def cmd_sample(args):
    dyn = make_dynamics(args.env)
    policy, theta = load_policy(args.policy)
    _parent(args.out)
    ds = sample_trajectories(dyn, policy, theta, args.n, args.seed, args.out, source=args.policy)
    return {"dataset": args.out, "n_traj": len(ds), "mean_return": float(-ds.returns().mean())}


def cmd_imitate(args):
    dyn = make_dynamics(args.env)
    dataset = load_jsonl(args.dataset)
    if args.n is not None:
        dataset = dataset.subset(args.n)
    policy, theta, metrics, _, (mean, std) = imitate(
        dyn, args.algo, dataset, args.lam, args.iters, args.pairs, args.seed, args.hidden,
        args.episodes)
    os.makedirs(args.out, exist_ok=True)
    write_metrics_csv(os.path.join(args.out, "metrics.csv"), metrics)
    policy.save(theta, os.path.join(args.out, "policy.json"))
    summary = {"algo": args.algo, "n_traj": len(dataset), "seed": args.seed,
               "eval_mean": mean, "eval_std": std}
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return {"out": args.out, **summary}


def cmd_eval(args):
    dyn = make_dynamics(args.env)
    policy, theta = load_policy(args.policy)
    mean, std = evaluate(dyn, policy, theta, args.episodes, args.seed)
    return {"mean": mean, "std": std, "episodes": args.episodes}


def cmd_exact_match(args):
    w, h = args.grid
    cfg = GridworldConfig(width=w, height=h, slip=args.slip, discount=args.gamma)
    state, mdp = exact_match(cfg, iters=args.iters, tol_rel=args.tol)
    _parent(args.out)
    write_gap_csv(args.out, state.history, mdp.total_mass)
    return {"out": args.out, "iterations": state.iterate, "primal_gap": state.primal_gap,
            "normalized_gap": state.primal_gap / mdp.total_mass}


def cmd_sweep(args):
    cfg = RunConfig.load(args.config)
    if args.out:
        cfg.out_dir = args.out
    out = run_experiment(cfg)
    return {"out": out}


def cmd_plot(args):
    scores = read_scores_csv(args.scores)
    _parent(args.out)
    emit_plot(scores, args.out)
    return {"out": args.out, "records": len(scores)}


def build_parser():
    p = argparse.ArgumentParser(prog="gailkit", description="Imitation learning experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("expert", help="train a TRPO expert on the true cost")
    s.add_argument("env")
    s.add_argument("--iters", type=int, default=None)
    s.add_argument("--pairs", type=int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hidden", type=_hidden, default=(64, 64))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_expert)

    s = sub.add_parser("sample", help="sample expert trajectories to JSON lines")
    s.add_argument("env")
    s.add_argument("--policy", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("imitate", help="train an imitation learner")
    s.add_argument("env")
    s.add_argument("--algo", choices=SAMPLED, required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--n", type=int, default=None, help="use only the first n trajectories")
    s.add_argument("--lambda", dest="lam", type=float, default=0.0)
    s.add_argument("--iters", type=int, default=300)
    s.add_argument("--pairs", type=int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hidden", type=_hidden, default=(64, 64))
    s.add_argument("--episodes", type=int, default=50)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_imitate)

    s = sub.add_parser("eval", help="evaluate a saved policy")
    s.add_argument("env")
    s.add_argument("--policy", required=True)
    s.add_argument("--episodes", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("exact-match", help="tabular dual ascent against an exact expert")
    s.add_argument("--grid", type=_grid, default=(5, 5))
    s.add_argument("--slip", type=float, default=0.1)
    s.add_argument("--gamma", type=float, default=0.95)
    s.add_argument("--iters", type=int, default=5000)
    s.add_argument("--tol", type=float, default=1e-3, help="stop at gap <= tol * total mass")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_exact_match)

    s = sub.add_parser("sweep", help="run a JSON-configured sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="override the config's out_dir")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("plot", help="render a scores CSV as SVG")
    s.add_argument("--scores", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args)
    except Exception as exc:  # noqa: BLE001 - turned into a machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(result, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
