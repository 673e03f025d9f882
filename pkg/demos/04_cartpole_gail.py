"""Imitating a cartpole expert from a single trajectory.

Trains a TRPO expert on the true cost, records one of its episodes, then runs
GAIL and behavioral cloning on that episode and reports scaled scores
(0 = random policy, 1 = expert).

Run:  python3 demos/04_cartpole_gail.py --iters 60
The full setting (--iters 300) takes a few minutes per run.
"""
import argparse

from gailkit.envs import make_dynamics
from gailkit.harness.experiments import (
    evaluate,
    imitate,
    random_reference,
    sample_trajectories,
    scaled_score,
    train_env_expert,
)

ap = argparse.ArgumentParser()
ap.add_argument("--iters", type=int, default=60)
ap.add_argument("--pairs", type=int, default=5000)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

dyn = make_dynamics("cartpole")
print("training the expert ...")
policy, theta, history = train_env_expert(
    dyn, seed=0, callback=lambda it, b, rec: it % 10 == 0 and print(
        f"  expert iter {it:3d}  batch return {-b.returns().mean():6.1f}"))
expert = evaluate(dyn, policy, theta)
rand = random_reference(dyn)
print(f"expert {expert[0]:.1f} +- {expert[1]:.1f}, random {rand[0]:.1f} +- {rand[1]:.1f}")

dataset = sample_trajectories(dyn, policy, theta, 1, seed=12345)
print(f"one expert trajectory of {dataset.n_pairs} steps")


def progress(row):
    if row["iter"] % 10 == 0:
        print(f"  gail iter {row['iter']:3d}  return {row['true_return']:6.1f}  "
              f"disc loss {row['disc_loss']:.3f}")


for algo in ("gail", "bc"):
    print(f"\n{algo} ...")
    *_, (mean, std) = imitate(dyn, algo, dataset, iters=args.iters, pairs_per_iter=args.pairs,
                              seed=args.seed, callback=progress if algo == "gail" else None)
    print(f"{algo}: return {mean:.1f} +- {std:.1f}, scaled {scaled_score(mean, rand[0], expert[0]):.3f}")
