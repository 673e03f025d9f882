"""A small dataset-size sweep driven by a config dict, ending in a CSV and an SVG chart.

Run:  python3 demos/05_sweep_and_plot.py [out_dir]
The same config as JSON works with `gailkit sweep --config file.json`.
"""
import json
import os
import sys

from gailkit.harness.experiments import read_scores_csv, run_experiment

out = sys.argv[1] if len(sys.argv) > 1 else "runs/demo_sweep"
config = {
    "env": "cartpole",
    "algorithms": ["bc", "gail"],
    "trajectory_counts": [1, 4],
    "iters": 30,
    "pairs_per_iter": 2000,
    "seeds": [0, 1],
    "expert_iters": 40,
    "out_dir": out,
}
print(json.dumps(config, indent=2))
run_experiment(config)
for rec in read_scores_csv(os.path.join(out, "scores.csv")):
    print(f"{rec.algorithm:5s} n={rec.n_traj:2d}  return {rec.raw_mean:7.1f} +- {rec.raw_std:5.1f}  "
          f"scaled {rec.scaled:6.3f}  ({rec.n_seeds} seeds)")
print(f"chart: {os.path.join(out, 'scores.svg')}")
