"""The adversarial imitation game played exactly on a gridworld.

Each round uses the closed-form best discriminator and a soft best response;
the Jensen-Shannon gap to the expert shrinks. A large entropy weight instead
pins the learner to the uniform policy.

Run:  python3 demos/03_tabular_gail.py
"""
import numpy as np

from gailkit.envs import GridworldConfig, tabularize
from gailkit.harness.experiments import soft_optimal_expert
from gailkit.imitation import tabular_gail_oracle

mdp = tabularize(GridworldConfig())
rho_e = soft_optimal_expert(mdp)

res = tabular_gail_oracle(mdp, rho_e, iters=200, lam=1e-2)
for k in (0, 1, 5, 20, 50, 100, 200):
    print(f"round {k:3d}  JSD {res.gap_history[k]:.5f}")
print(f"final/initial = {res.gap_history[-1] / res.gap_history[0]:.2e}")

big = tabular_gail_oracle(mdp, rho_e, iters=50, lam=1e3)
print(f"\nwith lambda = 1000 the learner stays near uniform: "
      f"max |pi - 1/4| = {np.abs(big.policy - 0.25).max():.4f}")
