"""The adversarial cost regularizer and its conjugate.

Shows that the optimal discriminator's log-likelihood equals the Jensen-Shannon
divergence minus a constant, and that the logistic surrogate loss produces
the same regularizer.

Run:  python3 demos/02_regularizers.py
"""
import numpy as np

from gailkit.mdp import occupancy_measure, random_mdp, random_policy
from gailkit.regularizers import (
    EXPONENTIAL,
    LOGISTIC,
    g_ga,
    jsd_occupancy,
    min_expected_risk,
    optimal_discriminator,
    psi_ga_conjugate,
    surrogate_to_g,
)

rng = np.random.default_rng(0)
gamma = 0.9
mdp = random_mdp(4, 3, gamma, rng)
rho_pi = occupancy_measure(mdp, random_policy(4, 3, rng))
rho_e = occupancy_measure(mdp, random_policy(4, 3, rng))

d_star = optimal_discriminator(rho_pi, rho_e)
print("optimal discriminator D*(s,a) = rho_pi / (rho_pi + rho_E):")
print(np.round(d_star, 3))

conj = psi_ga_conjugate(rho_pi, rho_e)
jsd = jsd_occupancy(rho_pi, rho_e)
print(f"\nconjugate {conj:.6f}")
print(f"JSD - 2 log 2 / (1 - gamma) = {jsd:.6f} - {2 * np.log(2) / (1 - gamma):.6f} "
      f"= {jsd - 2 * np.log(2) / (1 - gamma):.6f}")

x = np.linspace(-4, -0.05, 5)
print("\nthe logistic loss reproduces the adversarial g(x) = -x - log(1 - e^x):")
for xi, a, b in zip(x, surrogate_to_g(LOGISTIC, x), g_ga(x)):
    print(f"  x={xi:6.2f}  from the loss {a:.6f}  closed form {b:.6f}")

for phi in (LOGISTIC, EXPONENTIAL):
    print(f"{phi.name:12s} minimal expected risk {min_expected_risk(phi, rho_pi, rho_e):.6f}")
print(f"(the logistic value is minus the conjugate above: {-conj:.6f})")
