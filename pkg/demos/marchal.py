"""Averaging the parabolic ejection over a sphere (3D) or a disk (2D).

Run: python demos/marchal.py
"""
import numpy as np
from scipy.integrate import quad

from orbitforge.kepler import GAMMA, brute_force_sphere_average, marchal_table, montgomery_deformation_gain

rhos = [0.1 * GAMMA / 2 ** k for k in range(7)]

# %% 3D: the normalized gain (A - A_m) gamma / t0^(1/3) tends to 2.
for rho, t0, A, Am, c in marchal_table(3, rhos):
    print(f"3D rho={rho:.5f}  t0={t0:.3e}  A_m - A={Am - A:+.5f}  normalized={c:.5f}")

# %% Cross-check one rung by averaging 10^4 individually integrated directions.
from orbitforge.kepler import averaged_action_difference

rho = rhos[2]
print("shell formula", averaged_action_difference(3, rho)[0])
print("direct average", brute_force_sphere_average(rho))

# %% 2D: still negative. The limit is pi/2 - 3 + 1.5 int_0^1 (arcsin x - x) x^-2.5 dx,
# slightly below the simpler bound pi - 4.
J = quad(lambda x: (np.arcsin(x) - x) * x ** -2.5, 0, 1)[0]
for rho, t0, A, Am, c in marchal_table(2, rhos):
    print(f"2D rho={rho:.5f}  A_m - A={Am - A:+.5f}  normalized={c:.5f}")
print(f"exact limit {np.pi / 2 - 3 + 1.5 * J:.5f}, bound pi - 4 = {np.pi - 4:.5f}")

# %% A local push off the collision ray wins about sqrt(eps) of action.
for eps in (1e-3, 2.5e-4, 6.25e-5):
    print(f"eps={eps:.3e}  gain/sqrt(eps)={montgomery_deformation_gain(eps) / np.sqrt(eps):.4f}")
