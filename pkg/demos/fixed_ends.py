"""Minimizers between fixed configurations avoid interior collisions.

Run: python demos/fixed_ends.py
"""
import numpy as np

from orbitforge.core import MassSystem
from orbitforge.minimizer import minimize_fixed_ends
from orbitforge.paths import NodePath

ms = MassSystem.equal(2, 2)

# %% A quarter of the circular orbit at unit separation: L = 3/2 along it.
Tq = 0.5 * np.pi / np.sqrt(2)
path, rep = minimize_fixed_ends(ms, [[-0.5, 0], [0.5, 0]], [[0, -0.5], [0, 0.5]], Tq, n_nodes=256)
print(f"quarter arc: action {rep.action:.6f}, circle gives {1.5 * Tq:.6f}")
print("radius along the path:", np.ptp(np.linalg.norm(path.all_nodes[:, 0], axis=1)))

# %% Swap the two bodies. The straight segment runs through a collision;
# the minimizer bends around it.
xi = np.array([[-1.0, 0.0], [1.0, 0.0]])
t = np.linspace(0, 2.0, 130)[1:-1]
nodes = xi[None] * (1 - t)[:, None, None]
nodes[:, 0, 1] += 0.3 * np.sin(np.pi * t / 2)
nodes[:, 1, 1] -= 0.3 * np.sin(np.pi * t / 2)
path, rep = minimize_fixed_ends(ms, xi, -xi, 2.0, init=NodePath(ms, xi, -xi, nodes, 2.0))
print(f"swap: action {rep.action:.4f}, closest approach {rep.min_distance:.3f}, {rep.reason}")
