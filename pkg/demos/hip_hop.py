"""Four equal masses with x(t + T/2) = -x(t): the minimizer leaves the plane.

Run: python demos/hip_hop.py
"""
import numpy as np

from orbitforge.core import MassSystem, preset_configuration
from orbitforge.minimizer import multistart_loop
from orbitforge.paths import QuadratureSpec, action, relative_equilibrium_loop
from orbitforge.verification import closure_error, planarity

ms = MassSystem.equal(4, 3)
T = 2 * np.pi

# %% The rotating square is antisymmetric too, so it competes in the same class.
square = relative_equilibrium_loop(preset_configuration("regular_ngon", ms, n=4), ms, T, modes=24)
print(f"rotating square: action {action(square, QuadratureSpec(256)):.6f}")

# %% Minimize over antisymmetric loops.
from orbitforge.symmetry import preset_group

loop, rep, _ = multistart_loop(ms, preset_group("italian", 4), range(4), period=T)
print(f"minimizer: action {rep.action:.6f} ({rep.reason})")

# %% Smallest over largest principal extent of the point cloud: clearly non-planar.
x, _ = loop.eval(loop.sample_times(512))
print(f"planarity ratio {planarity(x):.3f}")
print(f"min distance {rep.min_distance:.3f}")
print(f"closure error {closure_error(ms, loop)[0]:.2e}")
