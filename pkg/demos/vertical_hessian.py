"""Vertical second variation of planar relative equilibria, and the blow-up map.

Run: python demos/vertical_hessian.py
"""
import numpy as np

from orbitforge.core import MassSystem, preset_configuration
from orbitforge.paths import QuadratureSpec, action, blow_up, relative_equilibrium_loop
from orbitforge.verification import most_negative_vertical_variation, vertical_hessian_identity

T = 2 * np.pi

# %% Square of four unit masses: some vertical bending lowers the action.
ms = MassSystem.equal(4, 3)
x0 = preset_configuration("regular_ngon", ms, n=4)
z0, q = most_negative_vertical_variation(x0, ms)
lhs, rhs = vertical_hessian_identity(x0, z0, ms, T)
print("square: z0 =", np.round(z0, 4), f" Rayleigh quotient {q:.4f}")
print(f"  loop Hessian {lhs:.6f}   predicted {rhs:.6f}")

# %% Equilateral triangle: the only vertical moves are tilts of the plane,
# so both sides vanish and the test says nothing.
ms3 = MassSystem.equal(3, 3)
x3 = preset_configuration("equilateral", ms3)
z3, q3 = most_negative_vertical_variation(x3, ms3)
print(f"triangle: quotient {q3:.2e}, identity {vertical_hessian_identity(x3, z3, ms3, T)}")

# %% Blow-up x(t) -> lam^(-2/3) x(lam t) keeps Newton's equations and scales the action by lam^(-1/3).
loop = relative_equilibrium_loop(x0, ms, T, modes=8)
quad = QuadratureSpec(128)
for lam in (0.5, 2.0, 8.0):
    ratio = action(blow_up(loop, lam), quad) / action(loop, quad)
    print(f"lam={lam}: action ratio {ratio:.10f}  lam^(-1/3) = {lam ** (-1 / 3):.10f}")
