"""The P12 family: from the Eight (u = 0) to the Lagrange triangle (u = pi/6).

Run: python demos/p12_family.py
"""
import numpy as np

from orbitforge.minimizer import lagrange_action_bound, minimize_p12
from orbitforge.verification import locate_sign_flip, p12_hessian, planarity

T = 12.0

# %% Minimize over [0, T/12] with endpoints free inside their symmetry sets.
print("   u      action     A(u)     planarity   Hessian(xi)")
for u in np.linspace(0, np.pi / 6, 6):
    path, rep = minimize_p12(u, T)
    print(f"{u:6.3f}  {rep.action:9.6f}  {lagrange_action_bound(u, T):9.6f}"
          f"  {planarity(path.all_nodes):9.2e}  {p12_hessian(u, T):+9.4f}")

# %% The rotating-triangle arc stops being a local minimizer exactly at pi/6.
u = locate_sign_flip(T, np.pi / 6 - 0.05, np.pi / 6 + 0.05)
print(f"Hessian along xi changes sign at u = {u:.7f} (pi/6 = {np.pi / 6:.7f})")
