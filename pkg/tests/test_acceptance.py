"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed together in the
pytest terminal summary (and directly when this file is run as a script).
"""
import time

import numpy as np
import pytest

from orbitforge.core import MassSystem, PhaseState, preset_configuration
from orbitforge.kepler import (GAMMA, ParabolicEjection, averaged_action_difference,
                               brute_force_sphere_average, disk_potential)
from orbitforge.minimizer import (hat_a2, lagrange_action_bound, lagrange_arc, minimize_fixed_ends,
                                  multistart_loop)
from orbitforge.paths import NodePath, QuadratureSpec, action_on_interval, blow_up
from orbitforge.symmetry import preset_group
from orbitforge.verification import (closure_error, energy_series, integrate, locate_sign_flip,
                                     loop_energy_variation, most_negative_vertical_variation,
                                     p12_hessian, planarity, trajectory_lagrange_jacobi,
                                     vertical_hessian_identity)

from conftest import ACCEPTANCE, smooth_loop
from test_kepler import disk_quadrature
from test_minimizer import radial_collision_action


def record(k, checks, started):
    """Store the verdict for criterion k; ``checks`` maps a label to (ok, value)."""
    ok = all(c[0] for c in checks.values())
    parts = [f"{name}={val}{'' if good else ' (fail)'}" for name, (good, val) in checks.items()]
    ACCEPTANCE[k] = (ok, f"[{time.perf_counter() - started:.1f}s] " + ", ".join(parts))
    return ok


def fmt(x):
    return f"{x:.4g}"


def ladder(steps):
    return [0.1 * GAMMA / 2 ** k for k in range(steps)]


def test_criterion_01_parabolic_constant():
    t0 = time.perf_counter()
    ej = ParabolicEjection()
    gamma_err = abs(GAMMA ** 3 - 4.5)
    t = np.linspace(1e-4, 1.0, 200001)
    resid = float(np.max(ej.kepler_residual(t)))
    assert record(1, {"|gamma^3 - 9/2|": (gamma_err < 1e-12, fmt(gamma_err)),
                      "max Kepler residual": (resid < 1e-8, fmt(resid))}, t0)


def test_criterion_02_blow_up_scaling():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        loop = smooth_loop(rng, modes=4, period=1.0)
        T1, T2 = 0.05, 0.3
        for lam in (0.5, 2.0, 3.0):
            lhs = action_on_interval(blow_up(loop, lam), T1, T2)
            rhs = lam ** (-1 / 3) * action_on_interval(loop, lam * T1, lam * T2)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    assert record(2, {"max rel err": (worst < 1e-6, fmt(worst))}, t0)


def test_criterion_03_marchal_sphere():
    t0 = time.perf_counter()
    rhos = ladder(6)
    rows = [averaged_action_difference(3, rho) for rho in rhos]
    negative = all(d < 0 for d, _ in rows)
    d_last, t_last = rows[-1]
    norm = -d_last * GAMMA / t_last ** (1 / 3)
    rung = rhos[2]
    brute = brute_force_sphere_average(rung, n_dirs=10000)
    closed = rows[2][0]
    agree = abs(brute - closed) / abs(closed)
    assert record(3, {"normalized": (abs(norm - 2) / 2 < 0.1, fmt(norm)),
                      "A_m - A < 0 on all rungs": (negative, negative),
                      "brute-force rel diff": (agree < 1e-3, fmt(agree))}, t0)


def test_criterion_04_marchal_disk():
    t0 = time.perf_counter()
    rhos = ladder(6)
    rows = [averaged_action_difference(2, rho) for rho in rhos]
    d_last, t_last = rows[-1]
    norm = d_last * GAMMA / t_last ** (1 / 3)
    target = np.pi - 4
    disk_err = max(abs(disk_quadrature(r, 1.0) - disk_potential(r, 1.0)) / disk_potential(r, 1.0)
                   for r in (0.0, 0.3, 0.8, 1.0, 1.5, 3.0))
    assert record(4, {"normalized": (abs(norm - target) / abs(target) < 0.1, fmt(norm)),
                      "target pi - 4": (True, fmt(target)),
                      "disk formula vs quadrature": (disk_err < 1e-3, fmt(disk_err))}, t0)


def test_criterion_05_hat_a2():
    t0 = time.perf_counter()
    T = 12.0
    closed = 2 ** (-5 / 3) * 3 ** (2 / 3) * np.pi ** (2 / 3) * T ** (1 / 3)
    quad_val = action_on_interval(lagrange_arc(0.0, T), 0.0, T / 12, panels=64)
    err = abs(quad_val - closed) / closed
    a0 = abs(lagrange_action_bound(0.0, T) - hat_a2(T)) / hat_a2(T)
    a6 = abs(lagrange_action_bound(np.pi / 6, T) - 2 ** (-2 / 3) * hat_a2(T)) / hat_a2(T)
    q6 = action_on_interval(lagrange_arc(np.pi / 6, T), 0.0, T / 12, panels=64)
    e6 = abs(q6 - lagrange_action_bound(np.pi / 6, T)) / q6
    assert record(5, {"hat A2 rel err": (err < 1e-8, fmt(err)),
                      "A(0) consistency": (a0 < 1e-8, fmt(a0)),
                      "A(pi/6) consistency": (max(a6, e6) < 1e-8, fmt(max(a6, e6)))}, t0)


def test_criterion_06_eight():
    t0 = time.perf_counter()
    ms = MassSystem.equal(3, 3)
    G = preset_group("d6_eight")
    loop, rep, _ = multistart_loop(ms, G, range(8), amplitude=1.5, period=12.0)
    bound = 12 * hat_a2(12.0)
    closure, _ = closure_error(ms, loop)
    defect = rep.extra["invariance_defect"]
    assert record(6, {"converged": (rep.converged, rep.reason),
                      "min distance": (rep.min_distance > 0.1, fmt(rep.min_distance)),
                      "action": (rep.action < bound, f"{rep.action:.6f} < {bound:.4f}"),
                      "invariance defect": (defect < 1e-10, fmt(defect)),
                      "closure": (closure < 1e-3, fmt(closure))}, t0)


def test_criterion_07_hip_hop():
    t0 = time.perf_counter()
    ms = MassSystem.equal(4, 3)
    G = preset_group("italian", 4)
    loop, rep, _ = multistart_loop(ms, G, range(4), period=2 * np.pi)
    x, _ = loop.eval(loop.sample_times(512))
    flat = planarity(x)
    assert record(7, {"converged": (rep.converged, rep.reason),
                      "planarity ratio": (flat > 1e-2, fmt(flat)),
                      "min distance": (rep.min_distance > 0, fmt(rep.min_distance))}, t0)


def test_criterion_08_vertical_hessian_equilateral():
    t0 = time.perf_counter()
    ms = MassSystem.equal(3, 3)
    x0 = preset_configuration("equilateral", ms)
    z0, quotient = most_negative_vertical_variation(x0, ms)
    lhs, rhs = vertical_hessian_identity(x0, z0, ms, 2 * np.pi)
    rel = abs(lhs - rhs) / abs(rhs) if rhs != 0 else float("inf")
    assert record(8, {"lhs": (True, fmt(lhs)), "rhs": (True, fmt(rhs)),
                      "rel agreement": (rel < 1e-3, fmt(rel)),
                      "negative": (lhs < 0 and rhs < 0, f"quotient {fmt(quotient)}")}, t0)


def test_criterion_09_p12_sign_flip():
    t0 = time.perf_counter()
    T = 12.0
    lo, hi = np.pi / 6 - 0.05, np.pi / 6 + 0.05
    s_lo, s_hi = p12_hessian(lo, T), p12_hessian(hi, T)
    u = locate_sign_flip(T, lo, hi, tol=1e-6)
    assert record(9, {"bracket": (s_lo < 0 < s_hi, f"{fmt(s_lo)} / {fmt(s_hi)}"),
                      "flip at": (abs(u - np.pi / 6) < 0.02, f"{u:.7f}")}, t0)


def test_criterion_10_conservation(eight):
    t0 = time.perf_counter()
    ms = MassSystem((1.0, 0.8, 1.2), 3)
    x = np.array([[1.0, 0.0, 0.1], [-0.5, 0.9, 0.0], [-0.5, -0.8, -0.1]])
    v = np.array([[0.0, 0.5, 0.0], [-0.45, -0.25, 0.05], [0.4, -0.2, -0.05]])
    traj = integrate(ms, PhaseState(x, v), 2.0, 4000)
    H = energy_series(traj)
    drift = float(np.max(np.abs(H - H[0])) / abs(H[0]))
    lj = float(np.max(np.abs(trajectory_lagrange_jacobi(traj))))
    G = eight[2]
    ms3 = MassSystem.equal(3, 3)
    var = []
    for modes in (16, 24, 32):
        loop, _, _ = multistart_loop(ms3, G, [0], modes=modes, amplitude=1.5, period=12.0)
        var.append(loop_energy_variation(loop))
    decreasing = all(b < a for a, b in zip(var, var[1:]))
    assert record(10, {"energy drift": (drift < 1e-8, fmt(drift)),
                       "Lagrange-Jacobi": (lj < 1e-4, fmt(lj)),
                       "H variation (24 modes)": (var[1] < 1e-3, fmt(var[1])),
                       "decreasing 16/24/32": (decreasing, "/".join(fmt(e) for e in var))}, t0)


def test_criterion_11_fixed_ends():
    t0 = time.perf_counter()
    ms = MassSystem.equal(2, 2)
    # quarter of the unit-separation circle
    Tq = 0.5 * np.pi / np.sqrt(2)
    _, r1 = minimize_fixed_ends(ms, np.array([[-0.5, 0.0], [0.5, 0.0]]),
                                np.array([[0.0, -0.5], [0.0, 0.5]]), Tq, n_nodes=256)
    e1 = abs(r1.action - 1.5 * Tq) / (1.5 * Tq)
    # short time, distant bodies
    xd = np.array([[-50.0, 0.0], [50.0, 0.0]])
    _, r2 = minimize_fixed_ends(ms, xd, xd, 1e-3, n_nodes=32)
    e2 = abs(r2.action - 1e-3 / 100) / (1e-3 / 100)
    # swap through collision
    xi = np.array([[-1.0, 0.0], [1.0, 0.0]])
    t = np.linspace(0, 2.0, 130)[1:-1]
    nodes = xi[None] - 2 * xi[None] * (t / 2.0)[:, None, None]
    nodes[:, 0, 1] += 0.3 * np.sin(np.pi * t / 2.0)
    nodes[:, 1, 1] -= 0.3 * np.sin(np.pi * t / 2.0)
    _, r3 = minimize_fixed_ends(ms, xi, -xi, 2.0, init=NodePath(ms, xi, -xi, nodes, 2.0))
    coll = radial_collision_action(2.0, 1.0)
    assert record(11, {"circle arc rel err": (r1.converged and e1 < 1e-4, fmt(e1)),
                       "stationary rel err": (e2 < 1e-4, fmt(e2)),
                       "swap min distance": (r3.converged and r3.min_distance > 0, fmt(r3.min_distance)),
                       "swap action": (r3.action < coll, f"{r3.action:.4f} < {coll:.4f}")}, t0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
