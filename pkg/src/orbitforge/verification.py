"""Independent checks of computed orbits.

ODE integration and closure, energy bookkeeping, finite-difference second
variations, and the vertical Hessian identity for relative equilibria.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from .core import (EPS_COLL, MassSystem, PhaseState, accelerations, configuration_scale,
                   lagrange_jacobi_residual, mass_dot, pairwise_distances, potential,
                   potential_stack, reduce_to_center_of_mass)
from .errors import BadParams, CloseApproach
from .paths import FourierLoop, QuadratureSpec, action, min_pairwise_distance

_RK4 = (
    np.array([[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1, 0]], dtype=float),
    np.array([1, 2, 2, 1], dtype=float) / 6,
    np.array([0, 0.5, 0.5, 1.0]),
    4,
)
_RK8 = (_dop.A[:_dop.N_STAGES, :_dop.N_STAGES], _dop.B, _dop.C[:_dop.N_STAGES], 8)
METHODS = {"rk4": _RK4, "dop853": _RK8}


@dataclass
class Trajectory:
    ms: MassSystem
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    method: str
    order: int
    step: float
    steps: int
    energy_drift: float = float("nan")
    meta: dict = field(default_factory=dict)

    def state(self, k):
        return PhaseState(self.positions[k], self.velocities[k])


def _energy(ms, x, v):
    return 0.5 * mass_dot(v, v, ms) - potential_stack(x, ms)


def integrate(ms, state0, T, steps, method="dop853", record_every=1, eps=EPS_COLL):
    """Fixed-step explicit Runge-Kutta integration of the equations of motion."""
    if method not in METHODS:
        raise BadParams(f"unknown method {method!r}")
    if steps < 1:
        raise BadParams("steps must be positive")
    A, b, c, order = METHODS[method]
    h = T / steps
    x = np.array(state0.positions, dtype=float)
    v = np.array(state0.velocities, dtype=float)
    potential(x, ms, eps)
    scale = configuration_scale(x, ms)
    s = len(b)
    kx = np.empty((s,) + x.shape)
    kv = np.empty((s,) + x.shape)
    ts, xs, vs = [0.0], [x.copy()], [v.copy()]
    iu = np.triu_indices(ms.n, 1)
    m = ms.m
    for k in range(steps):
        for i in range(s):
            xi = x + h * np.tensordot(A[i, :i], kx[:i], axes=1) if i else x
            vi = v + h * np.tensordot(A[i, :i], kv[:i], axes=1) if i else v
            kx[i] = vi
            kv[i] = accelerations(xi, ms)
        x = x + h * np.tensordot(b, kx, axes=1)
        v = v + h * np.tensordot(b, kv, axes=1)
        d = pairwise_distances(x)[iu]
        j = int(np.argmin(d))
        dmin = d[j]
        # also stop once the closest pair's free-fall time drops below the step
        tdyn = np.sqrt(dmin ** 3 / (m[iu[0][j]] + m[iu[1][j]])) if np.isfinite(dmin) else 0.0
        if dmin < eps * scale or not np.isfinite(dmin) or tdyn < h:
            raise CloseApproach(f"close approach at t={(k + 1) * h:.6g}", time=(k + 1) * h)
        if (k + 1) % record_every == 0 or k + 1 == steps:
            ts.append((k + 1) * h)
            xs.append(x.copy())
            vs.append(v.copy())
    xs, vs = np.array(xs), np.array(vs)
    E = _energy(ms, xs, vs)
    drift = float(np.max(np.abs(E - E[0])) / max(abs(E[0]), 1e-300))
    return Trajectory(ms, np.array(ts), xs, vs, method, order, h, steps, drift)


def energy_series(traj):
    """H(t) = K/2 - U along a trajectory."""
    return _energy(traj.ms, traj.positions, traj.velocities)


def cluster_energy(traj, cluster):
    """Energy of a sub-cluster: kinetic relative to its own centroid minus internal potential."""
    idx = sorted(set(int(i) for i in cluster))
    if not idx or idx[-1] >= traj.ms.n or idx[0] < 0:
        raise BadParams("bad cluster")
    if len(idx) == 1:
        return np.zeros(len(traj.times))
    sub = MassSystem(tuple(traj.ms.masses[i] for i in idx), traj.ms.dim)
    return _energy(sub, traj.positions[:, idx], traj.velocities[:, idx])


def trajectory_lagrange_jacobi(traj):
    return lagrange_jacobi_residual(traj.times, traj.positions, traj.velocities, traj.ms)


def closure_error(ms, loop, steps=4096, method="dop853"):
    """Mismatch after integrating the loop's t = 0 state for one period.

    Phase-space distance in the mass metric (velocities scaled by T / 2 pi),
    divided by sqrt(I) at t = 0.
    """
    x0, v0 = loop.eval(0.0)
    traj = integrate(ms, PhaseState(x0, v0), loop.period, steps, method, record_every=steps)
    dx = traj.positions[-1] - x0
    dv = (traj.velocities[-1] - v0) * loop.period / (2 * np.pi)
    err = np.sqrt(mass_dot(dx, dx, ms) + mass_dot(dv, dv, ms))
    return float(err / np.sqrt(mass_dot(x0, x0, ms))), traj


def loop_energy_variation(loop, samples=512):
    """Relative spread max|H - mean H| / |mean H| of H(t) sampled on the loop."""
    x, v = loop.eval(loop.sample_times(samples))
    H = _energy(loop.ms, x, v)
    return float(np.max(np.abs(H - H.mean())) / abs(H.mean()))


# -------------------------------------------------------- second variations

def hessian_form(path, var, h=1e-3, quad=None):
    """(A(x + h xi) - 2 A(x) + A(x - h xi)) / h^2."""
    if isinstance(path, FourierLoop):
        A = lambda p: action(p, quad)
    else:
        A = lambda p: action(p)
    return (A(path.shifted(var, h)) - 2 * A(path) + A(path.shifted(var, -h))) / h ** 2


def tilde_u(x, ms):
    """Scale-invariant potential I^(1/2) U."""
    return float(np.sqrt(mass_dot(x, x, ms)) * potential(x, ms))


def d2_tilde_u(x0, z0, ms, rel_step=1e-4):
    x0 = np.asarray(x0, dtype=float)
    z0 = np.asarray(z0, dtype=float)
    h = rel_step * np.sqrt(np.sum(x0 ** 2)) / max(np.sqrt(np.sum(z0 ** 2)), 1e-300)
    f0 = tilde_u(x0, ms)
    return (tilde_u(x0 + h * z0, ms) - 2 * f0 + tilde_u(x0 - h * z0, ms)) / h ** 2


def _grad_tilde_u(x0, ms):
    I = mass_dot(x0, x0, ms)
    U = potential(x0, ms)
    xr = reduce_to_center_of_mass(x0, ms)
    # mass-metric gradient: I^(1/2) grad U + U I^(-1/2) x
    return np.sqrt(I) * accelerations(x0, ms) + U / np.sqrt(I) * xr


def _vertical(z0, ms):
    z = np.zeros((ms.n, 3))
    z[:, 2] = z0
    return z


def vertical_hessian_identity(x0, z0, ms, T, h=1e-3, samples=256, tol=1e-8):
    """Second variation of a relative equilibrium along z0 cos(2 pi t / T).

    x0: planar central configuration (n, 2) or (n, 3) with zero z. z0: vertical
    components (n,), mass-weighted mean zero. Returns (lhs, rhs) where lhs is
    the finite-difference Hessian of the loop action and
    rhs = I0^(-1/2) d2 tilde_U(x0)(z0, z0) T/2.
    """
    from .paths import relative_equilibrium_loop

    if ms.dim != 3:
        raise BadParams("vertical variations need dim = 3")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[1] == 2:
        x0 = np.hstack([x0, np.zeros((ms.n, 1))])
    if np.max(np.abs(x0[:, 2])) > 1e-12 * np.max(np.abs(x0)):
        raise BadParams("x0 must be planar (z = 0)")
    z0 = np.asarray(z0, dtype=float)
    if abs(np.dot(ms.m, z0)) > 1e-12 * max(1.0, np.sum(np.abs(z0))) * ms.total:
        raise BadParams("z0 must have zero mass-weighted mean")
    if np.allclose(z0, 0):
        raise BadParams("z0 must be non-zero")
    x0 = reduce_to_center_of_mass(x0, ms)
    g = _grad_tilde_u(x0, ms)
    if np.max(np.abs(g)) > tol * tilde_u(x0, ms) / np.sqrt(mass_dot(x0, x0, ms)):
        raise BadParams("x0 is not a central configuration")
    loop = relative_equilibrium_loop(x0, ms, T)
    xs = loop.eval(0.0)[0]   # rescaled x0
    var = np.zeros_like(loop.coeffs)
    var[:, 2, 1] = z0
    lhs = hessian_form(loop, var, h, QuadratureSpec(samples))
    I0 = mass_dot(xs, xs, ms)
    rhs = I0 ** -0.5 * d2_tilde_u(xs, _vertical(z0, ms), ms) * T / 2
    return lhs, rhs


def vertical_variation_basis(ms):
    """Orthonormal (mass metric) basis of mean-zero vertical variations."""
    m = ms.m
    Q, _ = np.linalg.qr(np.hstack([np.sqrt(m)[:, None], np.eye(ms.n)]))
    B = Q[:, 1:ms.n] / np.sqrt(m)[:, None]
    return B.T


def most_negative_vertical_variation(x0, ms):
    """Minimise the Rayleigh quotient d2 tilde_U(z, z) / |z|^2 over mean-zero vertical z.

    Returns (z0, quotient). The quadratic form is assembled from finite
    differences by polarization.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[1] == 2:
        x0 = np.hstack([x0, np.zeros((ms.n, 1))])
    B = vertical_variation_basis(ms)
    k = len(B)
    Q = np.zeros((k, k))
    for i in range(k):
        Q[i, i] = d2_tilde_u(x0, _vertical(B[i], ms), ms)
    for i in range(k):
        for j in range(i + 1, k):
            s = d2_tilde_u(x0, _vertical(B[i] + B[j], ms), ms)
            Q[i, j] = Q[j, i] = 0.5 * (s - Q[i, i] - Q[j, j])
    w, V = np.linalg.eigh(Q)
    return V[:, 0] @ B, float(w[0])


def p12_hessian(u, T, h=1e-3):
    """Second variation of the Lagrange arc x_u along the opening variation xi."""
    from .minimizer import lagrange_arc, xi_variation

    return hessian_form(lagrange_arc(u, T), xi_variation(T), h)


def locate_sign_flip(T, lo, hi, tol=1e-6, h=1e-3):
    """Bisection for the zero of u -> p12_hessian(u, T) in [lo, hi]."""
    flo, fhi = p12_hessian(lo, T, h), p12_hessian(hi, T, h)
    if not flo < 0 < fhi:
        raise BadParams(f"no sign change bracketed: {flo:.3e}, {fhi:.3e}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if p12_hessian(mid, T, h) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def planarity(x):
    """Smallest over largest principal extent of a centered point cloud."""
    pts = np.asarray(x).reshape(-1, np.asarray(x).shape[-1])
    pts = pts - pts.mean(axis=0)
    s = np.linalg.svd(pts, compute_uv=False)
    return float(s[-1] / s[0])


def verify_loop(loop, G=None, steps=4096, samples=None):
    """Verification summary for a periodic loop."""
    from .symmetry import invariance_defect

    ms = loop.ms
    quad = QuadratureSpec(samples or max(256, 4 * loop.modes))
    closure, traj = closure_error(ms, loop, steps)
    rec = max(1, steps // 2048)
    x0, v0 = loop.eval(0.0)
    fine = integrate(ms, PhaseState(x0, v0), loop.period, steps, record_every=rec)
    lj = trajectory_lagrange_jacobi(fine)
    dmin, tmin, pair = min_pairwise_distance(loop, quad)
    out = {
        "closure_error": closure,
        "energy_drift": fine.energy_drift,
        "lagrange_jacobi_max": float(np.max(np.abs(lj))),
        "min_distance": dmin,
        "min_distance_time": tmin,
        "min_distance_pair": list(pair),
        "energy_variation": loop_energy_variation(loop),
        "action": action(loop, quad),
    }
    if G is not None:
        out["invariance_defect"] = invariance_defect(G, loop)
    return out
