"""Pointwise n-body quantities in units with G = 1.

Configurations are plain ``(n, dim)`` arrays; the mass metric is
``x . y = sum_i m_i <r_i - r_G, s_i - s_G>``.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BadParams, CollisionError, GridError

EPS_COLL = 1e-12


@dataclass(frozen=True)
class MassSystem:
    masses: tuple
    dim: int = 3

    def __post_init__(self):
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if len(masses) < 2:
            raise BadParams("need at least two bodies")
        if any(not m > 0 for m in masses):
            raise BadParams(f"masses must be positive, got {masses}")
        if self.dim not in (2, 3):
            raise BadParams(f"dim must be 2 or 3, got {self.dim}")

    @classmethod
    def equal(cls, n, dim=3, mass=1.0):
        return cls((mass,) * n, dim)

    @property
    def n(self):
        return len(self.masses)

    @property
    def m(self):
        """Masses as an array."""
        return np.asarray(self.masses)

    @property
    def total(self):
        return float(sum(self.masses))


@dataclass(frozen=True)
class PhaseState:
    positions: np.ndarray
    velocities: np.ndarray


@dataclass(frozen=True)
class InvariantSet:
    I: float
    J: float
    K: float
    U: float
    H: float
    L: float


def _check_shape(x, ms):
    x = np.asarray(x, dtype=float)
    if x.shape[-2:] != (ms.n, ms.dim):
        raise BadParams(f"expected trailing shape {(ms.n, ms.dim)}, got {x.shape}")
    return x


def center_of_mass(x, ms):
    x = np.asarray(x, dtype=float)
    return np.einsum("i,...id->...d", ms.m, x) / ms.total


def reduce_to_center_of_mass(x, ms):
    """Translate so the mass-weighted centroid sits at the origin."""
    x = _check_shape(x, ms)
    return x - center_of_mass(x, ms)[..., None, :]


def mass_dot(x, y, ms):
    """Mass scalar product of two (stacks of) configurations."""
    x = reduce_to_center_of_mass(x, ms)
    y = reduce_to_center_of_mass(y, ms)
    return np.einsum("i,...id,...id->...", ms.m, x, y)


def configuration_scale(x, ms):
    xr = reduce_to_center_of_mass(x, ms)
    s = float(np.max(np.linalg.norm(xr, axis=-1)))
    return s if s > 0 else 1.0


def pairwise_distances(x):
    """Distance matrix (..., n, n)."""
    x = np.asarray(x, dtype=float)
    diff = x[..., :, None, :] - x[..., None, :, :]
    return np.sqrt(np.einsum("...d,...d->...", diff, diff))


def _closest_pair(x):
    r = pairwise_distances(x)
    n = r.shape[-1]
    iu = np.triu_indices(n, 1)
    k = int(np.argmin(r[iu]))
    return float(r[iu][k]), (int(iu[0][k]), int(iu[1][k]))


def check_collision(x, ms, eps=EPS_COLL):
    d, pair = _closest_pair(x)
    if d < eps * configuration_scale(x, ms):
        raise CollisionError(f"bodies {pair} collide (distance {d:.3e})", pair=pair)


def potential(x, ms, eps=EPS_COLL):
    """U = sum_{i<j} m_i m_j / |r_i - r_j|."""
    x = _check_shape(x, ms)
    if x.ndim != 2:
        raise BadParams("potential expects a single configuration")
    check_collision(x, ms, eps)
    r = pairwise_distances(x)
    iu = np.triu_indices(ms.n, 1)
    m = ms.m
    return float(np.sum(m[iu[0]] * m[iu[1]] / r[iu]))


def accelerations(x, ms):
    """Per-body Newtonian accelerations for a stack (..., n, d); no collision check."""
    m = ms.m
    diff = x[..., None, :, :] - x[..., :, None, :]  # r_j - r_i at [i, j]
    r2 = np.einsum("...d,...d->...", diff, diff)
    n = ms.n
    r2[..., np.arange(n), np.arange(n)] = 1.0
    inv3 = r2 ** -1.5
    inv3[..., np.arange(n), np.arange(n)] = 0.0
    return np.einsum("...ij,j,...ijd->...id", inv3, m, diff)


def grad_potential(x, ms, eps=EPS_COLL):
    """Gradient of U for the mass metric, i.e. the acceleration field."""
    x = _check_shape(x, ms)
    check_collision(x, ms, eps)
    return accelerations(x, ms)


def potential_stack(x, ms):
    """Potential for a stack (..., n, d) of configurations; no collision check."""
    r = pairwise_distances(x)
    iu = np.triu_indices(ms.n, 1)
    m = ms.m
    return np.sum(m[iu[0]] * m[iu[1]] / r[..., iu[0], iu[1]], axis=-1)


def scalar_invariants(state, ms, eps=EPS_COLL):
    x = _check_shape(state.positions, ms)
    y = _check_shape(state.velocities, ms)
    I = float(mass_dot(x, x, ms))
    J = float(mass_dot(x, y, ms))
    K = float(mass_dot(y, y, ms))
    U = potential(x, ms, eps)
    return InvariantSet(I=I, J=J, K=K, U=U, H=0.5 * K - U, L=0.5 * K + U)


def _pad(x, dim):
    out = np.zeros((x.shape[0], dim))
    out[:, : x.shape[1]] = x
    return out


def _euler_ratio(m_mid, m_left, m_right):
    # middle at 0, left at -1, right at z > 0; central means a_i proportional to (x_i - c)
    m = np.array([m_left, m_mid, m_right])

    def defect(z):
        xs = np.array([-1.0, 0.0, z])
        acc = np.array([sum(m[j] * np.sign(xs[j] - xs[i]) / (xs[j] - xs[i]) ** 2
                            for j in range(3) if j != i) for i in range(3)])
        c = np.dot(m, xs) / m.sum()
        lam = (acc[2] - acc[0]) / ((xs[2] - c) - (xs[0] - c))
        return acc[1] - lam * (xs[1] - c)

    return brentq(defect, 1e-3, 1e3, xtol=1e-15)


def preset_configuration(kind, ms=None, *, side=1.0, circumradius=1.0, spacing=1.0,
                         base=1.0, height=1.0, n=None, dim=None):
    """Centered preset configurations.

    ``equilateral`` puts body 0 on the positive x-axis; ``euler_collinear`` puts
    body 0 in the middle, body 1 on the positive x side; ``isosceles`` has
    bodies 0 and 1 on the base and body 2 at the apex.
    """
    if ms is None:
        count = {"equilateral": 3, "euler_collinear": 3, "isosceles": 3}.get(kind, n)
        if count is None:
            raise BadParams(f"{kind} needs a body count")
        ms = MassSystem.equal(count, dim or 2)
    dim = dim or ms.dim
    if kind == "equilateral":
        if ms.n != 3:
            raise BadParams("equilateral needs 3 bodies")
        ang = 2 * np.pi * np.arange(3) / 3
        x = side / np.sqrt(3) * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif kind == "regular_ngon":
        k = n if n is not None else ms.n
        if k != ms.n or k < 2:
            raise BadParams("regular_ngon body count mismatch")
        ang = 2 * np.pi * np.arange(k) / k
        x = circumradius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif kind == "euler_collinear":
        if ms.n != 3:
            raise BadParams("euler_collinear needs 3 bodies")
        m0, m1, m2 = ms.masses
        z = _euler_ratio(m0, m2, m1)
        scale = spacing / 1.0
        x = np.array([[0.0, 0.0], [z * scale, 0.0], [-scale, 0.0]])
    elif kind == "isosceles":
        if ms.n != 3:
            raise BadParams("isosceles needs 3 bodies")
        x = np.array([[-base / 2, 0.0], [base / 2, 0.0], [0.0, height]])
    else:
        raise BadParams(f"unknown preset {kind!r}")
    if dim < 2:
        raise BadParams("dim must be at least 2")
    x = _pad(x, dim)
    return reduce_to_center_of_mass(x, MassSystem(ms.masses, dim))


def lagrange_jacobi_residual(times, positions, velocities, ms):
    """I'' - 4H - 2U at interior samples of a uniformly sampled trajectory.

    I'' comes from second-order central differences of the sampled I(t).
    Returns an array aligned with ``times[1:-1]``.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise GridError("need at least 3 samples")
    h = np.diff(times)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise GridError("time grid must be uniform")
    x = np.asarray(positions, dtype=float)
    v = np.asarray(velocities, dtype=float)
    I = mass_dot(x, x, ms)
    K = mass_dot(v, v, ms)
    U = potential_stack(x, ms)
    H = 0.5 * K - U
    Idd = (I[2:] - 2 * I[1:-1] + I[:-2]) / h[0] ** 2
    return Idd - 4 * H[1:-1] - 2 * U[1:-1]
