"""Parabolic ejections and averaged perturbations of collision paths.

The Kepler problem here is one particle attracted by a fixed centre,
r'' = -k r / |r|^3, with k = 1 unless stated. Singular integrands near the
collision instant (~ t^(-2/3)) are integrated in the variable tau = t^(1/3).
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .core import MassSystem, mass_dot, potential, reduce_to_center_of_mass, accelerations
from .errors import BadParams
from .paths import AnalyticPath

GAMMA = (9 / 2) ** (1 / 3)


@dataclass(frozen=True)
class ParabolicEjection:
    """r(t) = gamma t^(2/3) c with gamma^3 = 9 k / 2."""
    direction: tuple = (1.0, 0.0, 0.0)
    attraction: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.direction, dtype=float)
        if not np.isclose(np.linalg.norm(c), 1.0):
            raise BadParams("direction must be a unit vector")
        if not self.attraction > 0:
            raise BadParams("attraction must be positive")

    @property
    def gamma(self):
        return (4.5 * self.attraction) ** (1 / 3)

    @property
    def c(self):
        return np.asarray(self.direction, dtype=float)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return self.gamma * t[..., None] ** (2 / 3) * self.c

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        return (2 / 3) * self.gamma * t[..., None] ** (-1 / 3) * self.c

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        return -(2 / 9) * self.gamma * t[..., None] ** (-4 / 3) * self.c

    def kepler_residual(self, t):
        """|r'' + k r / |r|^3| with analytic derivatives."""
        r = self.position(t)
        rn = np.linalg.norm(r, axis=-1, keepdims=True)
        return np.linalg.norm(self.acceleration(t) + self.attraction * r / rn ** 3, axis=-1)

    def action(self, t1, t2):
        """Closed-form int_{t1}^{t2} (|r'|^2/2 + k/|r|) dt."""
        return (4 / 3) * self.gamma ** 2 * (t2 ** (1 / 3) - t1 ** (1 / 3))

    def as_two_body_path(self, t_start=0.0, t_end=1.0):
        """Two bodies of mass k/2 at -r/2, +r/2: their relative motion is this ejection.

        The two-body action equals (k/4) times the Kepler action.
        """
        half = 0.5 * self.attraction
        ms = MassSystem((half, half), len(self.c))

        def pos(t):
            r = self.position(t)
            return np.stack([-0.5 * r, 0.5 * r], axis=-2)

        def vel(t):
            v = self.velocity(t)
            return np.stack([-0.5 * v, 0.5 * v], axis=-2)

        return AnalyticPath(ms, pos, vel, t_start, t_end, singular_start=(t_start == 0.0))


# ------------------------------------------------------ averaged potentials

def sphere_shell_potential(r, R):
    """Potential of a unit-mass hollow sphere of radius R at distance r."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise BadParams("R must be positive")
    r = np.asarray(r, dtype=float)
    return np.where(r <= R, 1.0 / R, 1.0 / np.maximum(r, R))


def _arcsin_over(x):
    """arcsin(x) / x, continuous at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, 1 + x * x / 6 + 3 * x ** 4 / 40, np.arcsin(np.clip(xs, -1, 1)) / xs)


def disk_potential(r, R):
    """Potential of the unit-mass disk carrying the projected sphere density."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise BadParams("R must be positive")
    r = np.asarray(r, dtype=float)
    inside = np.pi / (2 * R)
    ratio = np.minimum(R / np.maximum(r, R), 1.0)
    outside = _arcsin_over(ratio) / np.maximum(r, R)
    return np.where(r <= R, inside, outside)


def disk_density(x, R):
    """Surface density 1 / (2 pi R sqrt(R^2 - x^2)) at radius x < R."""
    return 1.0 / (2 * np.pi * R * np.sqrt(R * R - np.asarray(x) ** 2))


# ---------------------------------------------------- Marchal averaging

def _check_window(rho, T, gamma):
    if not rho > 0 or not T > 0:
        raise BadParams("rho and T must be positive")
    if rho > 0.1 * gamma * T ** (2 / 3):
        raise BadParams(f"rho={rho} outside the small-rho window rho <= 0.1 gamma T^(2/3)")


def crossing_time(c, rho, T, rtol=1e-12):
    """Solve c t^(2/3) = rho (1 - t/T) on (0, T) by bisection."""
    lo, hi = 0.0, T
    f = lambda t: c * t ** (2 / 3) - rho * (1 - t / T)
    if not (f(lo) < 0 < f(hi)):
        raise BadParams("no crossing in (0, T)")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _inner_integral(c, rho, T, t0, inside_factor=1.0):
    """int_0^t0 [inside_factor / R(t) - 1/(c t^(2/3))] dt via t = tau^3."""
    f = lambda tau: inside_factor * 3 * tau * tau / (rho * (1 - tau ** 3 / T)) - 3 / c
    val, _ = quad(f, 0.0, t0 ** (1 / 3), epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def averaged_action_difference(dim, rho, T=1.0):
    """A_m - A for the averaged perturbation of the parabolic ejection on [0, T].

    dim 3 averages over the sphere (hollow-shell potential); dim 2 over the
    disk with projected density. Returns (A_m - A, t0) with t0 the exit time
    |r(t0)| = R(t0).
    """
    if dim not in (2, 3):
        raise BadParams("dim must be 2 or 3")
    _check_window(rho, T, GAMMA)
    t0 = crossing_time(GAMMA, rho, T)
    kin = rho ** 2 / (2 * T)
    if dim == 3:
        return kin + _inner_integral(GAMMA, rho, T, t0), t0
    inner = _inner_integral(GAMMA, rho, T, t0, inside_factor=np.pi / 2)

    def outer(t):
        R = rho * (1 - t / T)
        r = GAMMA * t ** (2 / 3)
        return (_arcsin_over(R / r) - 1.0) / r

    # sqrt-type behaviour at t0 is absorbed by the adaptive rule
    tail, _ = quad(outer, t0, T, epsabs=1e-15, epsrel=1e-12, limit=400)
    return kin + inner + tail, t0


def fibonacci_sphere(n_dirs):
    """Antipodally symmetric near-uniform directions (n_dirs even)."""
    half = n_dirs // 2
    k = np.arange(half) + 0.5
    z = 1 - 2 * k / half
    phi = np.pi * (1 + 5 ** 0.5) * k
    s = np.sqrt(1 - z * z)
    d = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    return np.concatenate([d, -d])


def brute_force_sphere_average(rho, T=1.0, n_dirs=10000, panels=400, order=8):
    """A_m - A by averaging per-direction actions over ``n_dirs`` directions.

    Each direction's perturbed action is integrated on a tau = t^(1/3) grid;
    no shell potential is used.
    """
    _check_window(rho, T, GAMMA)
    ej = ParabolicEjection((0.0, 0.0, 1.0))
    dirs = fibonacci_sphere(n_dirs)
    xg, wg = np.polynomial.legendre.leggauss(order)
    t0 = crossing_time(GAMMA, rho, T)
    # concentrate panels around the crossing where near-collision directions peak
    tau_end, tau0 = T ** (1 / 3), t0 ** (1 / 3)
    edges = np.unique(np.concatenate([
        np.linspace(0, tau0, panels // 4 + 1),
        tau0 + (tau_end - tau0) * np.linspace(0, 1, 3 * panels // 4 + 1) ** 2]))
    lo, hi = edges[:-1, None], edges[1:, None]
    tau = (0.5 * (hi - lo) * xg + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * wg).ravel() * 3 * tau ** 2
    t = tau ** 3
    r = ej.position(t)
    v = ej.velocity(t)
    R = rho * (1 - t / T)
    Rdot = -rho / T
    total = 0.0
    for chunk in np.array_split(dirs, max(1, len(dirs) // 500)):
        rs = r[:, None, :] + R[:, None, None] * chunk[None]
        vs = v[:, None, :] + Rdot * chunk[None]
        L = 0.5 * np.sum(vs * vs, axis=-1) + 1 / np.linalg.norm(rs, axis=-1)
        L0 = 0.5 * np.sum(v * v, axis=-1) + 1 / np.linalg.norm(r, axis=-1)
        total += float(np.sum(w[:, None] * (L - L0[:, None])))
    return total / len(dirs)


# ---------------------------------------------------- local deformation

def montgomery_deformation_gain(eps, T=1.0, s=None, direction=(1.0, 0.0, 0.0)):
    """Action(ejection) - action(ejection + eps phi(t) s) on [0, T].

    phi = 1 on [0, eps^1.5], then decreases linearly to 0 at eps^1.5 + eps.
    ``s`` defaults to a unit vector orthogonal to the ejection ray.
    """
    if eps < 0:
        raise BadParams("epsilon must be non-negative")
    if eps == 0:
        return 0.0
    a, b = eps ** 1.5, eps ** 1.5 + eps
    if b >= T:
        raise BadParams("epsilon too large for the interval")
    ej = ParabolicEjection(direction)
    c = ej.c
    if s is None:
        s = np.cross(c, [0.0, 0.0, 1.0] if abs(c[2]) < 0.9 else [1.0, 0.0, 0.0])
    s = np.asarray(s, dtype=float)
    s = s / np.linalg.norm(s)

    def phi(t):
        return np.where(t <= a, 1.0, np.where(t <= b, (b - t) / eps, 0.0))

    def dphi(t):
        return np.where((t > a) & (t <= b), -1.0 / eps, 0.0)

    def dL(t):
        r, v = ej.position(t), ej.velocity(t)
        rs = r + eps * phi(t)[..., None] * s
        vs = v + eps * dphi(t)[..., None] * s
        L0 = 0.5 * np.sum(v * v, -1) + 1 / np.linalg.norm(r, axis=-1)
        L1 = 0.5 * np.sum(vs * vs, -1) + 1 / np.linalg.norm(rs, axis=-1)
        return L0 - L1

    g1, _ = quad(lambda tau: float(dL(np.array(tau ** 3)) * 3 * tau * tau), 0, a ** (1 / 3),
                 epsabs=1e-16, epsrel=1e-12, limit=200)
    g2, _ = quad(lambda t: float(dL(np.array(t))), a, b, epsabs=1e-16, epsrel=1e-12, limit=200)
    return g1 + g2


def deformed_min_distance(eps, n=2001, direction=(1.0, 0.0, 0.0)):
    """Minimum distance to the centre of the deformed path on [0, eps^1.5]."""
    ej = ParabolicEjection(direction)
    c = ej.c
    s = np.cross(c, [0.0, 0.0, 1.0] if abs(c[2]) < 0.9 else [1.0, 0.0, 0.0])
    s /= np.linalg.norm(s)
    t = np.linspace(0, eps ** 1.5, n)
    return float(np.linalg.norm(ej.position(t) + eps * s, axis=-1).min())


# ----------------------------------------------- p-body homothetic bound

def homothetic_scale(x0, ms, tol=1e-8):
    """c with c^3 = 9 U / (2 I): x(t) = c x0 t^(2/3) is a parabolic homothetic solution."""
    x0 = reduce_to_center_of_mass(x0, ms)
    I = mass_dot(x0, x0, ms)
    U = potential(x0, ms)
    lam = U / I
    defect = accelerations(x0, ms) + lam * x0
    if np.max(np.abs(defect)) > tol * lam * np.max(np.abs(x0)):
        raise BadParams("x0 is not a central configuration")
    return (4.5 * lam) ** (1 / 3), x0


def nbody_averaged_bound(x0, masses, k, rho, T=1.0):
    """Upper bound on A_m^k - A when body k alone is averaged over a sphere.

    x0 must be a central configuration; the unperturbed motion is the
    parabolic homothetic ejection generated by x0.
    """
    ms = MassSystem(masses, np.asarray(x0).shape[1])
    if not 0 <= k < ms.n:
        raise BadParams("bad body index")
    c, x0 = homothetic_scale(x0, ms)
    m = ms.m
    cjk = {j: c * float(np.linalg.norm(x0[j] - x0[k])) for j in range(ms.n) if j != k}
    _check_window(rho, T, min(cjk.values()))
    total = 0.5 * m[k] * rho ** 2 / T
    for j, cj in cjk.items():
        tj = crossing_time(cj, rho, T)
        total += m[j] * m[k] * _inner_integral(cj, rho, T, tj)
    return total


def marchal_table(dim, rhos, T=1.0):
    """Rows (rho, t0, A, A_m, normalized constant) for a rho ladder.

    The normalized constant is (A - A_m) gamma / t0^(1/3) in 3D and
    (A_m - A) gamma / t0^(1/3) in 2D; A is the ejection action on [0, T].
    """
    A = ParabolicEjection().action(0.0, T)
    rows = []
    for rho in rhos:
        diff, t0 = averaged_action_difference(dim, rho, T)
        sign = -1.0 if dim == 3 else 1.0
        rows.append((rho, t0, A, A + diff, sign * diff * GAMMA / t0 ** (1 / 3)))
    return rows


def collision_ejection_difference(dim, rho, T, T_prime):
    """A_m - A for the two-sided path: collision over [-T', 0], ejection over [0, T].

    Reversing time on the collision half turns the envelope (1 + t/T') rho into
    an ejection envelope, so the two halves add.
    """
    before, _ = averaged_action_difference(dim, rho, T_prime)
    after, _ = averaged_action_difference(dim, rho, T)
    return before + after
