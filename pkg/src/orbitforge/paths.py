"""Discretized paths and the action functional.

Three path types share one small protocol (``eval``, ``t_start``, ``t_end``,
``ms``):

* :class:`FourierLoop` -- truncated trigonometric series, periodic.
* :class:`NodePath` -- piecewise-linear path through nodes, fixed ends.
* :class:`AnalyticPath` -- closed-form position/velocity callables, used for
  reference solutions (relative equilibria, parabolic ejections).

The action is ``int (K/2 + U) dt`` with K measured in the mass metric.
"""
from dataclasses import dataclass, field

import numpy as np

from .core import (EPS_COLL, MassSystem, accelerations, configuration_scale,
                   pairwise_distances, potential_stack, reduce_to_center_of_mass)
from .errors import BadParams, CollisionError, DimMismatch, OutOfRange


@dataclass(frozen=True)
class QuadratureSpec:
    samples: int = 256

    def __post_init__(self):
        if self.samples < 1:
            raise BadParams("samples must be positive")


class FourierLoop:
    """x_i(t) = a0 + sum_k a_k cos(2 pi k t / T) + b_k sin(2 pi k t / T).

    ``coeffs`` has shape ``(n, dim, 2*modes + 1)``: constant term, then the
    cosine block for k = 1..modes, then the sine block.
    """

    def __init__(self, ms, period, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 3 or coeffs.shape[:2] != (ms.n, ms.dim) or coeffs.shape[2] % 2 != 1:
            raise DimMismatch(f"bad coefficient shape {coeffs.shape} for n={ms.n}, dim={ms.dim}")
        if not period > 0:
            raise BadParams("period must be positive")
        self.ms = ms
        self.period = float(period)
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, ms, period, modes):
        return cls(ms, period, np.zeros((ms.n, ms.dim, 2 * modes + 1)))

    @property
    def modes(self):
        return (self.coeffs.shape[2] - 1) // 2

    @property
    def t_start(self):
        return 0.0

    @property
    def t_end(self):
        return self.period

    @property
    def omegas(self):
        return 2 * np.pi * np.arange(1, self.modes + 1) / self.period

    def cos_block(self):
        return self.coeffs[:, :, 1:self.modes + 1]

    def sin_block(self):
        return self.coeffs[:, :, self.modes + 1:]

    def basis(self, t):
        """Basis matrices (values, derivatives), each of shape (len(t), 2m+1)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        w = self.omegas
        ph = np.outer(t, w)
        c, s = np.cos(ph), np.sin(ph)
        one = np.ones((t.size, 1))
        B = np.hstack([one, c, s])
        dB = np.hstack([0 * one, -s * w, c * w])
        return B, dB

    def eval(self, t):
        """Positions and velocities at time(s) t."""
        scalar = np.ndim(t) == 0
        B, dB = self.basis(t)
        x = np.einsum("ndk,tk->tnd", self.coeffs, B)
        v = np.einsum("ndk,tk->tnd", self.coeffs, dB)
        if scalar:
            return x[0], v[0]
        return x, v

    def sample_times(self, samples):
        return self.period * np.arange(samples) / samples

    def with_coeffs(self, coeffs):
        return FourierLoop(self.ms, self.period, coeffs)

    def shifted(self, var, eps):
        return self.with_coeffs(self.coeffs + eps * _payload(var))

    def resized(self, modes):
        """Same loop with the mode count truncated or zero-padded."""
        m = self.modes
        out = np.zeros((self.ms.n, self.ms.dim, 2 * modes + 1))
        k = min(m, modes)
        out[:, :, 0] = self.coeffs[:, :, 0]
        out[:, :, 1:k + 1] = self.coeffs[:, :, 1:k + 1]
        out[:, :, modes + 1:modes + 1 + k] = self.coeffs[:, :, m + 1:m + 1 + k]
        return self.with_coeffs(out)

    def __repr__(self):
        return f"FourierLoop(n={self.ms.n}, dim={self.ms.dim}, period={self.period}, modes={self.modes})"


class NodePath:
    """Piecewise-linear path with fixed endpoints over [t0, t0 + duration]."""

    def __init__(self, ms, x_start, x_end, nodes, duration, t0=0.0):
        nodes = np.array(nodes, dtype=float)
        x_start = np.array(x_start, dtype=float)
        x_end = np.array(x_end, dtype=float)
        if nodes.ndim != 3 or nodes.shape[1:] != (ms.n, ms.dim) or len(nodes) < 1:
            raise DimMismatch(f"bad node array shape {nodes.shape}")
        if x_start.shape != (ms.n, ms.dim) or x_end.shape != (ms.n, ms.dim):
            raise DimMismatch("endpoint shape mismatch")
        if not duration > 0:
            raise BadParams("duration must be positive")
        self.ms = ms
        self.x_start = x_start
        self.x_end = x_end
        self.nodes = nodes
        self.duration = float(duration)
        self.t0 = float(t0)

    @classmethod
    def straight(cls, ms, x_start, x_end, duration, n_nodes=128, t0=0.0):
        s = np.arange(1, n_nodes + 1) / (n_nodes + 1)
        x_start = np.asarray(x_start, dtype=float)
        x_end = np.asarray(x_end, dtype=float)
        nodes = (1 - s)[:, None, None] * x_start + s[:, None, None] * x_end
        return cls(ms, x_start, x_end, nodes, duration, t0)

    @classmethod
    def from_function(cls, ms, fn, t0, t1, n_nodes=128):
        """Sample a position callable at node times (ends included)."""
        t = np.linspace(t0, t1, n_nodes + 2)
        x = np.array([fn(ti) for ti in t])
        return cls(ms, x[0], x[-1], x[1:-1], t1 - t0, t0)

    @property
    def t_start(self):
        return self.t0

    @property
    def t_end(self):
        return self.t0 + self.duration

    @property
    def step(self):
        return self.duration / (len(self.nodes) + 1)

    @property
    def all_nodes(self):
        return np.concatenate([self.x_start[None], self.nodes, self.x_end[None]])

    @property
    def node_times(self):
        return self.t0 + self.step * np.arange(len(self.nodes) + 2)

    def eval(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tol = 1e-12 * max(1.0, abs(self.t_end))
        if np.any(t < self.t_start - tol) or np.any(t > self.t_end + tol):
            raise OutOfRange(f"time outside [{self.t_start}, {self.t_end}]")
        X = self.all_nodes
        s = (t - self.t0) / self.step
        j = np.clip(np.floor(s).astype(int), 0, len(X) - 2)
        w = (s - j)[:, None, None]
        x = (1 - w) * X[j] + w * X[j + 1]
        # exact node hits return the stored node
        hit = np.isclose(s, np.round(s), rtol=0, atol=1e-12)
        idx = np.round(s).astype(int)
        x[hit] = X[np.clip(idx[hit], 0, len(X) - 1)]
        v = (X[j + 1] - X[j]) / self.step
        if scalar:
            return x[0], v[0]
        return x, v

    def with_nodes(self, nodes):
        return NodePath(self.ms, self.x_start, self.x_end, nodes, self.duration, self.t0)

    def with_all_nodes(self, X):
        return NodePath(self.ms, X[0], X[-1], X[1:-1], self.duration, self.t0)

    def shifted(self, var, eps):
        return self.with_all_nodes(self.all_nodes + eps * _payload_nodes(var))

    def __repr__(self):
        return f"NodePath(n={self.ms.n}, nodes={len(self.nodes)}, t=[{self.t_start}, {self.t_end}])"


class AnalyticPath:
    """Path given by position and velocity callables on [t_start, t_end].

    Callables map a 1-d array of times to arrays of shape (len(t), n, dim).
    ``singular_start`` switches interval quadrature to t = t_start + tau**3,
    which makes integrands behaving like (t - t_start)**(-2/3) smooth.
    """

    def __init__(self, ms, position, velocity, t_start, t_end, singular_start=False):
        self.ms = ms
        self.position = position
        self.velocity = velocity
        self.t_start = float(t_start)
        self.t_end = float(t_end)
        self.singular_start = singular_start

    def eval(self, t):
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.asarray(self.position(tt), dtype=float)
        v = np.asarray(self.velocity(tt), dtype=float)
        if scalar:
            return x[0], v[0]
        return x, v

    def shifted(self, var, eps):
        return AnalyticPath(
            self.ms,
            lambda t: self.position(t) + eps * var.position(t),
            lambda t: self.velocity(t) + eps * var.velocity(t),
            self.t_start, self.t_end, self.singular_start)


def _payload(var):
    return var.coeffs if isinstance(var, FourierLoop) else np.asarray(var)


def _payload_nodes(var):
    if isinstance(var, NodePath):
        return var.all_nodes
    var = np.asarray(var)
    return var


# ---------------------------------------------------------------- evaluation

def eval_path(path, t):
    """Position and velocity of any path at time(s) t."""
    return path.eval(t)


def _reduced_kinetic_weights(ms, c):
    """Mass-weighted reduction of a coefficient-like array (n, d, ...)."""
    m = ms.m
    cbar = np.einsum("i,id...->d...", m, c) / ms.total
    return c - cbar[None]


def _check_samples(x, ms, times, eps=EPS_COLL):
    r = pairwise_distances(x)
    n = ms.n
    iu = np.triu_indices(n, 1)
    d = r[:, iu[0], iu[1]]
    flat = int(np.argmin(d))
    ts, pk = np.unravel_index(flat, d.shape)
    scale = configuration_scale(x, ms)   # over the whole stack: total collapse is caught too
    if d[ts, pk] < eps * scale or not np.isfinite(d[ts, pk]):
        pair = (int(iu[0][pk]), int(iu[1][pk]))
        raise CollisionError(
            f"collision between bodies {pair} at t={times[ts]:.6g}", time=float(times[ts]), pair=pair)


def _loop_samples(loop, quad):
    M = quad.samples
    if M < 4 * loop.modes:
        raise BadParams(f"need samples >= 4*modes ({4 * loop.modes}), got {M}")
    return loop.sample_times(M)


def loop_kinetic(loop):
    """Exact int_0^T K/2 dt from the coefficients."""
    w2 = loop.omegas ** 2
    a = _reduced_kinetic_weights(loop.ms, loop.cos_block())
    b = _reduced_kinetic_weights(loop.ms, loop.sin_block())
    m = loop.ms.m
    return 0.25 * loop.period * float(np.einsum("i,k,idk->", m, w2, a * a + b * b))


def loop_action_and_gradient(loop, quad=None, want_grad=True):
    quad = quad or QuadratureSpec()
    ms = loop.ms
    t = _loop_samples(loop, quad)
    B, _ = loop.basis(t)
    x = np.einsum("ndk,tk->tnd", loop.coeffs, B)
    _check_samples(x, ms, t)
    h = loop.period / len(t)
    kin = loop_kinetic(loop)
    pot = h * float(np.sum(potential_stack(x, ms)))
    if not want_grad:
        return kin + pot, None
    m = loop.ms.m
    w2 = np.concatenate([[0.0], loop.omegas ** 2, loop.omegas ** 2])
    red = _reduced_kinetic_weights(ms, loop.coeffs)
    g_kin = 0.5 * loop.period * m[:, None, None] * w2[None, None, :] * red
    dUdx = m[None, :, None] * accelerations(x, ms)
    g_pot = h * np.einsum("tnd,tk->ndk", dUdx, B)
    return kin + pot, g_kin + g_pot


def node_action_and_gradient(ms, X, step, want_grad=True, end_potential=(True, True), times=None):
    """Discrete action of a node sequence X (N+2, n, d).

    Kinetic: sum over segments of |dX|_m^2 / (2 step). Potential: trapezoid
    rule on the nodes. Gradient is returned for every node.
    """
    dX = np.diff(X, axis=0)
    dXr = dX - center_of_mass_stack(dX, ms)[:, None, :]
    m = ms.m
    kin = float(np.einsum("i,sid,sid->", m, dXr, dXr)) / (2 * step)
    w = np.full(len(X), step)
    w[0] = 0.5 * step if end_potential[0] else 0.0
    w[-1] = 0.5 * step if end_potential[-1] else 0.0
    active = w > 0
    xa = X[active]
    _check_samples(xa, ms, times[active] if times is not None else np.flatnonzero(active) * step)
    pot = float(np.sum(w[active] * potential_stack(xa, ms)))
    if not want_grad:
        return kin + pot, None
    g = np.zeros_like(X)
    flux = m[None, :, None] * dXr / step
    g[:-1] -= flux
    g[1:] += flux
    acc = np.zeros_like(X)
    acc[active] = accelerations(xa, ms)
    g += w[:, None, None] * m[None, :, None] * acc
    return kin + pot, g


def center_of_mass_stack(x, ms):
    return np.einsum("i,...id->...d", ms.m, x) / ms.total


def action(path, quad=None):
    """Discretized action of a path over its whole domain.

    FourierLoop: spectral kinetic term plus uniform-grid potential quadrature.
    NodePath: finite-difference kinetic term plus trapezoid potential.
    AnalyticPath: composite Gauss-Legendre quadrature.
    """
    if isinstance(path, FourierLoop):
        return loop_action_and_gradient(path, quad, want_grad=False)[0]
    if isinstance(path, NodePath):
        return node_action_and_gradient(path.ms, path.all_nodes, path.step, want_grad=False,
                                        times=path.node_times)[0]
    return action_on_interval(path, path.t_start, path.t_end)


def action_gradient(path, quad=None):
    """Gradient of the discretized action w.r.t. the free variables.

    Returns coefficient-shaped array for loops and interior-node array for
    node paths (endpoints are never free here).
    """
    if isinstance(path, FourierLoop):
        return loop_action_and_gradient(path, quad)[1]
    if isinstance(path, NodePath):
        g = node_action_and_gradient(path.ms, path.all_nodes, path.step, times=path.node_times)[1]
        return g[1:-1]
    raise TypeError(f"no discrete gradient for {type(path).__name__}")


def _gauss_grid(t1, t2, panels, order, cubic=False):
    xg, wg = np.polynomial.legendre.leggauss(order)
    if cubic:
        # t = t1 + tau^3, tau in [0, (t2 - t1)^(1/3)]
        a, b = 0.0, (t2 - t1) ** (1.0 / 3.0)
    else:
        a, b = t1, t2
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    s = (0.5 * (hi - lo) * xg[None, :] + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * wg[None, :]).ravel()
    if cubic:
        return t1 + s ** 3, w * 3 * s ** 2
    return s, w


def lagrangian(path, t):
    x, v = path.eval(t)
    ms = path.ms
    vr = v - center_of_mass_stack(v, ms)[..., None, :]
    K = np.einsum("i,...id,...id->...", ms.m, vr, vr)
    return 0.5 * K + potential_stack(x, ms)


def action_on_interval(path, t1, t2, panels=32, order=16):
    """int_{t1}^{t2} L dt by composite Gauss-Legendre quadrature of the path."""
    if not t2 > t1:
        raise BadParams("need t2 > t1")
    if isinstance(path, NodePath):
        if t1 < path.t_start - 1e-12 or t2 > path.t_end + 1e-12:
            raise OutOfRange("interval outside node path domain")
        # integrate segment by segment: the path is linear between nodes
        tn = path.node_times
        cuts = np.unique(np.concatenate([[t1, t2], tn[(tn > t1) & (tn < t2)]]))
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            t, w = _gauss_grid(a, b, 1, order)
            total += float(np.dot(w, _lagrangian_checked(path, t)))
        return total
    cubic = isinstance(path, AnalyticPath) and path.singular_start and t1 <= path.t_start
    t, w = _gauss_grid(t1, t2, panels, order, cubic=cubic)
    return float(np.dot(w, _lagrangian_checked(path, t)))


def _lagrangian_checked(path, t):
    x, _ = path.eval(t)
    _check_samples(x, path.ms, t)
    return lagrangian(path, t)


def blow_up(path, lam):
    """x^lam(t) = lam^(-2/3) x(lam t)."""
    if not lam > 0:
        raise BadParams("lambda must be positive")
    a = lam ** (-2.0 / 3.0)
    if isinstance(path, FourierLoop):
        return FourierLoop(path.ms, path.period / lam, a * path.coeffs)
    if isinstance(path, NodePath):
        return NodePath(path.ms, a * path.x_start, a * path.x_end, a * path.nodes,
                        path.duration / lam, path.t0 / lam)
    if isinstance(path, AnalyticPath):
        b = lam ** (1.0 / 3.0)
        return AnalyticPath(path.ms,
                            lambda t: a * path.position(lam * np.asarray(t)),
                            lambda t: b * path.velocity(lam * np.asarray(t)),
                            path.t_start / lam, path.t_end / lam, path.singular_start)
    raise TypeError(f"cannot blow up {type(path).__name__}")


def restrict(path, t1, t2, n_nodes=None):
    """Restriction of a node path to [t1, t2] as a new node path."""
    if t1 < path.t_start - 1e-12 or t2 > path.t_end + 1e-12 or not t2 > t1:
        raise OutOfRange(f"window [{t1}, {t2}] leaves [{path.t_start}, {path.t_end}]")
    n_nodes = n_nodes or len(path.nodes)
    t = np.linspace(t1, t2, n_nodes + 2)
    x, _ = path.eval(t)
    return NodePath(path.ms, x[0], x[-1], x[1:-1], t2 - t1, t1)


def sampled_positions(path, quad=None):
    if isinstance(path, FourierLoop):
        quad = quad or QuadratureSpec()
        t = path.sample_times(quad.samples)
    elif isinstance(path, NodePath):
        t = path.node_times
        return t, path.all_nodes
    else:
        quad = quad or QuadratureSpec()
        t = np.linspace(path.t_start, path.t_end, quad.samples)
    x, _ = path.eval(t)
    return t, x


def min_pairwise_distance(path, quad=None):
    """Minimum pairwise distance over the sample grid: (value, time, pair)."""
    t, x = sampled_positions(path, quad)
    n = path.ms.n
    iu = np.triu_indices(n, 1)
    d = pairwise_distances(x)[:, iu[0], iu[1]]
    ts, pk = np.unravel_index(int(np.argmin(d)), d.shape)
    return float(d[ts, pk]), float(t[ts]), (int(iu[0][pk]), int(iu[1][pk]))


def rotating_equilateral_arc(side, omega, t_start, t_end, masses=(1.0, 1.0, 1.0), angle0=0.0, dim=3):
    """Rigidly rotating equilateral triangle in the horizontal plane.

    Body 0 starts at polar angle ``angle0``; bodies 1, 2 follow at +2pi/3, +4pi/3.
    """
    ms = MassSystem(masses, dim)
    R = side / np.sqrt(3)
    base = angle0 + 2 * np.pi * np.arange(3) / 3

    def pos(t):
        th = base[None, :] + omega * np.asarray(t)[:, None]
        out = np.zeros((th.shape[0], 3, dim))
        out[..., 0], out[..., 1] = R * np.cos(th), R * np.sin(th)
        return out

    def vel(t):
        th = base[None, :] + omega * np.asarray(t)[:, None]
        out = np.zeros((th.shape[0], 3, dim))
        out[..., 0], out[..., 1] = -R * omega * np.sin(th), R * omega * np.cos(th)
        return out

    return AnalyticPath(ms, pos, vel, t_start, t_end)


def relative_equilibrium_loop(x0, ms, period, modes=1):
    """Planar central configuration x0 rotating once per period, as a FourierLoop.

    x0 is rescaled so the rotation is a true solution (omega^2 I = U).
    """
    from .core import mass_dot, potential

    x0 = reduce_to_center_of_mass(np.asarray(x0, dtype=float), ms)
    w = 2 * np.pi / period
    lam = potential(x0, ms) / mass_dot(x0, x0, ms)
    x0 = x0 * (lam / w ** 2) ** (1.0 / 3.0)
    c = np.zeros((ms.n, ms.dim, 2 * modes + 1))
    # (x, y) -> (x cos wt - y sin wt, x sin wt + y cos wt)
    c[:, 0, 1] = x0[:, 0]
    c[:, 0, modes + 1] = -x0[:, 1]
    c[:, 1, 1] = x0[:, 1]
    c[:, 1, modes + 1] = x0[:, 0]
    return FourierLoop(ms, period, c)
