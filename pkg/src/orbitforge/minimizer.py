"""Action minimization over symmetric loops and fixed-end paths.

All three problems reduce to minimizing a smooth function of a flat vector
restricted to a linear subspace (the range of a projector). The solver is a
limited-memory quasi-Newton method with a kinetic-energy preconditioner and
a backtracking sufficient-decrease line search that also refuses steps
falling below a soft collision floor.
"""
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .core import (MassSystem, accelerations, configuration_scale, pairwise_distances,
                   reduce_to_center_of_mass)
from .errors import BadParams, CollisionError, CollisionFloor
from .paths import (FourierLoop, NodePath, QuadratureSpec, loop_action_and_gradient,
                    node_action_and_gradient)
from .symmetry import p12_constraint

__all__ = [
    "MinimizeOptions", "MinimizeReport", "lbfgs", "minimize_loop", "multistart_loop",
    "minimize_fixed_ends", "minimize_p12", "random_init", "lagrange_arc", "xi_variation",
    "hat_a2", "lagrange_action_bound", "discrete_el_residual",
]


@dataclass
class MinimizeOptions:
    max_iter: int = 3000
    gtol: float = 1e-6
    c1: float = 1e-4           # sufficient-decrease constant
    backtrack: float = 0.5     # step shrink factor
    max_backtracks: int = 60
    dmin: float = 1e-3         # soft collision floor, relative to configuration scale
    memory: int = 20
    seed: int = 0

    def __post_init__(self):
        if not self.gtol > 0:
            raise BadParams("gtol must be positive")
        if not 0 < self.backtrack < 1:
            raise BadParams("backtrack factor must lie in (0, 1)")
        if self.dmin < 0:
            raise BadParams("dmin must be non-negative")
        if self.memory < 0 or self.max_iter < 0:
            raise BadParams("memory and max_iter must be non-negative")


@dataclass
class MinimizeReport:
    action: float
    grad_norm: float
    iterations: int
    min_distance: float
    reason: str                # converged | max-iter | collision-floor | stalled
    trace: list = field(default_factory=list)
    seed: int = None
    extra: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.reason == "converged"

    def to_dict(self):
        return asdict(self)


def lbfgs(fg, x0, opts, project=None, precondition=None, min_distance=None, floor=0.0,
          projected_criterion=False):
    """Projected, preconditioned L-BFGS.

    fg(x) -> (f, g) with g the full gradient. ``project`` maps onto the
    feasible subspace; ``precondition`` approximates the inverse Hessian.
    Convergence is tested on the full gradient unless ``projected_criterion``
    (constrained endpoints, where only the projected gradient vanishes).
    Returns (x, report). Raises CollisionFloor when every trial step along a
    descent direction falls below ``floor``.
    """
    project = project or (lambda v: v)
    precondition = precondition or (lambda v: v)
    x = project(np.array(x0, dtype=float))
    if min_distance is not None and min_distance(x) < floor:
        raise CollisionFloor("initial point below the collision floor")
    f, g = fg(x)
    pg = project(g)
    S, Y = deque(maxlen=opts.memory), deque(maxlen=opts.memory)
    trace = [f]
    reason = "max-iter"
    it = 0

    def direction(q):
        q = q.copy()
        alphas = []
        for s, y in reversed(list(zip(S, Y))):
            a = np.dot(s, q) / np.dot(s, y)
            alphas.append(a)
            q -= a * y
        r = project(precondition(q))
        if S:
            s, y = S[-1], Y[-1]
            Hy = project(precondition(y))
            r *= np.dot(s, y) / np.dot(y, Hy)
        for (s, y), a in zip(zip(S, Y), reversed(alphas)):
            b = np.dot(y, r) / np.dot(s, y)
            r += s * (a - b)
        return -project(r)

    while True:
        gnorm = float(np.linalg.norm(pg if projected_criterion else g))
        if gnorm <= opts.gtol:
            reason = "converged"
            break
        if it >= opts.max_iter:
            break
        d = direction(pg)
        slope = float(np.dot(pg, d))
        if not slope < 0:
            S.clear(), Y.clear()
            d = direction(pg)
            slope = float(np.dot(pg, d))
        accepted = False
        while not accepted:
            alpha, collided = 1.0, False
            for _ in range(opts.max_backtracks):
                xt = project(x + alpha * d)
                if min_distance is not None and min_distance(xt) < floor:
                    collided = True
                    alpha *= opts.backtrack
                    continue
                try:
                    ft, gt = fg(xt)
                except CollisionError:
                    collided = True
                    alpha *= opts.backtrack
                    continue
                if ft <= f + opts.c1 * alpha * slope:
                    accepted = True
                    break
                alpha *= opts.backtrack
            if accepted or not S:
                break
            S.clear(), Y.clear()
            d = direction(pg)
            slope = float(np.dot(pg, d))
        if not accepted:
            report = MinimizeReport(f, gnorm, it, float("nan"),
                                    "collision-floor" if collided else "stalled", trace)
            if collided:
                raise CollisionFloor("no admissible step above the collision floor", report)
            reason = "stalled"
            break
        s = xt - x
        pgt = project(gt)
        y = pgt - pg
        if np.dot(s, y) > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            S.append(s)
            Y.append(y)
        x, f, g, pg = xt, ft, gt, pgt
        trace.append(f)
        it += 1
    gnorm = float(np.linalg.norm(pg if projected_criterion else g))
    return x, MinimizeReport(f, gnorm, it, float("nan"), reason, trace)


# ------------------------------------------------------------------- loops

def _check_group(ms, G):
    if G is None:
        return
    if G.n != ms.n or G.dim != ms.dim:
        raise BadParams(f"{G.name} acts on n={G.n}, dim={G.dim}; problem has n={ms.n}, dim={ms.dim}")
    if G.permutes_unequal_masses(ms):
        raise BadParams(f"{G.name} permutes bodies of unequal mass")


def _loop_projector(ms, G, shape):
    m = ms.m

    def project(v):
        c = v.reshape(shape)
        if G is not None:
            c = G.average_coeffs(c)
        c = c - (np.einsum("i,idk->dk", m, c) / m.sum())[None]
        return c.ravel()

    return project


def _loop_preconditioner(ms, period, shape):
    modes = (shape[2] - 1) // 2
    w = 2 * np.pi * np.arange(1, modes + 1) / period
    w2 = np.concatenate([[w[0] ** 2], w ** 2, w ** 2])
    diag = 0.5 * period * ms.m[:, None, None] * w2[None, None, :] * np.ones(shape)
    inv = (1.0 / diag).ravel()
    return lambda v: inv * v


def _loop_min_distance(ms, period, shape, samples):
    probe = FourierLoop(ms, period, np.zeros(shape))
    B, _ = probe.basis(probe.sample_times(samples))
    iu = np.triu_indices(ms.n, 1)

    def mind(v):
        x = np.einsum("ndk,tk->tnd", v.reshape(shape), B)
        return float(pairwise_distances(x)[:, iu[0], iu[1]].min())

    return mind


def _loop_scale(loop, samples):
    x, _ = loop.eval(loop.sample_times(samples))
    return max(configuration_scale(xi, loop.ms) for xi in x[:: max(1, samples // 16)])


def minimize_loop(ms, G, init, opts=None, quad=None):
    """Minimize the loop action among G-invariant loops.

    The initial loop is projected; iterates and gradients stay in the
    invariant subspace. Convergence is tested on the full gradient.
    """
    opts = opts or MinimizeOptions()
    quad = quad or QuadratureSpec(max(256, 4 * init.modes))
    _check_group(ms, G)
    if init.ms.n != ms.n or init.ms.dim != ms.dim:
        raise BadParams("initial loop does not match the mass system")
    init = FourierLoop(ms, init.period, init.coeffs)
    shape = init.coeffs.shape
    period = init.period
    project = _loop_projector(ms, G, shape)
    start = init.with_coeffs(project(init.coeffs.ravel()).reshape(shape))
    floor = opts.dmin * _loop_scale(start, quad.samples)

    def fg(v):
        a, g = loop_action_and_gradient(FourierLoop(ms, period, v.reshape(shape)), quad)
        return a, g.ravel()

    mind = _loop_min_distance(ms, period, shape, quad.samples)
    x, report = lbfgs(fg, start.coeffs.ravel(), opts, project,
                      _loop_preconditioner(ms, period, shape), mind, floor)
    loop = FourierLoop(ms, period, x.reshape(shape))
    report.min_distance = mind(x)
    report.seed = opts.seed
    report.extra["collision_floor"] = floor
    if G is not None:
        from .symmetry import invariance_defect
        report.extra["invariance_defect"] = invariance_defect(G, loop)
    return loop, report


def random_init(seed, modes, amplitude, G=None, ms=None, period=1.0, decay=0.5):
    """Seeded random loop with geometric decay in the mode index, G-averaged."""
    if ms is None:
        if G is None:
            raise BadParams("need a mass system or a group")
        ms = MassSystem.equal(G.n, G.dim)
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((ms.n, ms.dim, 2 * modes + 1))
    k = np.arange(1, modes + 1)
    scale = np.concatenate([[1.0], decay ** (k - 1), decay ** (k - 1)])
    c *= amplitude * scale
    project = _loop_projector(ms, G, c.shape)
    return FourierLoop(ms, period, project(c.ravel()).reshape(c.shape))


def _threads():
    try:
        return max(1, int(os.environ.get("ORBITFORGE_THREADS", "1")))
    except ValueError:
        return 1


def multistart_loop(ms, G, seeds, modes=24, samples=256, amplitude=1.0, period=1.0, opts=None):
    """Run minimize_loop from several seeded inits; lowest converged action wins.

    Returns (best_loop, best_report, runs) with ``runs`` in seed order; each
    run is (seed, report) or (seed, exception).
    """
    opts = opts or MinimizeOptions()
    quad = QuadratureSpec(samples)

    def one(seed):
        o = MinimizeOptions(**{**asdict(opts), "seed": seed})
        init = random_init(seed, modes, amplitude, G, ms, period)
        try:
            loop, rep = minimize_loop(ms, G, init, o, quad)
            return seed, loop, rep
        except (CollisionFloor, CollisionError) as exc:
            return seed, None, exc

    seeds = list(seeds)
    with ThreadPoolExecutor(max_workers=min(_threads(), max(1, len(seeds)))) as ex:
        results = list(ex.map(one, seeds))
    best = None
    for seed, loop, rep in results:
        if loop is None:
            continue
        key = (not rep.converged, rep.action)
        if best is None or key < best[0]:
            best = (key, loop, rep)
    runs = [(s, rep) for s, _, rep in results]
    if best is None:
        return None, None, runs
    return best[1], best[2], runs


# ------------------------------------------------------------- node paths

def _laplacian_solver(n_free, dirichlet, shift=0.0):
    ab = np.zeros((3, n_free))
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0 + shift
    ab[2, :-1] = -1.0
    if not dirichlet:
        ab[1, 0] = ab[1, -1] = 1.0 + shift

    def solve(rhs):
        flat = rhs.reshape(n_free, -1)
        return solve_banded((1, 1), ab, flat).reshape(rhs.shape)

    return solve


def discrete_el_residual(path):
    """max |(x_{k+1} - 2 x_k + x_{k-1}) / h^2 - a(x_k)| over interior nodes."""
    X = path.all_nodes
    h = path.step
    dd = (X[2:] - 2 * X[1:-1] + X[:-2]) / h ** 2
    dd = dd - np.einsum("i,kid->kd", path.ms.m, dd)[:, None, :] / path.ms.total
    acc = accelerations(X[1:-1], path.ms)
    return float(np.max(np.abs(dd - acc)))


def _end_collides(x, ms):
    r = pairwise_distances(x)
    iu = np.triu_indices(ms.n, 1)
    return r[iu].min() < 1e-12 * configuration_scale(x, ms)


def minimize_fixed_ends(ms, x_i, x_f, T, init=None, opts=None, n_nodes=128):
    """Minimize the action between fixed configurations in time T.

    Endpoints may be collisions; their (infinite, constant) potential terms
    are then left out of the objective.
    """
    opts = opts or MinimizeOptions()
    if not T > 0:
        raise BadParams("T must be positive")
    x_i = reduce_to_center_of_mass(x_i, ms)
    x_f = reduce_to_center_of_mass(x_f, ms)
    if init is None:
        init = NodePath.straight(ms, x_i, x_f, T, n_nodes)
    else:
        init = NodePath(ms, x_i, x_f, init.nodes, T)
    N = len(init.nodes)
    shape = init.nodes.shape
    h = init.step
    m = ms.m
    ends = (not _end_collides(x_i, ms), not _end_collides(x_f, ms))
    times = init.node_times

    def assemble(v):
        return np.concatenate([x_i[None], v.reshape(shape), x_f[None]])

    def fg(v):
        a, g = node_action_and_gradient(ms, assemble(v), h, end_potential=ends, times=times)
        return a, g[1:-1].ravel()

    def project(v):
        X = v.reshape(shape)
        return (X - (np.einsum("i,kid->kd", m, X) / m.sum())[:, None, :]).ravel()

    lap = _laplacian_solver(N, dirichlet=True)

    def precondition(v):
        return (h * lap(v.reshape(shape)) / m[None, :, None]).ravel()

    iu = np.triu_indices(ms.n, 1)

    def mind(v):
        return float(pairwise_distances(v.reshape(shape))[:, iu[0], iu[1]].min())

    scale = max(configuration_scale(x_i, ms), configuration_scale(x_f, ms))
    floor = opts.dmin * scale
    x, report = lbfgs(fg, init.nodes.ravel(), opts, project, precondition, mind, floor)
    path = NodePath(ms, x_i, x_f, x.reshape(shape), T)
    report.min_distance = mind(x)
    report.seed = opts.seed
    report.extra["el_residual"] = discrete_el_residual(path)
    report.extra["ends_in_objective"] = list(ends)
    return path, report


# --------------------------------------------------------------------- P12

def hat_a2(T):
    """Action over T/12 of the equilateral triangle rotating by pi/3 (unit masses)."""
    return 2 ** (-5 / 3) * 3 ** (2 / 3) * np.pi ** (2 / 3) * T ** (1 / 3)


def lagrange_action_bound(u, T):
    """A(u): action of the horizontal Lagrange arc rotating by pi/3 - u in T/12."""
    if not 0 <= u <= np.pi / 3 + 1e-15:
        raise BadParams("u must lie in [0, pi/3]")
    return hat_a2(T) * (3 / np.pi * max(np.pi / 3 - u, 0.0)) ** (2 / 3)


def lagrange_arc(u, T, t_end=None):
    """Closed-form horizontal Lagrange solution x_u on [0, T/12].

    Body 0 starts on the x-axis; the triangle turns clockwise by pi/3 - u.
    """
    from .paths import rotating_equilateral_arc

    if not 0 <= u < np.pi / 3:
        raise BadParams("Lagrange arc needs 0 <= u < pi/3")
    omega = (np.pi / 3 - u) * 12 / T
    side = (3 / omega ** 2) ** (1 / 3)
    t_end = T / 12 if t_end is None else t_end
    return rotating_equilateral_arc(side, -omega, 0.0, t_end)


def xi_variation(T, t_end=None, ms=None):
    """Vertical variation opening x_u toward the Eight."""
    from .paths import AnalyticPath

    ms = ms or MassSystem.equal(3, 3)
    ph = 2 * np.pi * np.arange(3) / 3
    w = 2 * np.pi / T

    def pos(t):
        out = np.zeros((np.size(t), 3, 3))
        out[..., 2] = np.sin(w * np.asarray(t)[:, None] + ph[None, :])
        return out

    def vel(t):
        out = np.zeros((np.size(t), 3, 3))
        out[..., 2] = w * np.cos(w * np.asarray(t)[:, None] + ph[None, :])
        return out

    return AnalyticPath(ms, pos, vel, 0.0, T / 12 if t_end is None else t_end)


def minimize_p12(u, T, opts=None, n_nodes=128, init=None, opening=0.1):
    """Minimize over [0, T/12] between the two P12 symmetry sets.

    Endpoints are free inside their constraint sets. The default start is the
    Lagrange arc x_u opened along the vertical variation xi by ``opening``
    times the triangle side, plus a tiny seeded perturbation.
    """
    opts = opts or MinimizeOptions()
    if not 0 <= u < np.pi / 3:
        raise BadParams("P12 solve needs 0 <= u < pi/3 (u = pi/3 is degenerate)")
    ms = MassSystem.equal(3, 3)
    bc = p12_constraint(u, T)
    tau = T / 12
    if init is None:
        arc = lagrange_arc(u, T)
        xi = xi_variation(T)
        t = np.linspace(0, tau, n_nodes + 2)
        side = np.linalg.norm(arc.eval(0.0)[0][0] - arc.eval(0.0)[0][1])
        X = arc.eval(t)[0] + opening * side * xi.eval(t)[0]
        rng = np.random.default_rng(opts.seed)
        X = X + 1e-3 * side * rng.standard_normal(X.shape)
    else:
        X = init.all_nodes.copy()
    shape = X.shape
    h = tau / (shape[0] - 1)
    times = np.linspace(0, tau, shape[0])

    def project(v):
        Y = v.reshape(shape).copy()
        Y[0] = bc.project_start(Y[0])
        Y[-1] = bc.project_end(Y[-1])
        Y[1:-1] -= Y[1:-1].mean(axis=1, keepdims=True)
        return Y.ravel()

    def fg(v):
        a, g = node_action_and_gradient(ms, v.reshape(shape), h, times=times)
        return a, g.ravel()

    lap = _laplacian_solver(shape[0], dirichlet=False, shift=(np.pi / shape[0]) ** 2)

    def precondition(v):
        return (h * lap(v.reshape(shape))).ravel()

    iu = np.triu_indices(3, 1)

    def mind(v):
        return float(pairwise_distances(v.reshape(shape))[:, iu[0], iu[1]].min())

    start = project(X.ravel())
    floor = opts.dmin * configuration_scale(start.reshape(shape)[0], ms)
    x, report = lbfgs(fg, start, opts, project, precondition, mind, floor,
                      projected_criterion=True)
    Xf = x.reshape(shape)
    path = NodePath(ms, Xf[0], Xf[-1], Xf[1:-1], tau)
    report.min_distance = mind(x)
    report.seed = opts.seed
    report.extra.update(
        u=float(u), bound=float(lagrange_action_bound(u, T)),
        start_defect=bc.start_defect(Xf[0]), end_defect=bc.end_defect(Xf[-1]),
    )
    return path, report
