"""Finite groups acting on loops by isometries, relabelings and time maps.

An element g = (rho, perm, time_sign, shift) acts on a loop by

    (g . x)_i(t) = rho x_{perm[i]}(time_sign * t + shift * T)

with ``shift`` an exact fraction of the period. Invariant loops are obtained
by averaging over the group.

Fixed frame: Delta is the x-axis, the horizontal plane is z = 0.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadParams, DimMismatch
from .paths import FourierLoop, QuadratureSpec


@dataclass(frozen=True, eq=False)
class SymmetryElement:
    rho: np.ndarray
    perm: tuple
    time_sign: int = 1
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        object.__setattr__(self, "shift", Fraction(self.shift) % 1)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise BadParams("rho must be square")
        if not np.allclose(rho @ rho.T, np.eye(len(rho)), atol=1e-12):
            raise BadParams("rho must be orthogonal")
        if sorted(self.perm) != list(range(len(self.perm))):
            raise BadParams(f"{self.perm} is not a permutation")
        if self.time_sign not in (1, -1):
            raise BadParams("time_sign must be +1 or -1")

    @classmethod
    def identity(cls, n, dim):
        return cls(np.eye(dim), tuple(range(n)))

    def __matmul__(self, other):
        """Composition: (g @ h) . x == g . (h . x)."""
        return SymmetryElement(
            self.rho @ other.rho,
            tuple(other.perm[p] for p in self.perm),
            self.time_sign * other.time_sign,
            other.time_sign * self.shift + other.shift,
        )

    def same_as(self, other):
        return (self.perm == other.perm and self.time_sign == other.time_sign
                and self.shift == other.shift and np.allclose(self.rho, other.rho, atol=1e-12))

    def is_identity(self):
        return self.same_as(SymmetryElement.identity(len(self.perm), len(self.rho)))

    def apply_coeffs(self, coeffs):
        """Action on a coefficient array (n, dim, 2m+1)."""
        n, dim, width = coeffs.shape
        if dim != len(self.rho) or n != len(self.perm):
            raise DimMismatch(f"element acts on n={len(self.perm)}, dim={len(self.rho)}")
        m = (width - 1) // 2
        c = np.einsum("de,ne...->nd...", self.rho, coeffs[list(self.perm)])
        phase = 2 * np.pi * np.arange(1, m + 1) * float(self.shift)
        cs, sn = np.cos(phase), np.sin(phase)
        a, b = c[:, :, 1:m + 1], c[:, :, m + 1:]
        out = np.empty_like(c)
        out[:, :, 0] = c[:, :, 0]
        out[:, :, 1:m + 1] = a * cs + b * sn
        out[:, :, m + 1:] = self.time_sign * (b * cs - a * sn)
        return out

    def apply_config(self, x):
        """Configuration part only: (rho x_{perm[0]}, ..., rho x_{perm[n-1]})."""
        return np.asarray(x)[..., list(self.perm), :] @ self.rho.T

    def __repr__(self):
        return (f"SymmetryElement(perm={self.perm}, time_sign={self.time_sign}, "
                f"shift={self.shift}, rho=diag?{np.round(np.diag(self.rho), 3).tolist()})")


class SymmetryGroup:
    """Complete, closed list of elements."""

    def __init__(self, elements, name="custom"):
        self.elements = list(elements)
        self.name = name
        if not self.elements:
            raise BadParams("empty group")
        self.n = len(self.elements[0].perm)
        self.dim = len(self.elements[0].rho)
        self._check_closed()

    @classmethod
    def generate(cls, generators, name="custom"):
        gens = list(generators)
        n, dim = len(gens[0].perm), len(gens[0].rho)
        elems = [SymmetryElement.identity(n, dim)]
        frontier = list(elems)
        while frontier:
            new = []
            for a in frontier:
                for g in gens:
                    c = g @ a
                    if not any(c.same_as(e) for e in elems):
                        elems.append(c)
                        new.append(c)
                        if len(elems) > 10000:
                            raise BadParams("group does not close")
            frontier = new
        return cls(elems, name)

    def _index(self, g):
        for k, e in enumerate(self.elements):
            if g.same_as(e):
                return k
        return -1

    def _check_closed(self):
        if not any(e.is_identity() for e in self.elements):
            raise BadParams("group lacks the identity")
        for a in self.elements:
            has_inverse = False
            for b in self.elements:
                ab = a @ b
                if self._index(ab) < 0:
                    raise BadParams(f"{self.name}: not closed under composition")
                has_inverse = has_inverse or ab.is_identity()
            if not has_inverse:
                raise BadParams(f"{self.name}: missing inverse")

    @property
    def order(self):
        return len(self.elements)

    def contains(self, g):
        return self._index(g) >= 0

    def permutes_unequal_masses(self, ms):
        m = ms.m
        return any(not np.allclose(m[list(g.perm)], m) for g in self.elements)

    def average_coeffs(self, coeffs):
        out = np.zeros_like(coeffs)
        for g in self.elements:
            out += g.apply_coeffs(coeffs)
        return out / self.order

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"SymmetryGroup({self.name!r}, order={self.order})"


def apply_element(g, loop):
    return loop.with_coeffs(g.apply_coeffs(loop.coeffs))


def group_average(G, loop):
    """Orthogonal projection of a loop onto the G-invariant loops."""
    _check_compatible(G, loop)
    return loop.with_coeffs(G.average_coeffs(loop.coeffs))


def _check_compatible(G, loop):
    if G.n != loop.ms.n or G.dim != loop.ms.dim:
        raise DimMismatch(f"{G.name} acts on n={G.n}, dim={G.dim}; loop has n={loop.ms.n}, dim={loop.ms.dim}")


def invariance_defect(G, loop, quad=None):
    """max over g and sample times of |(g.x)(t) - x(t)| in the mass norm."""
    _check_compatible(G, loop)
    quad = quad or QuadratureSpec(max(64, 4 * loop.modes))
    t = loop.sample_times(quad.samples)
    x, _ = loop.eval(t)
    m = loop.ms.m
    worst = 0.0
    for g in G.elements:
        gx, _ = apply_element(g, loop).eval(t)
        d = np.sqrt(np.einsum("i,tid->t", m, (gx - x) ** 2))
        worst = max(worst, float(d.max()))
    return worst


# ------------------------------------------------------------------ presets

SIGMA = np.diag([1.0, 1.0, -1.0])   # reflection through the horizontal plane
DELTA = np.diag([1.0, -1.0, -1.0])  # half-turn about the x-axis


def d6_generators():
    s = SymmetryElement(SIGMA, (2, 0, 1), 1, Fraction(-1, 6))
    sigma = SymmetryElement(DELTA, (0, 2, 1), -1, Fraction(0))
    return s, sigma


def preset_group(name, n=None, dim=3):
    """Named groups: choreography, italian, d6_eight, z6, d3.

    ``choreography`` and ``italian`` need ``n``; the D6 family is for three
    bodies in space.
    """
    if name == "choreography":
        if n is None or n < 2:
            raise BadParams("choreography needs n >= 2")
        g = SymmetryElement(np.eye(dim), tuple((i - 1) % n for i in range(n)), 1, Fraction(1, n))
        return SymmetryGroup.generate([g], f"choreography({n})")
    if name == "italian":
        if n is None or n < 2:
            raise BadParams("italian needs n >= 2")
        g = SymmetryElement(-np.eye(dim), tuple(range(n)), 1, Fraction(1, 2))
        return SymmetryGroup.generate([g], "italian")
    if name in ("d6_eight", "z6", "d3"):
        if (n is not None and n != 3) or dim != 3:
            raise BadParams(f"{name} needs 3 bodies in dimension 3")
        s, sigma = d6_generators()
        gens = {"d6_eight": [s, sigma], "z6": [s], "d3": [s @ s, sigma]}[name]
        return SymmetryGroup.generate(gens, name)
    raise BadParams(f"unknown symmetry preset {name!r}")


# --------------------------------------------------------- P12 boundary sets

def vertical_plane_reflection(u):
    """Reflection through the vertical plane containing the direction (cos u, sin u, 0)."""
    e = np.array([np.cos(u), np.sin(u), 0.0])
    ez = np.array([0.0, 0.0, 1.0])
    nvec = np.cross(ez, e)
    return np.eye(3) - 2 * np.outer(nvec, nvec)


@dataclass(frozen=True)
class BoundaryConstraint:
    """Endpoint symmetry sets for the P12 problem over [0, T/12].

    Start: (Delta r0, Delta r2, Delta r1) = (r0, r1, r2)  (body 0 on Delta).
    End:   (S r1, S r0, S r2) = (r0, r1, r2)  (body 2 in the plane P).
    """
    u: float
    period: float
    start: SymmetryElement
    end: SymmetryElement

    @property
    def duration(self):
        return self.period / 12

    @staticmethod
    def _project(g, x, masses=None):
        x = np.asarray(x, dtype=float)
        y = 0.5 * (x + g.apply_config(x))
        m = np.ones(x.shape[-2]) if masses is None else np.asarray(masses)
        c = np.einsum("i,...id->...d", m, y) / m.sum()
        return y - c[..., None, :]

    def project_start(self, x, masses=None):
        return self._project(self.start, x, masses)

    def project_end(self, x, masses=None):
        return self._project(self.end, x, masses)

    def start_defect(self, x):
        return float(np.max(np.abs(self.start.apply_config(x) - x)))

    def end_defect(self, x):
        return float(np.max(np.abs(self.end.apply_config(x) - x)))


def p12_constraint(u, period):
    if not 0 <= u <= np.pi / 3 + 1e-15:
        raise BadParams(f"u must lie in [0, pi/3], got {u}")
    if not period > 0:
        raise BadParams("period must be positive")
    start = SymmetryElement(DELTA, (0, 2, 1))
    end = SymmetryElement(vertical_plane_reflection(u), (1, 0, 2))
    return BoundaryConstraint(float(u), float(period), start, end)
