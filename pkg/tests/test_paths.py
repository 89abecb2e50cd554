import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitforge.core import MassSystem, potential_stack
from orbitforge.errors import BadParams, CollisionError, DimMismatch, OutOfRange
from orbitforge.paths import (FourierLoop, NodePath, QuadratureSpec, action,
                              action_gradient, action_on_interval, blow_up, lagrangian,
                              loop_action_and_gradient, loop_kinetic, min_pairwise_distance,
                              node_action_and_gradient, relative_equilibrium_loop, restrict,
                              rotating_equilateral_arc)

from conftest import smooth_loop


def circle_pair_action(period):
    """Closed-form action of two unit masses on a circular orbit over one period."""
    w = 2 * np.pi / period
    a = (2 / w ** 2) ** (1 / 3)       # separation: w^2 a = 2 / a^2
    K = 2 * (a / 2) ** 2 * w ** 2
    return period * (K / 2 + 1 / a)


def test_parseval_kinetic(rng):
    for _ in range(5):
        loop = smooth_loop(rng, modes=8)
        t = loop.sample_times(1024)
        _, v = loop.eval(t)
        m = loop.ms.m
        vbar = np.einsum("i,tid->td", m, v) / m.sum()
        K = np.einsum("i,tid->t", m, (v - vbar[:, None]) ** 2)
        assert loop_kinetic(loop) == pytest.approx(0.5 * K.mean() * loop.period, rel=1e-12)


def test_single_mode_kinetic_scaling():
    ms = MassSystem.equal(2, 2)
    for T in (1.0, 2.5):
        for k in (1, 2, 3):
            c = np.zeros((2, 2, 7))
            c[0, 0, k] = 1.0   # cos(2 pi k t / T) on body 0
            # reduced amplitude 1/2 on each body, so K/2 integrates to (T/4) w^2 / 2
            w = 2 * np.pi * k / T
            assert loop_kinetic(FourierLoop(ms, T, c)) == pytest.approx(T / 8 * w ** 2, rel=1e-13)


def test_loop_gradient_finite_differences(rng):
    for _ in range(20):
        loop = smooth_loop(rng, n=int(rng.integers(2, 5)), modes=5)
        quad = QuadratureSpec(64)
        _, g = loop_action_and_gradient(loop, quad)
        d = rng.standard_normal(loop.coeffs.shape)
        h = 1e-5
        ap = action(loop.with_coeffs(loop.coeffs + h * d), quad)
        am = action(loop.with_coeffs(loop.coeffs - h * d), quad)
        fd = (ap - am) / (2 * h)
        assert abs(fd - np.sum(g * d)) / abs(fd) < 1e-6


def test_node_gradient_finite_differences(rng):
    ms = MassSystem((1.0, 2.0, 1.5), 2)
    xa = np.array([[-2.0, 0.0], [2.0, 0.5], [0.0, 3.0]])
    xb = xa @ np.array([[0.0, -1.0], [1.0, 0.0]])
    for _ in range(20):
        p = NodePath.straight(ms, xa, xb, 2.0, 16)
        p = p.with_nodes(p.nodes + 0.2 * rng.standard_normal(p.nodes.shape))
        g = action_gradient(p)
        d = rng.standard_normal(p.nodes.shape)
        h = 1e-5
        fd = (action(p.with_nodes(p.nodes + h * d)) - action(p.with_nodes(p.nodes - h * d))) / (2 * h)
        assert abs(fd - np.sum(g * d)) / abs(fd) < 1e-6


def test_blow_up_identity_loops(rng):
    for _ in range(10):
        loop = smooth_loop(rng, modes=4, period=1.0)
        t1, t2 = 0.1, 0.3
        for lam in (0.5, 2.0, 3.0):
            lhs = action_on_interval(blow_up(loop, lam), t1, t2)
            rhs = lam ** (-1 / 3) * action_on_interval(loop, lam * t1, lam * t2)
            assert lhs == pytest.approx(rhs, rel=1e-6)


def test_blow_up_node_path_is_exact():
    ms = MassSystem.equal(3, 2)
    xa = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    p = NodePath.straight(ms, xa, 1.3 * xa, 1.0, 32)
    for lam in (0.5, 2.0, 3.0):
        assert action(blow_up(p, lam)) == pytest.approx(lam ** (-1 / 3) * action(p), rel=1e-13)
    with pytest.raises(BadParams):
        blow_up(p, 0.0)


def test_two_body_circle_action():
    ms = MassSystem.equal(2, 2)
    T = 2 * np.pi
    x0 = np.array([[-1.0, 0.0], [1.0, 0.0]])
    loop = relative_equilibrium_loop(x0, ms, T)
    assert action(loop, QuadratureSpec(64)) == pytest.approx(circle_pair_action(T), rel=1e-12)
    # a relative equilibrium is a critical point of the action
    g = action_gradient(loop, QuadratureSpec(64))
    assert np.max(np.abs(g)) < 1e-12


def test_quadrature_needs_enough_samples():
    loop = FourierLoop.zeros(MassSystem.equal(2, 2), 1.0, 8)
    with pytest.raises(BadParams):
        action(loop, QuadratureSpec(16))


def test_loop_shape_checked():
    with pytest.raises(DimMismatch):
        FourierLoop(MassSystem.equal(3, 3), 1.0, np.zeros((3, 2, 5)))


def test_collision_reports_time():
    ms = MassSystem.equal(2, 2)
    c = np.zeros((2, 2, 3))
    c[0, 0, 1], c[1, 0, 1] = 1.0, -1.0   # x_0 = cos, x_1 = -cos: collide at T/4
    with pytest.raises(CollisionError) as err:
        action(FourierLoop(ms, 1.0, c), QuadratureSpec(8))
    assert err.value.time == pytest.approx(0.25)


def test_node_path_interpolation_and_restrict():
    ms = MassSystem.equal(2, 2)
    xa = np.array([[-1.0, 0.0], [1.0, 0.0]])
    p = NodePath.straight(ms, xa, 2 * xa, 4.0, 7)
    x, v = p.eval(np.array([2.0]))
    assert np.allclose(x[0], 1.5 * xa)
    assert np.allclose(v[0], xa / 4.0)
    r = restrict(p, 1.0, 3.0)
    assert r.t_start == 1.0 and r.duration == 2.0
    with pytest.raises(OutOfRange):
        restrict(p, -1.0, 2.0)
    with pytest.raises(OutOfRange):
        action_on_interval(p, 0.0, 5.0)


def test_node_action_converges_to_analytic():
    arc = rotating_equilateral_arc(1.0, 0.7, 0.0, 1.0)
    exact = action_on_interval(arc, 0.0, 1.0)
    errs = []
    for N in (32, 64, 128):
        p = NodePath.from_function(arc.ms, lambda t: arc.eval(t)[0], 0.0, 1.0, N)
        errs.append(abs(action(p) - exact))
    assert errs[2] < errs[1] < errs[0]
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)


def test_equilateral_arc_closed_form():
    side, w = 2.0, 0.5
    arc = rotating_equilateral_arc(side, w, 0.0, 3.0)
    R = side / np.sqrt(3)
    L = 0.5 * 3 * (R * w) ** 2 + 3 / side
    assert action(arc) == pytest.approx(3.0 * L, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(shift=st.floats(0.0, 1.0))
def test_action_invariant_under_time_shift(shift):
    rng = np.random.default_rng(3)
    loop = smooth_loop(rng, modes=4, period=2.0)
    a0 = action_on_interval(loop, 0.0, 2.0, panels=64)
    a1 = action_on_interval(loop, shift, shift + 2.0, panels=64)
    assert a1 == pytest.approx(a0, rel=1e-10)


def test_lagrangian_matches_pieces(rng):
    loop = smooth_loop(rng)
    t = np.linspace(0, loop.period, 11)
    x, v = loop.eval(t)
    m = loop.ms.m
    vbar = np.einsum("i,tid->td", m, v) / m.sum()
    K = np.einsum("i,tid->t", m, (v - vbar[:, None]) ** 2)
    assert np.allclose(lagrangian(loop, t), 0.5 * K + potential_stack(x, loop.ms))


def test_min_pairwise_distance(rng):
    loop = smooth_loop(rng)
    d, t, pair = min_pairwise_distance(loop, QuadratureSpec(128))
    x, _ = loop.eval(np.array([t]))
    assert d == pytest.approx(np.linalg.norm(x[0, pair[0]] - x[0, pair[1]]))


def test_resized_keeps_low_modes(rng):
    loop = smooth_loop(rng, modes=6)
    up = loop.resized(10)
    t = loop.sample_times(40)
    assert np.allclose(up.eval(t)[0], loop.eval(t)[0])
    assert up.resized(6).coeffs == pytest.approx(loop.coeffs)


def test_node_end_potential_switch():
    ms = MassSystem.equal(2, 2)
    X = np.array([[[0.0, 0], [0.0, 0]], [[-1.0, 0], [1.0, 0]], [[-2.0, 0], [2.0, 0]]])
    a, _ = node_action_and_gradient(ms, X, 1.0, end_potential=(False, True))
    # kinetic 1 per step; potential: 1/2 at the middle node, (1/2)(1/4) at the end
    assert a == pytest.approx(2.0 + 0.5 + 0.125)
    with pytest.raises(CollisionError):
        node_action_and_gradient(ms, X, 1.0)
