import numpy as np
import pytest

from orbitforge.core import MassSystem
from orbitforge.minimizer import multistart_loop
from orbitforge.paths import FourierLoop
from orbitforge.symmetry import preset_group


def smooth_loop(rng, n=3, dim=3, modes=6, period=None, spread=3.0, amplitude=0.3):
    """Random smooth loop whose bodies stay near well separated centers."""
    ms = MassSystem(tuple(rng.uniform(0.5, 2.0, n)), dim)
    period = period or rng.uniform(1.0, 5.0)
    c = amplitude * rng.standard_normal((n, dim, 2 * modes + 1))
    k = np.arange(1, modes + 1)
    c[:, :, 1:] *= np.concatenate([0.5 ** k, 0.5 ** k])
    ang = 2 * np.pi * np.arange(n) / n
    c[:, 0, 0] = spread * np.cos(ang)
    c[:, 1, 0] = spread * np.sin(ang)
    return FourierLoop(ms, period, c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def eight():
    """Converged Eight at T = 12, default resolution."""
    ms = MassSystem.equal(3, 3)
    G = preset_group("d6_eight")
    loop, rep, _ = multistart_loop(ms, G, range(4), amplitude=1.5, period=12.0)
    return loop, rep, G


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
