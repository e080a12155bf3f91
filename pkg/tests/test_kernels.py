import os
import subprocess
import sys

import numpy as np
import pytest

from morreylorentz import BACKEND, _kernels
from morreylorentz.operators import OmegaKernel

needs_numba = pytest.mark.skipif(BACKEND != "numba", reason="numba backend not active")


def both(monkeypatch, fn, *args):
    fast = fn(*args)
    monkeypatch.setattr(_kernels, "use_numba", lambda: False)
    slow = fn(*args)
    monkeypatch.undo()
    return fast, slow


@pytest.fixture
def rng():
    return np.random.default_rng(17)


@needs_numba
def test_maximal_backends_agree(monkeypatch, rng):
    edges = np.sort(rng.uniform(-5, 5, 30))
    vals = rng.uniform(0, 3, 29)
    xs = np.concatenate((rng.uniform(-8, 8, 500), edges))
    a, b = both(monkeypatch, _kernels.maximal_1d_many, edges, vals, xs)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_numba
def test_hilbert_backends_agree(monkeypatch, rng):
    edges = np.sort(rng.uniform(-5, 5, 30))
    vals = rng.normal(size=29)
    xs = rng.uniform(-8, 8, 500)
    a, b = both(monkeypatch, _kernels.hilbert_many, edges, vals, xs)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-13)


@needs_numba
def test_prefix_roots_backends_agree(monkeypatch, rng):
    L = rng.normal(size=40)
    E = rng.uniform(0.5, 4, 40)
    counts = np.arange(1, 41)
    Lp = rng.normal(size=(40, 2))
    Ep = rng.uniform(0.5, 4, (40, 2))
    a, b = both(monkeypatch, _kernels.prefix_roots, L, E, counts, Lp, Ep)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)


@needs_numba
def test_disk_maxima_backends_agree(monkeypatch, rng):
    vals = rng.uniform(0, 1, (16, 16))
    radii = 2.0 ** (np.arange(25) / 4)
    a, b = both(monkeypatch, _kernels.disk_maxima, vals, radii)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_numba
def test_polar_profiles_backends_agree(monkeypatch, rng):
    vals = rng.uniform(-1, 1, (6, 6))
    pts = np.array([[3.0, 0.2], [-1.0, -1.5], [0.5, 2.5]])
    omega = OmegaKernel("cos").ray_factors(128)
    tg = np.tile(np.geomspace(0.5, 6.0, 24), (3, 1))
    (Fa, da), (Fb, db) = both(monkeypatch, _kernels.polar_profiles, vals, 0.0, 0.0, 1 / 6, pts, omega, tg)
    np.testing.assert_allclose(Fa, Fb, rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(da, db, rtol=1e-10)


def test_env_flag_selects_numpy():
    env = dict(os.environ, MORREYLORENTZ_BACKEND="numpy")
    code = "import morreylorentz as m; print(m.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_numpy_backend_end_to_end():
    env = dict(os.environ, MORREYLORENTZ_BACKEND="numpy")
    code = (
        "from morreylorentz import StepFunction, VariableExponent, luxemburg_norm\n"
        "print(repr(luxemburg_norm(StepFunction.characteristic(2.0), VariableExponent.two_piece(1.0, 2.0)).value))"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert float(out.stdout) == pytest.approx((1 + 5**0.5) / 2, rel=1e-12)
