import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermval
from scipy.special import factorial

from magedge import _kernels

needs_numba = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba not importable")


def reference_hermite(n, y):
    """Textbook phi_n via physicists' Hermite polynomials (fine for small n)."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    norm = 1.0 / math.sqrt(2.0**n * factorial(n) * math.sqrt(math.pi))
    return norm * hermval(y, c) * np.exp(-0.5 * y * y)


@pytest.mark.parametrize("impl", [_kernels.numpy_impl, _kernels.numba_impl], ids=["numpy", "numba"])
def test_table_matches_textbook(impl):
    if impl is None:
        pytest.skip("numba not importable")
    y = np.linspace(-6, 6, 41)
    table, _ = impl.hermite_table(12, y, -0.5 * y * y)
    for n in range(12):
        np.testing.assert_allclose(table[n], reference_hermite(n, y), atol=1e-13)


@needs_numba
def test_backends_agree_far_out():
    # large arguments exercise the log rescaling path
    y = np.linspace(-60, 60, 301)
    a, la = _kernels.numpy_impl.hermite_table(400, y, -0.5 * y * y)
    b, lb = _kernels.numba_impl.hermite_table(400, y, -0.5 * y * y)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(la, lb, rtol=1e-13)


@needs_numba
def test_series_agree(rng):
    y = rng.uniform(-10, 10, 200)
    coeffs = rng.standard_normal((64, 3))
    a = _kernels.numpy_impl.hermite_series(coeffs, y, -0.5 * y * y)
    b = _kernels.numba_impl.hermite_series(coeffs, y, -0.5 * y * y)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_series_is_table_contraction(rng):
    y = rng.uniform(-5, 5, 50)
    coeffs = rng.standard_normal((20, 2))
    table, _ = _kernels.hermite_table(20, y, -0.5 * y * y)
    np.testing.assert_allclose(_kernels.hermite_series(coeffs, y, -0.5 * y * y), coeffs.T @ table, atol=1e-13)


def test_env_switch_selects_numpy(monkeypatch):
    monkeypatch.setenv("MAGEDGE_NUMBA", "0")
    assert _kernels._select() is _kernels.numpy_impl
