import math

import numpy as np
import pytest

from magedge.errors import ConvergenceError, PreconditionError
from magedge.fiber import FiberModel, HermiteBasis, check_quadrature, converge, eigenpairs, hermite_fn


def dvr_spectrum(W, b, k, n_eigs, half_width=12.0, n=801):
    """Sinc-DVR eigenvalues of -d^2 + (b x - k)^2 + W(x) on a uniform grid (independent oracle)."""
    x0 = k / b
    x = x0 + np.linspace(-half_width, half_width, n) / math.sqrt(b)
    dx = x[1] - x[0]
    i = np.arange(n)
    d = i[:, None] - i[None, :]
    with np.errstate(divide="ignore"):
        t = 2.0 * (-1.0) ** np.abs(d) / (dx**2 * d**2)
    t[np.diag_indices(n)] = math.pi**2 / (3 * dx**2)
    h = t + np.diag((b * x - k) ** 2 + W.eval(x))
    return np.linalg.eigvalsh(h)[:n_eigs]


def test_ground_state_value():
    assert hermite_fn(1, 0.0) == pytest.approx(math.pi**-0.25, rel=1e-15)


def test_landau_diagonal(flat):
    basis = HermiteBasis.create(1.0, 32)
    m = FiberModel(basis, flat).matrix(0.37)
    np.testing.assert_allclose(np.diag(m)[:3], [1.0, 3.0, 5.0], atol=1e-12)
    assert np.max(np.abs(m - np.diag(np.diag(m)))) < 1e-12


def test_quadrature_gram_is_identity():
    basis = HermiteBasis.create(1.3, 48)
    np.testing.assert_allclose(basis.gram(), np.eye(48), atol=1e-12)


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [0.0, 0.3])
def test_matches_unshifted_dvr(cosine, b, k):
    model = FiberModel(HermiteBasis.create(b, 128), cosine)
    vals, _ = eigenpairs(model.matrix(k), 4)
    np.testing.assert_allclose(vals, dvr_spectrum(cosine, b, k, 4), atol=1e-8)


def test_k_periodicity(cosine):
    model = FiberModel(HermiteBasis.create(1.5, 64), cosine)
    tau = model.tau
    np.testing.assert_allclose(model.matrix(0.2), model.matrix(0.2 + tau), atol=1e-12)


def test_eigenvalues_in_minmax_bracket(cosine):
    b = 1.0
    model = FiberModel(HermiteBasis.create(b, 96), cosine)
    for k in np.linspace(0, b, 7):
        vals, _ = eigenpairs(model.matrix(k), 6)
        levels = b * (2 * np.arange(1, 7) - 1)
        assert np.all(vals >= levels - 0.4 - 1e-10)
        assert np.all(vals <= levels + 0.4 + 1e-10)


def test_quad_order_precondition():
    with pytest.raises(PreconditionError):
        HermiteBasis.create(1.0, 32, quad_order=40)


def test_check_quadrature_passes(cosine):
    check_quadrature(HermiteBasis.create(1.0, 48), cosine)


def test_converge_cannot_reach_zero(cosine):
    with pytest.raises(ConvergenceError):
        converge(cosine, 1.0, 4, eps=0.0, n_max=64)


def test_converge_landau_is_immediate(flat):
    assert converge(flat, 1.0, 4) == 16
