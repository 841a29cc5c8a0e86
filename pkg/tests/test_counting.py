import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import roots_legendre

from magedge.bands import BandStructure
from magedge.counting import (
    EffectiveModel,
    M1Operator,
    PerturbationV,
    Rectangle,
    capacity,
    count_G2,
    gaussian_fit,
    gram_G2,
    nu_bounds,
    sandwich_bounds,
    stable_G2_counts,
)
from magedge.counting.effective import ent, interval_exp_integral
from magedge.counting.oracle import graded_nodes
from magedge.errors import NoiseFloorError, PreconditionError
from magedge.potential import FourierPotential

LAMS = list(np.logspace(-8, -2, 7))


@pytest.fixture(scope="module")
def model():
    bands = BandStructure(FourierPotential.cosine(0.4), 5.0, size=64, n_bands=4)
    return EffectiveModel.from_bands(bands, 1)


@pytest.fixture(scope="module")
def box(model):
    return PerturbationV.box(-0.5, 0.5, 0.0, 2 * math.pi / model.tau, 1.0)


@pytest.mark.parametrize(
    "t, expected", [(0.2, 1), (1.0, 1), (1.0 + 1e-14, 1), (1.5, 2), (2.0, 2), (2.000001, 3), (7.3, 8)]
)
def test_ent(t, expected):
    assert ent(t) == expected


def test_ent_domain():
    with pytest.raises(ValueError):
        ent(0.0)


def test_capacity_examples():
    b, T = 0.5, 1.0
    full = PerturbationV.box(0, 1, 0, 2 * math.pi / (b * T))
    assert capacity(full, b, T) == 1.0
    short = PerturbationV.box(0, 1, 0, 2 * math.pi / (b * T) / 2.5)
    assert capacity(short, b, T) == pytest.approx(1 / 3)
    both = PerturbationV((full.rectangles[0], short.rectangles[0].scaled(2.0)))
    assert capacity(both, b, T) == 1.0


def test_exp_integral_closed_form():
    for omega in (0.0, 0.7, -3.2, 25.0):
        re = quad(lambda y: math.cos(omega * y), 0.3, 2.1)[0]
        im = quad(lambda y: -math.sin(omega * y), 0.3, 2.1)[0]
        got = interval_exp_integral(np.array([omega]), 0.3, 2.1)[0]
        assert got == pytest.approx(complex(re, im), abs=1e-12)


def test_gram_entry_brute_force(model, box):
    """One off-diagonal Gram entry against tensor Gauss-Legendre in x and y."""
    L = 2
    g = gram_G2(model, box, L)
    idx = model.index(L)
    i, j = idx.index((1, 0)), idx.index((-1, 0))
    r = box.rectangles[0]
    t, w = roots_legendre(80)
    x = 0.5 * (r.x1 - r.x0) * t + 0.5 * (r.x1 + r.x0)
    wx = 0.5 * (r.x1 - r.x0) * w
    y = 0.5 * (r.y1 - r.y0) * t + 0.5 * (r.y1 + r.y0)
    wy = 0.5 * (r.y1 - r.y0) * w
    s = model.states[0]
    xpart = np.sum(wx * model.psi(0, 1, x) * model.psi(0, -1, x))
    theta = (1 - (-1)) * model.tau
    ypart = np.sum(wy * np.exp(-1j * theta * y))
    expected = r.amplitude * xpart * ypart / math.sqrt(s.mu)
    assert g[i, j] == pytest.approx(expected, rel=1e-9, abs=1e-14)


def test_gram_and_m1_are_psd(model, box):
    g = gram_G2(model, box, 3)
    ev = np.linalg.eigvalsh(g)
    assert ev.min() >= -1e-10 * np.abs(ev).max()
    m = M1Operator(model, box, 3).matrix(1e-4)
    ev = np.linalg.eigvalsh(m)
    assert ev.min() >= -1e-10 * np.abs(ev).max()
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12 * np.abs(m).max())


def test_zero_perturbation_counts_nothing(model):
    zero = PerturbationV(())
    counts, _ = stable_G2_counts(model, zero, LAMS)
    assert counts == [0] * len(LAMS)
    assert M1Operator(model, zero, 2).count(1e-4) == 0
    with pytest.raises(PreconditionError):
        nu_bounds(model, zero, 1e-4)


def test_counts_monotone_in_lambda_and_amplitude(model, box):
    weak, _ = stable_G2_counts(model, box, LAMS)
    strong, _ = stable_G2_counts(model, box.scaled(4.0), LAMS)
    assert all(a >= b for a, b in zip(weak, weak[1:]))
    assert all(s >= w for s, w in zip(strong, weak))
    op, op4 = M1Operator(model, box, 3), M1Operator(model, box.scaled(4.0), 3)
    m1 = [op.count(lam) for lam in LAMS]
    m4 = [op4.count(lam) for lam in LAMS]
    assert all(a >= b for a, b in zip(m1, m1[1:]))
    assert all(s >= w for s, w in zip(m4, m1))


def test_nu_sandwich_and_m1_agreement(model, box):
    g2, L = stable_G2_counts(model, box, LAMS)
    nu = nu_bounds(model, box, min(LAMS))
    op = M1Operator(model, box, L)
    for lam, c in zip(LAMS, g2):
        thr = 2 * math.sqrt(lam)
        assert nu.count_lower(thr) <= c <= nu.count_upper(thr)
        assert abs(op.count(lam) - c) <= 3


def test_noise_floor(model, box):
    g = gram_G2(model, box, 2)
    with pytest.raises(NoiseFloorError):
        count_G2(1e-40, g)


def test_sandwich_constants(model, box):
    lo, hi = sandwich_bounds(model, box)
    scale = math.sqrt(2) / math.sqrt(5.0)
    assert lo == pytest.approx(scale)  # height 2 pi / tau: capacity 1
    assert hi == pytest.approx(scale * model.n_maxima)


def test_fit_recovers_synthetic_slope():
    lams = 10.0 ** -np.arange(2, 41, dtype=float)
    counts = np.floor(2 * np.sqrt(np.abs(np.log(lams))))
    assert gaussian_fit(lams, counts).slope == pytest.approx(2.0, rel=0.05)


def test_fit_preconditions():
    with pytest.raises(PreconditionError):
        gaussian_fit([1e-2, 1e-3, 1e-4], [1, 2, 3])
    with pytest.raises(PreconditionError):
        gaussian_fit(np.logspace(-4, -2, 8), np.arange(8))


def test_graded_nodes_integrate_smooth_functions():
    tau = 3.0
    k, w = graded_nodes(tau, [0.0, 1.1], scale=0.01)
    assert np.all((k >= 0) & (k < tau))
    assert w.sum() == pytest.approx(tau, rel=1e-13)
    assert np.sum(w * np.cos(2 * np.pi * k / tau) ** 2) == pytest.approx(tau / 2, rel=1e-12)


def test_rectangle_validation():
    with pytest.raises(ValueError):
        Rectangle(1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Rectangle(0.0, 1.0, 0.0, 1.0, amplitude=-1.0)


def test_overlapping_rectangles_add():
    v = PerturbationV((Rectangle(0, 2, 0, 2, 1.0), Rectangle(1, 3, 1, 3, 2.0)))
    assert v(1.5, 1.5) == 3.0
    assert v.sup() == 3.0
    assert v.bounding_box().amplitude == 3.0
