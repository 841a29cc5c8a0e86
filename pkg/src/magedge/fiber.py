"""Hermite-basis discretization of the shifted fiber operator.

The fiber operator is ``-d^2/dx^2 + b^2 x^2 + W(x + k/b)``. In the basis
``chi_n(x) = b^(1/4) phi_{n+1}(sqrt(b) x)`` the oscillator part is diagonal,
``b (2n + 1)``, and only the potential needs Gauss-Hermite quadrature.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import eigh
from scipy.special import roots_hermite

from . import _kernels
from .errors import ConvergenceError, NearDegeneracyError, PreconditionError

DEFAULT_SIZE = 128
DEFAULT_EPS_CONV = 1e-9


def hermite_functions(nmax, y):
    """Normalized oscillator eigenfunctions phi_1..phi_nmax at ``y``, shape (nmax, len(y))."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    table, _ = _kernels.hermite_table(nmax, y, -0.5 * y * y)
    return table


def hermite_fn(n, y):
    """phi_n(y) with phi_1 the ground state: -phi'' + y^2 phi = (2n - 1) phi."""
    if n < 1:
        raise ValueError("Hermite function index starts at 1")
    scalar = np.ndim(y) == 0
    vals = hermite_functions(n, y)[n - 1]
    return float(vals[0]) if scalar else vals


@dataclass(frozen=True, eq=False)
class HermiteBasis:
    b: float
    size: int
    quad_order: int
    nodes: np.ndarray
    weighted: np.ndarray  # phi_{n+1}(y_i) * sqrt(quadrature weight * exp(y_i^2))

    @classmethod
    def create(cls, b, size=DEFAULT_SIZE, quad_order=None):
        if b <= 0:
            raise ValueError("magnetic field b must be positive")
        if size < 1:
            raise ValueError("basis size must be positive")
        q = 4 * size if quad_order is None else int(quad_order)
        if q < 2 * size:
            raise PreconditionError(f"quadrature order {q} below 2N = {2 * size}")
        y, _ = roots_hermite(q)
        # Gauss-Hermite weight times exp(y^2) equals 1 / (q * phi_q(y)^2); work in logs.
        _, last = _kernels.hermite_table(q, y, np.zeros_like(y))
        weighted, _ = _kernels.hermite_table(size, y, -0.5 * math.log(q) - last)
        return cls(float(b), int(size), q, y, weighted)

    @property
    def levels(self):
        return self.b * (2.0 * np.arange(self.size) + 1.0)

    def gram(self):
        return self.weighted @ self.weighted.T

    def x_nodes(self, k=0.0):
        return self.nodes / math.sqrt(self.b) + k / self.b

    def project(self, values):
        """Matrix of multiplication by a function sampled at the quadrature nodes."""
        m = (self.weighted * values) @ self.weighted.T
        return 0.5 * (m + m.T)

    def evaluate(self, coeffs, x, center=0.0):
        """Real-space values of sum_n c_n chi_n(x - center); coeffs (N,) or (N, m)."""
        coeffs = np.asarray(coeffs, dtype=np.float64)
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        y = math.sqrt(self.b) * (x - center)
        c2 = coeffs.reshape(coeffs.shape[0], -1)
        vals = _kernels.hermite_series(c2, y, -0.5 * y * y) * self.b**0.25
        return vals[0] if coeffs.ndim == 1 else vals


class FiberModel:
    """Potential matrices of W(x + k/b) for every k from per-harmonic blocks.

    Writing x = y/sqrt(b) + k/b, each harmonic splits into cos/sin of the
    node coordinate times cos/sin of the shift, so the quadrature is done
    once per harmonic and each k costs only a linear combination.
    """

    def __init__(self, basis, W):
        self.basis = basis
        self.W = W
        u = basis.nodes / math.sqrt(basis.b)
        n, _, _ = W.harmonics()
        self._freq = n * W.omega
        self._cos = [basis.project(np.cos(f * u)) for f in self._freq]
        self._sin = [basis.project(np.sin(f * u)) for f in self._freq]
        self._gram = basis.gram()

    @property
    def b(self):
        return self.basis.b

    @property
    def tau(self):
        return self.basis.b * self.W.period

    def potential_matrix(self, k, order=0):
        """Matrix of the ``order``-th x-derivative of W(. + k/b)."""
        c0, a, bb = self.W.derivative_coeffs(order)
        s = k / self.basis.b
        m = c0 * self._gram
        for f, an, bn, cm, sm in zip(self._freq, a, bb, self._cos, self._sin):
            ct, st = math.cos(f * s), math.sin(f * s)
            m = m + (an * ct + bn * st) * cm + (bn * ct - an * st) * sm
        return m

    def matrix(self, k):
        m = self.potential_matrix(k)
        m[np.diag_indices_from(m)] += self.basis.levels
        return m

    def solve(self, k, n_bands):
        m = self.matrix(k)
        vals, vecs = eigenpairs(m, n_bands)
        return FiberSolve(float(k), m, vals, vecs)


@dataclass(frozen=True, eq=False)
class FiberSolve:
    k: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def assemble(basis, W, k):
    """Symmetric truncated matrix of the shifted fiber operator at ``k``."""
    return FiberModel(basis, W).matrix(k)


def eigenpairs(matrix, n_bands):
    """Lowest ``n_bands`` eigenpairs, ascending; the upper half of the basis is off limits."""
    size = matrix.shape[0]
    if n_bands < 1 or n_bands > size // 2:
        raise PreconditionError(f"requested {n_bands} bands from a basis of {size}; need J <= N/2")
    vals, vecs = eigh(matrix, subset_by_index=[0, n_bands - 1])
    scale = max(1.0, float(np.max(np.abs(vals))))
    gaps = np.diff(vals)
    if gaps.size and gaps.min() <= 1e-12 * scale:
        i = int(np.argmin(gaps))
        raise NearDegeneracyError((i + 1, i + 2), float(gaps[i]))
    return vals, vecs


def check_quadrature(basis, W, tol=1e-10, probe_k=(0.0,)):
    """Raise if doubling the quadrature order moves any potential matrix entry by more than tol."""
    fine = HermiteBasis.create(basis.b, basis.size, 2 * basis.quad_order)
    coarse_model, fine_model = FiberModel(basis, W), FiberModel(fine, W)
    for k in probe_k:
        change = np.max(np.abs(coarse_model.potential_matrix(k) - fine_model.potential_matrix(k)))
        if change > tol:
            raise ConvergenceError(
                f"quadrature order {basis.quad_order} not converged: entries move by {change:.3e}"
            )


def converge(W, b, n_bands, n_start=16, eps=DEFAULT_EPS_CONV, n_max=1024, k_probe=None):
    """Smallest N in the doubling sequence n_start, 2 n_start, ... with stable eigenvalues.

    Stability means |E_j^(N) - E_j^(2N)| < eps for every j <= n_bands at every
    probe quasi-momentum.
    """
    tau = b * W.period
    if k_probe is None:
        k_probe = np.arange(8) * (tau / 8)
    n = max(int(n_start), 2 * n_bands)

    def spectrum(size):
        model = FiberModel(HermiteBasis.create(b, size), W)
        return np.array([eigenpairs(model.matrix(k), n_bands)[0] for k in k_probe])

    current = spectrum(n)
    while 2 * n <= n_max:
        doubled = spectrum(2 * n)
        if np.max(np.abs(current - doubled)) < eps:
            return n
        n, current = 2 * n, doubled
    raise ConvergenceError(f"no basis size up to {n_max} reaches eps_conv = {eps:g}")
