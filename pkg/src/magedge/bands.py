"""Band functions E_j(k), band edges, open gaps and extremum sets."""

from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, solve
from scipy.optimize import brentq

from .errors import ConstantBandError, ConvergenceError, PreconditionError
from .fiber import DEFAULT_EPS_CONV, DEFAULT_SIZE, FiberModel, HermiteBasis, converge
from .potential import range_and_extrema

DEFAULT_GRID = 512


class BandStructure:
    """Lowest ``n_bands`` band functions of a fixed (W, b, basis)."""

    def __init__(self, W, b, size=DEFAULT_SIZE, quad_order=None, n_bands=8, cache_size=256):
        if n_bands > size // 2:
            raise PreconditionError(f"n_bands = {n_bands} exceeds half the basis size {size}")
        self.model = FiberModel(HermiteBasis.create(b, size, quad_order), W)
        self.n_bands = int(n_bands)
        self._cache = OrderedDict()
        self._cache_size = cache_size

    @classmethod
    def converged(cls, W, b, n_bands=8, eps=DEFAULT_EPS_CONV, n_start=DEFAULT_SIZE, n_max=1024):
        size = converge(W, b, n_bands, n_start=n_start, eps=eps, n_max=n_max)
        return cls(W, b, size=size, n_bands=n_bands)

    @property
    def W(self):
        return self.model.W

    @property
    def b(self):
        return self.model.b

    @property
    def tau(self):
        return self.model.tau

    @property
    def basis(self):
        return self.model.basis

    def eig(self, k):
        """(eigenvalues, eigenvectors) of the truncated fiber matrix at ``k``."""
        key = float(k)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        solved = self.model.solve(key, self.n_bands)
        hit = (solved.eigenvalues, solved.eigenvectors)
        self._cache[key] = hit
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return hit

    def energies(self, k):
        return self.eig(k)[0]

    def eigenvector(self, j, k):
        return self.eig(k)[1][:, j - 1]

    def derivatives(self, k):
        """Feynman-Hellmann E_j'(k) for all bands: (1/b) <psi|W'(. + k/b)|psi>."""
        vecs = self.eig(k)[1]
        p1 = self.model.potential_matrix(k, 1)
        return np.einsum("ij,ik,kj->j", vecs, p1, vecs) / self.b

    def sweep(self, k_grid, threads=1):
        """Energies and FH derivatives on a k-grid, arrays of shape (len(k_grid), n_bands)."""

        def both(k):
            solved = self.model.solve(float(k), self.n_bands)
            vecs = solved.eigenvectors
            p1 = self.model.potential_matrix(float(k), 1)
            return solved.eigenvalues, np.einsum("ij,ik,kj->j", vecs, p1, vecs) / self.b

        ks = [float(k) for k in np.asarray(k_grid)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(both, ks))
        else:
            rows = [both(k) for k in ks]
        energies = np.array([r[0] for r in rows])
        derivs = np.array([r[1] for r in rows])
        return energies, derivs


def band_derivative(bands, j, k):
    return float(bands.derivatives(k)[j - 1])


@dataclass(frozen=True)
class Curvature:
    value: float
    dpsi_norm: float  # L2 norm of d/dk of the shifted eigenfunction


def band_curvature(bands, j, k):
    """E_j''(k) from second-order perturbation theory with a deflated solve.

    d/dk psi~ = -(1/b) (h~ - E)^{-1} (I - pi) W'(. + k/b) psi~ is obtained by
    solving (H - E + b P_psi) x = (I - P_psi) W' psi in the Hermite basis.
    """
    model = bands.model
    vals, vecs = bands.eig(k)
    c = vecs[:, j - 1]
    e = vals[j - 1]
    b = bands.b
    h = model.matrix(k)
    p1 = model.potential_matrix(k, 1)
    p2 = model.potential_matrix(k, 2)
    v = p1 @ c
    v_perp = v - c * (c @ v)
    a = h - e * np.eye(h.shape[0]) + b * np.outer(c, c)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            x = solve(a, v_perp, assume_a="sym")
    except (LinAlgError, LinAlgWarning) as exc:
        raise ConvergenceError(f"deflated solve failed for band {j} at k={k}: {exc}") from exc
    value = (c @ p2 @ c - 2.0 * (v_perp @ x)) / b**2
    return Curvature(float(value), float(np.linalg.norm(x) / b))


@dataclass(frozen=True)
class ExtremumPoint:
    k: float
    kind: str  # "min" or "max"
    value: float
    second_derivative: float
    degenerate: bool

    @property
    def mu(self):
        """Curvature -1/2 E'' at a maximum, +1/2 E'' at a minimum."""
        sign = -1.0 if self.kind == "max" else 1.0
        return 0.5 * sign * self.second_derivative

    @property
    def order(self):
        # Higher even orders are not resolved.
        return None if self.degenerate else 1


@dataclass
class BandAnalysis:
    j: int
    k_grid: np.ndarray
    values: np.ndarray
    e_min: float
    e_max: float
    minima: list = field(default_factory=list)
    maxima: list = field(default_factory=list)
    constant: bool = False
    gap_above: tuple = None

    @property
    def width(self):
        return self.e_max - self.e_min


def k_grid(bands, size=DEFAULT_GRID):
    return np.arange(size) * (bands.tau / size)


def _critical_points(bands, j, ks, derivs):
    n = ks.size
    tau = bands.tau
    step = tau / n
    xtol = 1e-12 * max(1.0, tau)
    roots = []
    for i in range(n):
        d0, d1 = derivs[i], derivs[(i + 1) % n]
        if d0 == 0.0:
            roots.append(ks[i])
        elif d0 * d1 < 0:
            f = lambda k: band_derivative(bands, j, k)  # noqa: E731
            a, b = ks[i], ks[i] + step
            fa, fb = f(a), f(b)
            if fa == 0.0 or fb == 0.0:
                roots.append(a if fa == 0.0 else b)
            elif fa * fb < 0:
                roots.append(brentq(f, a, b, xtol=xtol))
            else:
                # Sign change in the sweep was round-off; keep the endpoint closest to zero.
                roots.append(a if abs(fa) <= abs(fb) else b)
    out = []
    wrapped = [r % tau for r in roots]
    for r in sorted(0.0 if tau - r <= 1e-6 * step else r for r in wrapped):
        if not out or r - out[-1] > 1e-6 * step:
            out.append(r)
    if len(out) > 1 and out[0] + tau - out[-1] <= 1e-6 * step:
        out.pop()
    return out


def analyze_band(bands, j, ks, energies, derivs):
    """Edges and extremum sets of band j from a sampled sweep plus root polishing."""
    values = energies[:, j - 1]
    spread = float(values.max() - values.min())
    # Eigenvalue round-off grows with the norm of the truncated matrix, not with |E_j|.
    scale = max(1.0, float(np.abs(values).max()), float(bands.basis.levels[-1]))
    if spread <= 1e-12 * scale:
        return BandAnalysis(j, ks, values, float(values.min()), float(values.max()), constant=True)
    points = []
    for kc in _critical_points(bands, j, ks, derivs[:, j - 1]):
        e = float(bands.energies(kc)[j - 1])
        points.append((kc, e, band_curvature(bands, j, kc).value))
    e_max = max([float(values.max())] + [p[1] for p in points])
    e_min = min([float(values.min())] + [p[1] for p in points])
    width = e_max - e_min
    tol = max(1e-10 * width, 64 * np.finfo(float).eps * scale)
    eps_deg = 1e-6 * width / bands.tau**2
    maxima = [
        ExtremumPoint(kc, "max", e, d2, abs(d2) <= eps_deg) for kc, e, d2 in points if e >= e_max - tol
    ]
    minima = [
        ExtremumPoint(kc, "min", e, d2, abs(d2) <= eps_deg) for kc, e, d2 in points if e <= e_min + tol
    ]
    return BandAnalysis(j, ks, values, e_min, e_max, minima, maxima)


def band_edges_and_gaps(bands, j_max, grid=DEFAULT_GRID, threads=1, sweep=None):
    """BandAnalysis for bands 1..j_max; gap_above set where E_j^+ < E_{j+1}^-."""
    if j_max > bands.n_bands:
        raise PreconditionError(f"j_max = {j_max} exceeds the {bands.n_bands} computed bands")
    ks = k_grid(bands, grid)
    energies, derivs = sweep if sweep is not None else bands.sweep(ks, threads=threads)
    top = min(j_max + 1, bands.n_bands)
    analyzed = [analyze_band(bands, j, ks, energies, derivs) for j in range(1, top + 1)]
    for band, upper in zip(analyzed, analyzed[1:]):
        if band.e_max < upper.e_min:
            band.gap_above = (band.e_max, upper.e_min)
    return analyzed[:j_max]


def locate_extrema(bands, j, grid=DEFAULT_GRID, sweep=None):
    """(minima, maxima) of band j; raises ConstantBandError for a flat band."""
    ks = k_grid(bands, grid)
    energies, derivs = sweep if sweep is not None else bands.sweep(ks)
    band = analyze_band(bands, j, ks, energies, derivs)
    if band.constant:
        raise ConstantBandError(f"band {j} is constant in k; extremum set undefined")
    return band.minima, band.maxima


def landau_level(b, j):
    return b * (2 * j - 1)


def band_bracket(W, b, j):
    """Min-max enclosure [b(2j-1) + W_-, b(2j-1) + W_+] of band j."""
    ext = range_and_extrema(W)
    return landau_level(b, j) + ext.w_min, landau_level(b, j) + ext.w_max
