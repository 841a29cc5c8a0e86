"""Sign-continued real eigenfunction sections, translation identity, tail decay."""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.special import roots_legendre

from .errors import ConvergenceError

MIN_OVERLAP = 0.5
# Beyond b * xi^2 ~ 70 the Hermite-expanded tail is dominated by coefficient round-off.
TAIL_LIMIT = 70.0


@dataclass(frozen=True, eq=False)
class EigenSection:
    """Band-j eigenvectors on a k-grid with signs chained so neighbours overlap positively.

    ``coeffs[i]`` expands the shifted eigenfunction psi~(x; k_i) in the Hermite
    basis; the unshifted psi(x; k_i) is the same expansion centred at k_i / b.
    """

    j: int
    k_grid: np.ndarray
    coeffs: np.ndarray
    overlaps: np.ndarray
    basis: object

    def psi(self, i, x):
        return self.basis.evaluate(self.coeffs[i], x, center=self.k_grid[i] / self.basis.b)

    def norms(self):
        return np.linalg.norm(self.coeffs, axis=1)

    def projector(self, i):
        c = self.coeffs[i]
        return np.outer(c, c)


def _canonical_sign(c):
    i = int(np.argmax(np.abs(c)))
    return c if c[i] > 0 else -c


def build_section(bands, j, grid):
    """Eigenvectors of band j along ``grid`` (ascending k), sign-continued."""
    ks = np.asarray(grid, dtype=np.float64)
    coeffs = np.empty((ks.size, bands.basis.size))
    overlaps = np.empty(max(ks.size - 1, 0))
    for i, k in enumerate(ks):
        c = bands.eigenvector(j, k).copy()
        if i == 0:
            c = _canonical_sign(c)
        else:
            dot = float(coeffs[i - 1] @ c)
            if dot < 0:
                c, dot = -c, -dot
            if dot < MIN_OVERLAP:
                raise ConvergenceError(
                    f"overlap {dot:.3f} between k={ks[i - 1]:.6g} and k={k:.6g}; refine the grid"
                )
            overlaps[i - 1] = dot
        coeffs[i] = c
    return EigenSection(j, ks, coeffs, overlaps, bands.basis)


def holonomy(bands, j, k0=0.0, steps=512):
    """Sign picked up by continuing psi~ once around a period; must be +1 or -1 exactly."""
    grid = k0 + np.arange(steps + 1) * (bands.tau / steps)
    section = build_section(bands, j, grid)
    dot = float(section.coeffs[0] @ section.coeffs[-1])
    if abs(abs(dot) - 1.0) > 1e-8:
        raise ConvergenceError(f"section does not close around the period: overlap {dot:.12f}")
    return 1 if dot > 0 else -1


def projector_defect(section, i):
    """Frobenius norm of P^2 - P for the rank-one projector at grid point i."""
    p = section.projector(i)
    return float(np.linalg.norm(p @ p - p))


def real_space_grid(bands, xi_max, width, size=4001):
    half = xi_max + width + 6.0 / math.sqrt(bands.b)
    return np.linspace(-half, half, size)


def translate_identity_check(bands, j, l, k, x=None):
    """L2 distance between psi(.; k + l tau) and psi(. - l T; k), up to a global sign."""
    T = bands.W.period
    if x is None:
        x = real_space_grid(bands, abs(l) * T, 0.0)
    b = bands.b
    kl = k + l * bands.tau
    shifted = bands.basis.evaluate(bands.eigenvector(j, kl), x, center=kl / b)
    base = bands.basis.evaluate(bands.eigenvector(j, k), x - l * T, center=k / b)
    dx = x[1] - x[0]
    dist = min(np.sum((shifted - base) ** 2), np.sum((shifted + base) ** 2))
    return float(math.sqrt(dist * dx))


def interval_mass(bands, j, k0, interval, shifts, order=64):
    """int_I psi_j(x - xi; k0)^2 dx for each xi, by Gauss-Legendre on I."""
    lo, hi = interval
    t, w = roots_legendre(order)
    x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w
    c = bands.eigenvector(j, k0)
    center = k0 / bands.b
    shifts = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    pts = (x[None, :] - shifts[:, None]).ravel()
    vals = bands.basis.evaluate(c, pts, center=center).reshape(shifts.size, order)
    return (vals**2) @ w


@dataclass(frozen=True)
class DecayFit:
    slope: float
    xi: np.ndarray
    log_mass: np.ndarray
    ratio: np.ndarray  # xi^-2 ln int_I psi^2
    residual: float
    dropped: tuple


def decay_slope(bands, j, k0, interval, xis):
    """Gaussian decay rate lim xi^-2 ln int_I psi_j(x - xi; k0)^2 dx, expected -b.

    The logarithm is fitted by a xi^2 + c xi + d ln xi + e, which absorbs the
    sub-leading terms produced by a finite interval and polynomial prefactors;
    the coefficient of xi^2 is returned as the limit.
    """
    xis = np.asarray(xis, dtype=np.float64)
    b = bands.b
    masses = interval_mass(bands, j, k0, interval, xis)
    c = bands.eigenvector(j, k0)
    # Tail mass below the weight of the highest basis functions is truncation noise.
    floor = float(np.max(c[-max(1, c.size // 8):] ** 2))
    keep = (b * xis**2 <= TAIL_LIMIT) & (masses > floor) & np.isfinite(masses)
    dropped = tuple(float(x) for x in xis[~keep])
    if dropped:
        warnings.warn(f"dropping xi values outside the trustworthy tail: {dropped}", RuntimeWarning)
    xi, mass = xis[keep], masses[keep]
    if xi.size < 5:
        raise ConvergenceError(f"only {xi.size} usable xi values; need at least 5 for the decay fit")
    log_mass = np.log(mass)
    design = np.column_stack([xi**2, xi, np.log(np.abs(xi)), np.ones_like(xi)])
    coef, *_ = np.linalg.lstsq(design, log_mass, rcond=None)
    resid = float(np.max(np.abs(design @ coef - log_mass)))
    return DecayFit(float(coef[0]), xi, log_mass, log_mass / xi**2, resid, dropped)
