"""Periodic edge potentials given as finite trigonometric series."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

# Relative threshold on |W''| below which an extremum counts as degenerate.
DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class FourierPotential:
    """W(x) = a0 + sum_n a_n cos(2 pi n x / T) + b_n sin(2 pi n x / T)."""

    period: float
    cos_coeffs: tuple = (0.0,)
    sin_coeffs: tuple = ()

    def __post_init__(self):
        period = float(self.period)
        if not (math.isfinite(period) and period > 0):
            raise ValueError(f"period must be a positive finite number, got {self.period!r}")
        cos = tuple(float(a) for a in self.cos_coeffs) or (0.0,)
        sin = tuple(float(b) for b in self.sin_coeffs)
        if not all(math.isfinite(c) for c in cos + sin):
            raise ValueError("Fourier coefficients must be finite")
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "cos_coeffs", cos)
        object.__setattr__(self, "sin_coeffs", sin)

    @classmethod
    def cosine(cls, amplitude, period=1.0, offset=0.0):
        return cls(period, (offset, amplitude))

    @classmethod
    def constant(cls, value, period=1.0):
        return cls(period, (value,))

    @property
    def omega(self):
        return 2.0 * math.pi / self.period

    @property
    def n_harmonics(self):
        return max(len(self.cos_coeffs) - 1, len(self.sin_coeffs))

    def harmonics(self):
        """Arrays (n, a_n, b_n) for n = 1..n_harmonics, zero padded."""
        nh = self.n_harmonics
        a = np.zeros(nh)
        b = np.zeros(nh)
        a[: len(self.cos_coeffs) - 1] = self.cos_coeffs[1:]
        b[: len(self.sin_coeffs)] = self.sin_coeffs
        return np.arange(1, nh + 1), a, b

    @property
    def is_constant(self):
        _, a, b = self.harmonics()
        return not (np.any(a) or np.any(b))

    def derivative_coeffs(self, order):
        """Coefficients (c0, a_n, b_n) of the ``order``-th derivative, same form."""
        if order < 0 or order > 3:
            raise ValueError(f"derivative order must be in 0..3, got {order}")
        n, a, b = self.harmonics()
        w = n * self.omega
        # d/dx of (a cos + b sin) maps (a, b) -> w (b, -a)
        for _ in range(order):
            a, b = w * b, -w * a
        c0 = self.cos_coeffs[0] if order == 0 else 0.0
        return c0, a, b

    def eval(self, x, order=0):
        """Value of d^order W / dx^order at ``x`` (scalar or array)."""
        c0, a, b = self.derivative_coeffs(order)
        xs = np.asarray(x, dtype=np.float64)
        if a.size == 0:
            return np.full(xs.shape, c0)[()] if xs.ndim else float(c0)
        theta = np.multiply.outer(xs, np.arange(1, a.size + 1) * self.omega)
        out = c0 + np.cos(theta) @ a + np.sin(theta) @ b
        return out if xs.ndim else float(out)

    __call__ = eval

    def mean(self):
        return self.cos_coeffs[0]

    def sup_norm(self, order=0, grid_size=2**14):
        """max |W^(order)| from a dense grid plus local polishing."""
        if self.is_constant:
            return abs(self.cos_coeffs[0]) if order == 0 else 0.0
        x = np.arange(grid_size) * (self.period / grid_size)
        vals = np.abs(self.eval(x, order))
        best = float(vals.max())
        if order < 3:
            for xc in _critical_points(self, order + 1, x):
                best = max(best, abs(self.eval(xc, order)))
        return best


@dataclass(frozen=True)
class CriticalPoint:
    x: float
    value: float
    second_derivative: float
    degenerate: bool


@dataclass(frozen=True)
class PotentialExtrema:
    w_min: float
    w_max: float
    minima: list = field(default_factory=list)
    maxima: list = field(default_factory=list)
    constant: bool = False

    @property
    def oscillation(self):
        return self.w_max - self.w_min


def _critical_points(W, order, x):
    """Roots of W^(order) in [0, T) bracketed on the sample grid ``x``."""
    d = W.eval(x, order)
    n = x.size
    h = W.period / n
    roots = []
    for i in range(n):
        d0, d1 = d[i], d[(i + 1) % n]
        if d0 == 0.0:
            roots.append(x[i])
        elif d0 * d1 < 0:
            f = lambda t: W.eval(t, order)  # noqa: E731
            a, b = x[i], x[i] + h
            fa, fb = f(a), f(b)
            if fa * fb < 0:
                roots.append(brentq(f, a, b, xtol=1e-14 * W.period))
            else:
                # x = T versus x = 0 differ by round-off at the wrap; keep the smaller residual
                roots.append(a if abs(fa) <= abs(fb) else b)
    out = []
    for r in sorted(r % W.period for r in roots):
        if not out or r - out[-1] > 1e-3 * h:
            out.append(r)
    if len(out) > 1 and (out[0] + W.period - out[-1]) <= 1e-3 * h:
        out.pop()
    return out


def range_and_extrema(W, grid_size=1024):
    """Global range [W_-, W_+] and the extremal sets over one period."""
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    if W.is_constant:
        c = W.cos_coeffs[0]
        return PotentialExtrema(c, c, [], [], constant=True)
    x = np.arange(grid_size) * (W.period / grid_size)
    vals = W.eval(x)
    crit = _critical_points(W, 1, x)
    w_max = max([float(vals.max())] + [float(W.eval(c)) for c in crit])
    w_min = min([float(vals.min())] + [float(W.eval(c)) for c in crit])
    scale = max(w_max - w_min, abs(w_max), abs(w_min))
    tol = 1e-12 * scale
    d2max = W.sup_norm(2)
    minima, maxima = [], []
    for c in crit:
        v = W.eval(c)
        d2 = W.eval(c, 2)
        point = CriticalPoint(float(c), float(v), float(d2), abs(d2) <= DEGENERACY_RTOL * d2max)
        if v >= w_max - tol:
            maxima.append(point)
        elif v <= w_min + tol:
            minima.append(point)
    return PotentialExtrema(w_min, w_max, minima, maxima)


def gap_condition(W, b):
    """Sufficient condition W_+ - W_- < 2b for every gap to be open."""
    if b <= 0:
        raise ValueError("b must be positive")
    return range_and_extrema(W).oscillation < 2.0 * b
