"""Effective operators near the top edge of band j.

All of them act on the lattice of translated edge states
psi_j(x - l T; k_alpha), l in Z, one family per non-degenerate maximum
k_alpha of E_j with curvature mu_alpha = -E_j''(k_alpha) / 2.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import eigvalsh
from scipy.special import roots_legendre

from .. import specutil
from ..bands import locate_extrema
from ..errors import ConvergenceError, DegenerateExtremumError, NoiseFloorError, PreconditionError

NOISE_FLOOR = 1e-12
MAX_CUTOFF = 4096
# sum over m in Z of 1 / (m^2 + 1)
COTH_SUM = math.pi / math.tanh(math.pi)


def ent(t):
    """Smallest positive integer >= t, tolerant to round-off just above an integer."""
    if not t > 0:
        raise ValueError("Ent is defined for t > 0")
    return max(1, math.ceil(t - 1e-12 * max(1.0, t)))


def gauss_legendre(lo, hi, order):
    t, w = roots_legendre(order)
    return 0.5 * (hi - lo) * t + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def interval_exp_integral(omega, lo, hi):
    """Exact int_lo^hi exp(-i omega y) dy for an array of frequencies."""
    h = hi - lo
    return np.exp(-0.5j * omega * (lo + hi)) * h * np.sinc(omega * h / (2.0 * math.pi))


@dataclass(frozen=True)
class EdgeState:
    k: float
    mu: float
    coeffs: np.ndarray


class EffectiveModel:
    """Edge states at the maxima of band j, with lattice translations."""

    def __init__(self, bands, j, states, e_max):
        if not states:
            raise DegenerateExtremumError(f"band {j} has no maximum to build an effective model on")
        if any(not s.mu > 0 for s in states):
            raise DegenerateExtremumError("all band maxima must have positive curvature")
        self.bands = bands
        self.j = j
        self.states = tuple(states)
        self.e_max = e_max

    @classmethod
    def from_bands(cls, bands, j, grid=512):
        _, maxima = locate_extrema(bands, j, grid=grid)
        bad = [m.k for m in maxima if m.degenerate or not m.mu > 0]
        if bad:
            raise DegenerateExtremumError(f"degenerate maxima of band {j} at k = {bad}; counting refused")
        states = [EdgeState(m.k, m.mu, bands.eigenvector(j, m.k).copy()) for m in maxima]
        return cls(bands, j, states, max(m.value for m in maxima))

    @property
    def b(self):
        return self.bands.b

    @property
    def period(self):
        return self.bands.W.period

    @property
    def tau(self):
        return self.bands.tau

    @property
    def n_maxima(self):
        return len(self.states)

    @property
    def mus(self):
        return np.array([s.mu for s in self.states])

    def psi(self, alpha, l, x):
        """psi_j(x - l T; k_alpha) at points x."""
        s = self.states[alpha]
        return self.bands.basis.evaluate(s.coeffs, np.asarray(x) - l * self.period, center=s.k / self.b)

    def psi_table(self, ls, x):
        """Array [alpha, l, p] of psi_j(x_p - l T; k_alpha)."""
        x = np.asarray(x, dtype=np.float64)
        ls = np.asarray(ls)
        out = np.empty((self.n_maxima, ls.size, x.size))
        pts = (x[None, :] - ls[:, None] * self.period).ravel()
        for a, s in enumerate(self.states):
            vals = self.bands.basis.evaluate(s.coeffs, pts, center=s.k / self.b)
            out[a] = vals.reshape(ls.size, x.size)
        return out

    def interval_mass(self, alpha, ls, interval, order=64):
        """int_I psi_j(x - l T; k_alpha)^2 dx for each l."""
        x, w = gauss_legendre(interval[0], interval[1], order)
        vals = self.psi_table(ls, x)[alpha]
        return (vals**2) @ w

    def index(self, L):
        """Flattened (l, alpha) labels for |l| <= L, alpha fastest."""
        return [(l, a) for l in range(-L, L + 1) for a in range(self.n_maxima)]

    def frequencies(self, L):
        return np.array([l * self.tau + self.states[a].k for l, a in self.index(L)])


def lattice_cutoff(weight, threshold, start=1, patience=3):
    """Smallest L >= start with weight(l) < threshold / 10 for L < |l| <= L + patience.

    ``weight(l)`` is an upper estimate of the diagonal entry belonging to
    lattice site l (maximised over both signs of l by the caller).
    """
    L = start
    while L <= MAX_CUTOFF:
        if all(weight(L + d) < threshold / 10.0 for d in range(1, patience + 1)):
            return L
        L += 1
    raise ConvergenceError(f"lattice cutoff exceeds {MAX_CUTOFF}; threshold {threshold:g} too small")


def diagonal_weight(model, V):
    """l -> max_alpha, +-l of mu^-1/2 sum_r C_r |J_r| int_{I_r} psi(x - l T)^2 dx."""

    def weight(l):
        best = 0.0
        for a in range(model.n_maxima):
            total = np.zeros(2)
            for r in V.rectangles:
                total += r.amplitude * r.height * model.interval_mass(a, [-l, l], r.x_interval)
            best = max(best, float(total.max()) / math.sqrt(model.states[a].mu))
        return best

    return weight


def gram_G2(model, V, L, x_order=64, check=True):
    """Hermitian Gram matrix G2^* G2 on sites |l| <= L (alpha fastest).

    Entry ((l,a),(m,b)) is (mu_a mu_b)^-1/4 sum_r C_r X_r Y_r with
    X_r = int_{I_r} psi(x - lT; k_a) psi(x - mT; k_b) dx by Gauss-Legendre and
    Y_r = int_{J_r} exp(-i y ((l - m) tau + k_a - k_b)) dy in closed form.
    """
    idx = model.index(L)
    n = len(idx)
    if V.is_zero:
        return np.zeros((n, n), dtype=complex)
    g = _gram(model, V, L, x_order)
    if check:
        fine = _gram(model, V, L, 2 * x_order)
        change = float(np.max(np.abs(fine - g)))
        if change > 1e-10 * max(float(np.max(np.abs(fine))), 1e-300):
            raise ConvergenceError(f"x-quadrature of order {x_order} not converged (entries move by {change:.3e})")
    return g


def _gram(model, V, L, x_order):
    idx = model.index(L)
    ls = np.arange(-L, L + 1)
    theta = model.frequencies(L)
    d = np.array([model.states[a].mu ** -0.25 for _, a in idx])
    g = np.zeros((len(idx), len(idx)), dtype=complex)
    for r in V.rectangles:
        x, w = gauss_legendre(r.x0, r.x1, x_order)
        table = model.psi_table(ls, x)  # [alpha, l, p]
        psi = table.transpose(1, 0, 2).reshape(len(idx), x.size)  # rows in (l, alpha) order
        xmat = (psi * w) @ psi.T
        ymat = interval_exp_integral(theta[:, None] - theta[None, :], r.y0, r.y1)
        g += r.amplitude * xmat * ymat
    g = d[:, None] * g * d[None, :]
    return 0.5 * (g + g.conj().T)


def g2_threshold(lam):
    """Eigenvalue threshold 2 sqrt(lambda) for the Gram matrix (s = sqrt(2 sqrt(lambda)))."""
    return 2.0 * math.sqrt(lam)


def check_noise_floor(lam, norm):
    floor = NOISE_FLOOR * norm
    if g2_threshold(lam) < floor:
        raise NoiseFloorError(
            f"2 sqrt(lambda) = {g2_threshold(lam):.3e} is below the eigensolver noise floor "
            f"{floor:.3e} = 1e-12 * ||gram||"
        )


def count_G2(lam, gram):
    """n_*(sqrt(2 sqrt(lambda)); G2) = n_+(2 sqrt(lambda); G2^* G2)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if gram.size == 0:
        return 0
    norm = float(np.max(np.abs(eigvalsh(gram)))) if gram.size else 0.0
    if norm == 0.0:
        return 0
    check_noise_floor(lam, norm)
    return specutil.count_pos(g2_threshold(lam), gram)


def count_G2_many(lams, gram):
    """count_G2 for several lambdas with a single eigensolve."""
    eigs = eigvalsh(gram) if gram.size else np.zeros(0)
    norm = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    out = []
    for lam in lams:
        if not lam > 0:
            raise ValueError("lambda must be positive")
        if norm == 0.0:
            out.append(0)
            continue
        check_noise_floor(lam, norm)
        out.append(int(np.count_nonzero(eigs > g2_threshold(lam))))
    return out


def g2_cutoff(model, V, lam_min):
    return lattice_cutoff(diagonal_weight(model, V), g2_threshold(lam_min))


def stable_G2_counts(model, V, lams, L=None, x_order=64):
    """G2 counts with the lattice cutoff grown until L -> L + 2 moves no count by more than 1."""
    if V.is_zero:
        return [0] * len(lams), 0
    if L is None:
        L = g2_cutoff(model, V, min(lams))
    counts = count_G2_many(lams, gram_G2(model, V, L, x_order))
    while True:
        wider = count_G2_many(lams, gram_G2(model, V, L + 2, x_order))
        if max(abs(a - c) for a, c in zip(counts, wider)) <= 1:
            return counts, L
        if L + 2 > MAX_CUTOFF:
            raise ConvergenceError("G2 counts do not stabilise under lattice refinement")
        L, counts = L + 2, wider


class M1Operator:
    """Nystrom discretisation of M1(lambda) = G1(lambda) G1(lambda)^* on supp V.

    Kernel: sqrt(V V') sum_{l, alpha} exp(-sqrt(lambda/mu) |y - y'|) / (2 sqrt(mu lambda))
    * exp(i (l tau + k_alpha)(y - y')) psi(x - lT; k_alpha) psi(x' - lT; k_alpha).
    The lambda-independent lattice sums are precomputed once.
    """

    def __init__(self, model, V, L, order=(16, 16)):
        self.model = model
        self.V = V
        self.L = L
        self.order = order
        xs, ys, wts = [], [], []
        for r in V.rectangles:
            x, wx = gauss_legendre(r.x0, r.x1, order[0])
            y, wy = gauss_legendre(r.y0, r.y1, order[1])
            xs.append(np.repeat(x, y.size))
            ys.append(np.tile(y, x.size))
            wts.append(r.amplitude * np.outer(wx, wy).ravel())
        self.x = np.concatenate(xs) if xs else np.zeros(0)
        self.y = np.concatenate(ys) if ys else np.zeros(0)
        # Quadrature for the measure V dx dy: overlapping rectangles contribute separately.
        self.weights = np.concatenate(wts) if wts else np.zeros(0)
        ls = np.arange(-L, L + 1)
        table = model.psi_table(ls, self.x)
        self._lattice = []
        for a, s in enumerate(model.states):
            theta = ls * model.tau + s.k
            u = table[a].T * np.exp(1j * np.outer(self.y, theta))  # [p, l]
            self._lattice.append(u @ u.conj().T)
        self._dy = np.abs(self.y[:, None] - self.y[None, :])
        self._sqrt_w = np.sqrt(self.weights)

    def matrix(self, lam):
        if not lam > 0:
            raise ValueError("lambda must be positive")
        k = np.zeros_like(self._dy, dtype=complex)
        for s, lat in zip(self.model.states, self._lattice):
            k += np.exp(-math.sqrt(lam / s.mu) * self._dy) / (2.0 * math.sqrt(s.mu * lam)) * lat
        a = self._sqrt_w[:, None] * k * self._sqrt_w[None, :]
        return 0.5 * (a + a.conj().T)

    def count(self, lam, s=1.0):
        """n_+(s^2; M1(lambda)), the Nystrom stand-in for n_*(s; G1(lambda))."""
        if self.x.size == 0:
            return 0
        return specutil.count_pos(s * s, self.matrix(lam))


def m1_nystrom(lam, model, V, L, order=(16, 16), check=True):
    """Nystrom matrix of M1(lambda); with ``check`` the count at s = 1 must survive order doubling."""
    op = M1Operator(model, V, L, order)
    if check and not V.is_zero:
        fine = M1Operator(model, V, L, (2 * order[0], 2 * order[1]))
        c0, c1 = op.count(lam), fine.count(lam)
        if abs(c0 - c1) > 1:
            raise ConvergenceError(f"M1 count moves from {c0} to {c1} under quadrature doubling")
    return op.matrix(lam)


@dataclass(frozen=True)
class NuTables:
    """Diagonal majorant nu+_{l,alpha} and minorant nu-_m, each indexed by lattice site."""

    upper: np.ndarray  # shape (2 L_+ + 1, A)
    lower: np.ndarray  # shape (2 M + 1,)
    L_plus: int
    M_minus: int
    L_q: int

    def count_upper(self, threshold):
        return int(np.count_nonzero(self.upper > threshold))

    def count_lower(self, threshold):
        return int(np.count_nonzero(self.lower > threshold))


def lower_rectangle(V, tau):
    """Rectangle of V used for the minorant: largest capacity, then amplitude, then width."""
    if V.is_zero:
        raise PreconditionError("Omega_- is empty: zero perturbation")
    return max(
        V.rectangles,
        key=lambda r: (1.0 / ent(2.0 * math.pi / (tau * r.height)), r.amplitude, r.width),
    )


def nu_bounds(model, V, lam_min, s=1.0):
    """nu+ over (l, alpha) from the bounding box and nu- over m from the best inner rectangle.

    Both tables are truncated where entries fall below a tenth of the smallest
    probed threshold s^2 sqrt(lambda_min); the sum over m of (m^2 + 1)^-1 is
    summed in closed form (pi coth pi), so it carries no truncation tail.
    """
    if V.is_zero:
        raise PreconditionError("Omega_- is empty: zero perturbation")
    threshold = s * s * math.sqrt(lam_min)
    box = V.bounding_box()
    mus = model.mus
    pref_plus = box.amplitude * box.height * float(np.sum(mus**-0.5)) * COTH_SUM

    def upper_weight(l):
        masses = [model.interval_mass(a, [-l, l], box.x_interval).max() for a in range(model.n_maxima)]
        return pref_plus * (l * l + 1) * max(masses)

    L_plus = lattice_cutoff(upper_weight, threshold)
    ls = np.arange(-L_plus, L_plus + 1)
    upper = np.column_stack(
        [pref_plus * (ls**2 + 1) * model.interval_mass(a, ls, box.x_interval) for a in range(model.n_maxima)]
    )

    rect = lower_rectangle(V, model.tau)
    L_q = ent(2.0 * math.pi / (model.tau * rect.height))
    pref_minus = rect.amplitude * 2.0 * math.pi / (model.tau * L_q * math.sqrt(model.states[0].mu))

    def lower_weight(m):
        return pref_minus * float(model.interval_mass(0, [-m * L_q, m * L_q], rect.x_interval).max())

    M = lattice_cutoff(lower_weight, threshold)
    ms = np.arange(-M, M + 1)
    lower = pref_minus * model.interval_mass(0, ms * L_q, rect.x_interval)
    return NuTables(upper, lower, L_plus, M, L_q)


def capacity(V, b, period):
    """Per-rectangle vertical-chord capacity max_r 1 / Ent(2 pi / (b T |J_r|))."""
    if V.is_zero:
        raise PreconditionError("capacity needs a non-empty set")
    return max(1.0 / ent(2.0 * math.pi / (b * period * r.height)) for r in V.rectangles)


def sandwich_bounds(model, V):
    """(sqrt(2) / (sqrt(b) T)) * (C(Omega_-), A_j^+)."""
    scale = math.sqrt(2.0) / (math.sqrt(model.b) * model.period)
    return scale * capacity(V, model.b, model.period), scale * model.n_maxima
