"""Birman-Schwinger reference count for eigenvalues created in a spectral gap.

For E in the gap above band j, the number of eigenvalues of H0 + V that
lie above E equals the number of eigenvalues below -1 of
V^1/2 (H0 - E)^-1 V^1/2. The resolvent kernel is assembled from the band
data as

    (2 pi)^-1 sum_n sum_l int_0^tau psi_n(x - lT; k) psi_n(x' - lT; k)
        exp(i (k + l tau)(y - y')) / (E_n(k) - E) dk,

which unfolds the k-integral over R with the lattice translation identity.
The k-integral uses composite Gauss-Legendre panels graded geometrically
towards each maximum of band j, where the integrand of band j peaks.
"""

import math

import numpy as np

from .. import specutil
from ..bands import band_edges_and_gaps
from ..errors import ConvergenceError, PreconditionError
from .effective import gauss_legendre

EDGE_MARGIN = 1e-8
TAIL_LIMIT = 0.5


def graded_nodes(tau, centers, scale, order=12, ratio=2.0):
    """Quadrature on [0, tau) split at midpoints between ``centers``, graded towards each centre."""
    centers = sorted(c % tau for c in centers)
    n = len(centers)
    nodes, weights = [], []
    for i, c in enumerate(centers):
        left = centers[i - 1] - (tau if i == 0 else 0.0)
        right = centers[(i + 1) % n] + (tau if i == n - 1 else 0.0)
        for direction, half in ((-1.0, 0.5 * (c - left)), (1.0, 0.5 * (right - c))):
            edges = [0.0]
            h = scale / 8.0
            while edges[-1] + h < half:
                edges.append(edges[-1] + h)
                h *= ratio
            edges.append(half)
            for a, b in zip(edges, edges[1:]):
                x, w = gauss_legendre(a, b, order)
                nodes.append(c + direction * x)
                weights.append(w)
    k = np.concatenate(nodes) % tau
    w = np.concatenate(weights)
    idx = np.argsort(k)
    return k[idx], w[idx]


class BirmanSchwinger:
    """Resolvent sandwich on supp V for energies just above the top of band j.

    Band data (energies and real-space edge states for every k-node, band
    and lattice shift) are computed once for the smallest lambda and reused
    for every probed energy.
    """

    def __init__(self, bands, j, V, lam_min, order=(12, 12), k_order=12, j_max=None, lattice=None):
        if V.is_zero:
            self.size = 0
            return
        self.bands, self.j, self.V = bands, j, V
        analyses = band_edges_and_gaps(bands, bands.n_bands)
        self.analyses = analyses
        top = analyses[j - 1]
        if j >= len(analyses):
            raise PreconditionError(f"band {j + 1} is needed to bound the gap above band {j}")
        if top.gap_above is None:
            raise PreconditionError(f"no open gap above band {j}")
        self.e_plus, self.e_next = top.gap_above
        gap = self.e_next - self.e_plus
        if j_max is None:
            j_max = next(
                (n for n in range(j + 1, len(analyses)) if analyses[n].e_min - self.e_plus > 10.0 * gap),
                None,
            )
            if j_max is None:
                raise PreconditionError(
                    f"{bands.n_bands} bands do not reach 10x the gap width above the gap; compute more bands"
                )
        if j_max >= len(analyses):
            raise PreconditionError("j_max must leave one computed band above it for the tail estimate")
        self.j_max = j_max
        self.tail_band_edge = analyses[j_max].e_min  # E_{j_max + 1}^-
        self.v_sup = V.sup()
        self.lam_min = lam_min
        self._check_energy(lam_min)

        # Spatial Nystrom nodes; weights integrate against V dx dy.
        xs, ys, ws = [], [], []
        for r in V.rectangles:
            x, wx = gauss_legendre(r.x0, r.x1, order[0])
            y, wy = gauss_legendre(r.y0, r.y1, order[1])
            xs.append(np.repeat(x, y.size))
            ys.append(np.tile(y, x.size))
            ws.append(r.amplitude * np.outer(wx, wy).ravel())
        self.x, self.y = np.concatenate(xs), np.concatenate(ys)
        self.sqrt_w = np.sqrt(np.concatenate(ws))
        self.size = self.x.size

        maxima = [m.k for m in top.maxima]
        mu = min(max(m.mu, 1e-300) for m in top.maxima) if top.maxima else 1.0
        scale = math.sqrt(lam_min / mu) if top.maxima else bands.tau / 64
        self.k_nodes, self.k_weights = graded_nodes(bands.tau, maxima or [0.0], min(scale, bands.tau / 8), k_order)
        self.energies = np.array([bands.energies(k)[:j_max] for k in self.k_nodes])  # [node, n]

        self.lattice = lattice if lattice is not None else self._choose_lattice()
        ls = np.arange(-self.lattice, self.lattice + 1)
        # Column vectors u[node, n, l, p] = sqrt(w_p) psi_n(x_p - lT; k) exp(i (k + l tau) y_p).
        self._columns = self._edge_columns(ls)

    def _check_energy(self, lam):
        e = self.e_plus + lam
        if lam <= EDGE_MARGIN or e >= self.e_next - EDGE_MARGIN:
            raise PreconditionError(f"E = {e} is not strictly inside the gap ({self.e_plus}, {self.e_next})")
        tail = self.v_sup / (self.tail_band_edge - e)
        if tail > TAIL_LIMIT:
            raise ConvergenceError(f"band truncation tail estimate {tail:.3f} exceeds {TAIL_LIMIT}")
        return e

    def _real_space(self, k, ls):
        """psi_n(x_p - lT; k) for n < j_max, as array [n, l, p]."""
        vecs = self.bands.eig(k)[1][:, : self.j_max]
        T, b = self.bands.W.period, self.bands.b
        pts = (self.x[None, :] - ls[:, None] * T).ravel()
        vals = self.bands.basis.evaluate(vecs, pts, center=k / b)  # [n, l * p]
        return vals.reshape(self.j_max, ls.size, self.x.size)

    def _choose_lattice(self, start=1, limit=64):
        """Grow |l| until the next shells carry a negligible share of the weighted trace."""
        e = self.e_plus + self.lam_min
        weight = self.k_weights / np.abs(self.energies - e).T  # [n, node]
        weight = weight / (2.0 * math.pi)
        w2 = self.sqrt_w**2
        for L in range(start, limit + 1):
            shell = np.array([-(L + 1), L + 1, -(L + 2), L + 2])
            mass = np.zeros(self.j_max)
            for i, k in enumerate(self.k_nodes):
                vals = self._real_space(k, shell)
                mass += weight[:, i] * np.einsum("nlp,p->n", vals**2, w2)
            if float(mass.sum()) < 1e-3 * TAIL_LIMIT:
                return L
        raise ConvergenceError(f"lattice truncation not reached within |l| <= {limit}")

    def _edge_columns(self, ls):
        tau = self.bands.tau
        cols = np.empty((self.k_nodes.size, self.j_max, ls.size, self.size), dtype=complex)
        for i, k in enumerate(self.k_nodes):
            vals = self._real_space(k, ls)
            phase = np.exp(1j * np.outer(k + ls * tau, self.y))  # [l, p]
            cols[i] = vals * phase[None, :, :] * self.sqrt_w
        return cols

    def matrix(self, lam):
        """Nystrom matrix of V^1/2 (H0 - E)^-1 V^1/2 at E = E_j^+ + lambda."""
        if self.size == 0:
            return np.zeros((0, 0))
        e = self._check_energy(lam)
        coef = (self.k_weights[:, None] / (self.energies - e)) / (2.0 * math.pi)  # [node, n]
        flat = self._columns.reshape(-1, self._columns.shape[2], self.size)  # [(node, n), l, p]
        c = np.repeat(coef.ravel(), self._columns.shape[2])
        u = flat.reshape(-1, self.size)  # rows are column vectors u
        pos, neg = c > 0, c < 0
        up = u[pos] * np.sqrt(c[pos])[:, None]
        un = u[neg] * np.sqrt(-c[neg])[:, None]
        k = up.T @ up.conj() - un.T @ un.conj()
        return 0.5 * (k + k.conj().T)

    def count(self, lam):
        """Number of eigenvalues below -1, i.e. eigenvalues of H0 + V above E_j^+ + lambda."""
        if self.size == 0:
            return 0
        return specutil.count_neg(1.0, self.matrix(lam))


def bs_oracle(E, V, bands, j=1, **kwargs):
    """Birman-Schwinger count n_-(1; V^1/2 (H0 - E)^-1 V^1/2) for E in the gap above band j."""
    if V.is_zero:
        return 0
    analyses = band_edges_and_gaps(bands, j)
    lam = E - analyses[j - 1].e_max
    return BirmanSchwinger(bands, j, V, lam, **kwargs).count(lam)
