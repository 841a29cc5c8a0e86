"""Counting functions of finite matrices and the inequalities they obey.

n_+(s; M) and n_-(s; M) count eigenvalues of a Hermitian M above s and
below -s; n_*(s; M) counts singular values above s, i.e. n_+(s^2; M^* M).
"""

import numpy as np
from scipy.linalg import eigvalsh, svdvals


def _check_threshold(s):
    if not s > 0:
        raise ValueError(f"threshold must be positive, got {s}")


def _hermitian_eigs(m):
    m = np.asarray(m)
    if m.size == 0:
        return np.zeros(0)
    return eigvalsh(0.5 * (m + m.conj().T))


def count_pos(s, m):
    _check_threshold(s)
    return int(np.count_nonzero(_hermitian_eigs(m) > s))


def count_neg(s, m):
    _check_threshold(s)
    return int(np.count_nonzero(_hermitian_eigs(m) < -s))


def count_sv(s, m):
    _check_threshold(s)
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return int(np.count_nonzero(svdvals(m) > s))


def check_weyl(s, eps, m1, m2):
    """n_+(s(1+e); M1) - n_-(s e; M2) <= n_+(s; M1+M2) <= n_+(s(1-e); M1) + n_+(s e; M2)."""
    _check_eps(eps)
    mid = count_pos(s, m1 + m2)
    lower = count_pos(s * (1 + eps), m1) - count_neg(s * eps, m2)
    upper = count_pos(s * (1 - eps), m1) + count_pos(s * eps, m2)
    return lower <= mid <= upper


def check_kyfan(s, eps, m1, m2):
    """The Weyl-type sandwich for singular-value counts n_*."""
    _check_eps(eps)
    mid = count_sv(s, m1 + m2)
    lower = count_sv(s * (1 + eps), m1) - count_sv(s * eps, m2)
    upper = count_sv(s * (1 - eps), m1) + count_sv(s * eps, m2)
    return lower <= mid <= upper


def check_chebyshev(s, m, p=2):
    """n_*(s; M) <= s^-p ||M||_p^p, implemented for the Frobenius case p = 2 only."""
    if p != 2:
        raise NotImplementedError("only the Hilbert-Schmidt case p = 2 is supported")
    return count_sv(s, m) <= s**-2 * float(np.linalg.norm(m, "fro") ** 2)


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
