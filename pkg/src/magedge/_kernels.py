"""Hot inner loops: normalized Hermite-function recurrences.

Two implementations live side by side. The numba path is used unless the
environment variable ``MAGEDGE_NUMBA`` is set to ``0`` (or numba is not
importable), in which case the pure-numpy path is bound instead. Both are
always importable as ``numpy_impl`` / ``numba_impl`` so they can be compared.
"""

import math
import os
import types

import numpy as np

_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)
_PI_M14 = math.pi ** -0.25


def _np_hermite_table(nmax, y, shift):
    y = np.asarray(y, dtype=np.float64)
    shift = np.broadcast_to(np.asarray(shift, dtype=np.float64), y.shape)
    out = np.zeros((nmax, y.size))
    logs = np.zeros(y.size)
    p_prev = np.zeros(y.size)
    p_cur = np.full(y.size, _PI_M14)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        for n in range(nmax):
            if n == 1:
                p_prev, p_cur = p_cur, math.sqrt(2.0) * y * p_cur
            elif n > 1:
                p_next = math.sqrt(2.0 / n) * y * p_cur - math.sqrt((n - 1) / n) * p_prev
                p_prev, p_cur = p_cur, p_next
            big = np.abs(p_cur) > _RESCALE
            if big.any():
                p_prev[big] /= _RESCALE
                p_cur[big] /= _RESCALE
                logs[big] += _LOG_RESCALE
            out[n] = np.sign(p_cur) * np.exp(np.log(np.abs(p_cur)) + logs + shift)
        last = np.log(np.abs(p_cur)) + logs
    return out, last


def _np_hermite_series(coeffs, y, shift):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    table, _ = _np_hermite_table(coeffs.shape[0], y, shift)
    return coeffs.T @ table


numpy_impl = types.SimpleNamespace(
    hermite_table=_np_hermite_table, hermite_series=_np_hermite_series, name="numpy"
)

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

numba_impl = None
if numba is not None:

    @numba.njit(cache=True)
    def _nb_hermite_table(nmax, y, shift):
        npts = y.shape[0]
        out = np.zeros((nmax, npts))
        last = np.empty(npts)
        s2 = math.sqrt(2.0)
        for i in range(npts):
            yi = y[i]
            logs = 0.0
            p_prev = 0.0
            p_cur = _PI_M14
            for n in range(nmax):
                if n == 1:
                    p_prev, p_cur = p_cur, s2 * yi * p_cur
                elif n > 1:
                    p_next = math.sqrt(2.0 / n) * yi * p_cur - math.sqrt((n - 1) / n) * p_prev
                    p_prev, p_cur = p_cur, p_next
                if abs(p_cur) > _RESCALE:
                    p_prev /= _RESCALE
                    p_cur /= _RESCALE
                    logs += _LOG_RESCALE
                if p_cur != 0.0:
                    val = math.exp(math.log(abs(p_cur)) + logs + shift[i])
                    out[n, i] = val if p_cur > 0 else -val
            if p_cur != 0.0:
                last[i] = math.log(abs(p_cur)) + logs
            else:
                last[i] = -np.inf
        return out, last

    @numba.njit(cache=True)
    def _nb_hermite_series(coeffs, y, shift):
        nmax, ncol = coeffs.shape
        npts = y.shape[0]
        out = np.zeros((ncol, npts))
        acc = np.empty(ncol)
        s2 = math.sqrt(2.0)
        for i in range(npts):
            yi = y[i]
            logs = 0.0
            p_prev = 0.0
            p_cur = _PI_M14
            acc[:] = 0.0
            for n in range(nmax):
                if n == 1:
                    p_prev, p_cur = p_cur, s2 * yi * p_cur
                elif n > 1:
                    p_next = math.sqrt(2.0 / n) * yi * p_cur - math.sqrt((n - 1) / n) * p_prev
                    p_prev, p_cur = p_cur, p_next
                if abs(p_cur) > _RESCALE:
                    p_prev /= _RESCALE
                    p_cur /= _RESCALE
                    logs += _LOG_RESCALE
                if p_cur != 0.0:
                    val = math.exp(math.log(abs(p_cur)) + logs + shift[i])
                    if p_cur < 0:
                        val = -val
                    for c in range(ncol):
                        acc[c] += coeffs[n, c] * val
            for c in range(ncol):
                out[c, i] = acc[c]
        return out

    def _nb_table_wrapper(nmax, y, shift):
        y = np.ascontiguousarray(y, dtype=np.float64)
        shift = np.ascontiguousarray(np.broadcast_to(np.asarray(shift, dtype=np.float64), y.shape))
        return _nb_hermite_table(int(nmax), y, shift)

    def _nb_series_wrapper(coeffs, y, shift):
        coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        shift = np.ascontiguousarray(np.broadcast_to(np.asarray(shift, dtype=np.float64), y.shape))
        return _nb_hermite_series(coeffs, y, shift)

    numba_impl = types.SimpleNamespace(
        hermite_table=_nb_table_wrapper, hermite_series=_nb_series_wrapper, name="numba"
    )


def _select():
    if os.environ.get("MAGEDGE_NUMBA", "1") == "0" or numba_impl is None:
        return numpy_impl
    return numba_impl


active = _select()


def hermite_table(nmax, y, shift):
    """Rows ``n = 0..nmax-1`` of ``p_n(y) * exp(shift)`` plus ``log|p_{nmax-1}(y)|``.

    ``p_n`` are the Hermite polynomials orthonormal for the weight ``exp(-y^2)``,
    so ``shift = -y**2 / 2`` yields the normalized Hermite functions. The
    recurrence carries a per-point log scale, so no factorials or overflow.
    """
    return active.hermite_table(nmax, y, shift)


def hermite_series(coeffs, y, shift):
    """``sum_n coeffs[n, c] * p_n(y) * exp(shift)`` for each column ``c``."""
    return active.hermite_series(coeffs, y, shift)
