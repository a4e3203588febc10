"""Hot quadrature kernels with a numba fast path and a pure-numpy fallback.

The dominant cost of the simulator is the oscillatory integral over the
telescope aperture: for every output mode q3 the four film-matrix component
arrays sampled on the q2 quadrature grid are summed against the quadratic
phase factor exp(i a |q2 - mag * q3|^2).

Backend selection: set ``PBS_BACKEND=numpy`` to force the pure-numpy path, or
``PBS_BACKEND=numba`` to require numba (ImportError if unavailable).  By
default numba is used when importable.  ``PBS_THREADS`` caps the numba thread
count.  Both paths iterate q2 points in the same deterministic order for every
q3, so results are bit-stable across runs of the same backend.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["accumulate_transfer", "BACKEND"]


def _numpy_accumulate(q2x, q2y, fxx, fxy, fyx, fyy, c3x, c3y, alpha, out):
    for p in range(c3x.size):
        dx = q2x - c3x[p]
        dy = q2y - c3y[p]
        phase = np.exp(1j * alpha * (dx * dx + dy * dy))
        out[p, 0] = np.sum(phase * fxx)
        out[p, 1] = np.sum(phase * fxy)
        out[p, 2] = np.sum(phase * fyx)
        out[p, 3] = np.sum(phase * fyy)
    return out


def _select_backend():
    choice = os.environ.get("PBS_BACKEND", "").strip().lower()
    if choice == "numpy":
        return "numpy", _numpy_accumulate
    try:
        import numba
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", _numpy_accumulate

    threads = os.environ.get("PBS_THREADS")
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))

    @numba.njit(parallel=True, fastmath=False, cache=True)
    def _numba_accumulate(q2x, q2y, fxx, fxy, fyx, fyy, c3x, c3y, alpha, out):
        for p in numba.prange(c3x.size):
            axx = 0.0 + 0.0j
            axy = 0.0 + 0.0j
            ayx = 0.0 + 0.0j
            ayy = 0.0 + 0.0j
            for j in range(q2x.size):
                dx = q2x[j] - c3x[p]
                dy = q2y[j] - c3y[p]
                phase = np.exp(1j * alpha * (dx * dx + dy * dy))
                axx += phase * fxx[j]
                axy += phase * fxy[j]
                ayx += phase * fyx[j]
                ayy += phase * fyy[j]
            out[p, 0] = axx
            out[p, 1] = axy
            out[p, 2] = ayx
            out[p, 3] = ayy
        return out

    return "numba", _numba_accumulate


BACKEND, _accumulate = _select_backend()


def accumulate_transfer(q2x, q2y, fxx, fxy, fyx, fyy, centers, alpha):
    """Phase-weighted sums of film components over the quadrature points.

    Parameters
    ----------
    q2x, q2y : 1-D float arrays, quadrature points inside the aperture disc
    fxx, fxy, fyx, fyy : 1-D complex arrays, film matrix components at those points
    centers : (P, 2) float array of phase centers (mag * q3 per output mode)
    alpha : quadratic phase coefficient (nm^2)

    Returns
    -------
    (P, 4) complex array of sums, columns ordered (xx, xy, yx, yy).
    """
    centers = np.ascontiguousarray(centers, dtype=float)
    out = np.empty((centers.shape[0], 4), dtype=complex)
    return _accumulate(
        np.ascontiguousarray(q2x, dtype=float),
        np.ascontiguousarray(q2y, dtype=float),
        np.ascontiguousarray(fxx, dtype=complex),
        np.ascontiguousarray(fxy, dtype=complex),
        np.ascontiguousarray(fyx, dtype=complex),
        np.ascontiguousarray(fyy, dtype=complex),
        centers[:, 0].copy(), centers[:, 1].copy(), float(alpha), out,
    )
