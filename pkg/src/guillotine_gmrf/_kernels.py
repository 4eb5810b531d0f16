"""Assembly kernels with a numba path and a pure-numpy fallback.

Set ``GUILLOTINE_GMRF_NO_NUMBA=1`` to force the numpy implementations.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("GUILLOTINE_GMRF_NO_NUMBA", "0").lower() in ("", "0", "false", "no")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


# ---------------------------------------------------------------------------
# Pure NumPy implementations
# ---------------------------------------------------------------------------


def _scatter_faces_np(out, q, idx):
    m = idx.shape[1]
    rows = np.repeat(idx, m, axis=1).ravel()
    cols = np.tile(idx, (1, m)).ravel()
    vals = np.tile(q.ravel(), idx.shape[0])
    np.add.at(out, (rows, cols), vals)
    return out


def _index_blocks_np(coeffs, off, n, a, b, c0):
    i = np.arange(n)
    k = off + a * i[:, None] + b * i[None, :] + c0
    r, c = coeffs.shape[1], coeffs.shape[2]
    blocks = coeffs[k]  # (n, n, r, c)
    return np.ascontiguousarray(blocks.transpose(0, 2, 1, 3).reshape(n * r, n * c))


# ---------------------------------------------------------------------------
# Numba kernels
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _scatter_faces_nb(out, q, idx):
        nf, m = idx.shape
        for f in range(nf):
            for i in range(m):
                ri = idx[f, i]
                for j in range(m):
                    out[ri, idx[f, j]] += q[i, j]
        return out

    @njit(cache=True)
    def _index_blocks_nb(coeffs, off, n, a, b, c0):
        r = coeffs.shape[1]
        c = coeffs.shape[2]
        out = np.empty((n * r, n * c), dtype=coeffs.dtype)
        for i in range(n):
            for j in range(n):
                k = off + a * i + b * j + c0
                for s in range(r):
                    for t in range(c):
                        out[i * r + s, j * c + t] = coeffs[k, s, t]
        return out


def scatter_faces(out: np.ndarray, q: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Add ``q`` at rows/cols ``idx[f]`` of ``out`` for every face ``f`` (in place)."""
    q = np.ascontiguousarray(q, dtype=complex)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    if USE_NUMBA:
        return _scatter_faces_nb(out, q, idx)
    return _scatter_faces_np(out, q, idx)


def index_blocks(coeffs: np.ndarray, off: int, n: int, a: int, b: int, c0: int) -> np.ndarray:
    """Block matrix whose (i, j) block is ``coeffs[off + a*i + b*j + c0]``."""
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    lo = off + c0 + min(0, a * (n - 1)) + min(0, b * (n - 1))
    hi = off + c0 + max(0, a * (n - 1)) + max(0, b * (n - 1))
    if lo < 0 or hi >= coeffs.shape[0]:
        raise IndexError("coefficient table too short for the requested block size")
    if USE_NUMBA:
        return _index_blocks_nb(coeffs, off, n, a, b, c0)
    return _index_blocks_np(coeffs, off, n, a, b, c0)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
