"""Dense complex Hermitian linear algebra.

Block matrices are addressed through a :class:`BlockLayout`, which names
contiguous index ranges.  Every public operation accepts either a plain
``numpy`` array or a :class:`HermitianMatrix`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import LayoutMismatch, NotPositiveDefinite, SingularPivot

PIVOT_RTOL = 1e-12
HERM_RTOL = 1e-12


class HermitianMatrix:
    """Immutable complex Hermitian matrix.

    Inputs whose asymmetry exceeds ``1e-12 * max|entry|`` are symmetrized
    with a warning; smaller rounding asymmetry is removed silently.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise LayoutMismatch(f"expected a square matrix, got shape {a.shape}")
        self._a = symmetrize(a)
        self._a.setflags(write=False)

    @property
    def entries(self) -> np.ndarray:
        return self._a

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"


def symmetrize(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Return (a + a*)/2, warning when the input was visibly non-Hermitian."""
    a = np.asarray(a, dtype=complex)
    scale = np.max(np.abs(a)) if a.size else 0.0
    asym = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if asym > HERM_RTOL * max(scale, 1e-300):
        warnings.warn(f"{name} asymmetric by {asym:.2e}; symmetrizing", RuntimeWarning, stacklevel=3)
    return 0.5 * (a + a.conj().T)


def _arr(m) -> np.ndarray:
    return np.asarray(m, dtype=complex)


@dataclass(frozen=True)
class BlockLayout:
    """Ordered partition of an index range into labelled blocks."""

    sizes: tuple
    labels: tuple

    def __init__(self, sizes: Sequence[int], labels: Sequence | None = None):
        sizes = tuple(int(s) for s in sizes)
        labels = tuple(range(len(sizes))) if labels is None else tuple(labels)
        if len(labels) != len(sizes):
            raise LayoutMismatch("one label per block required")
        if len(set(labels)) != len(labels):
            raise LayoutMismatch(f"duplicate labels in {labels}")
        if any(s < 0 for s in sizes):
            raise LayoutMismatch("block sizes must be non-negative")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> tuple:
        return tuple(np.concatenate([[0], np.cumsum(self.sizes)]).astype(int))

    def size(self, label) -> int:
        return self.sizes[self.labels.index(label)]

    def slice(self, label) -> slice:
        i = self.labels.index(label)
        off = self.offsets
        return slice(off[i], off[i + 1])

    def indices(self, labels: Iterable) -> np.ndarray:
        labels = list(labels)
        missing = [l for l in labels if l not in self.labels]
        if missing:
            raise LayoutMismatch(f"unknown labels {missing}")
        parts = [np.arange(self.slice(l).start, self.slice(l).stop) for l in labels]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)

    def sub(self, labels: Iterable) -> "BlockLayout":
        labels = list(labels)
        return BlockLayout([self.size(l) for l in labels], labels)

    def without(self, labels: Iterable) -> "BlockLayout":
        drop = set(labels)
        keep = [l for l in self.labels if l not in drop]
        return self.sub(keep)

    def check(self, m) -> None:
        n = _arr(m).shape[0]
        if n != self.dim:
            raise LayoutMismatch(f"layout covers {self.dim} indices, matrix has {n}")


def _pivot_guard(mkk: np.ndarray) -> None:
    if mkk.size == 0:
        return
    herm = np.allclose(mkk, mkk.conj().T, rtol=0, atol=1e-12 * np.max(np.abs(mkk)))
    if herm:
        sv = np.abs(np.linalg.eigvalsh(0.5 * (mkk + mkk.conj().T)))
    else:
        sv = np.linalg.svd(mkk, compute_uv=False)
    if sv.max() == 0.0 or sv.min() < PIVOT_RTOL * sv.max():
        raise SingularPivot(
            f"eliminated block has singular values in [{sv.min():.3e}, {sv.max():.3e}]"
        )


def solve(a: np.ndarray, b: np.ndarray, hermitian: bool | None = None) -> np.ndarray:
    """a^{-1} b for a square, invertible ``a``."""
    if hermitian is None:
        hermitian = np.allclose(a, a.conj().T, rtol=0, atol=1e-12 * max(np.max(np.abs(a)), 1e-300))
    if hermitian:
        try:
            c = sla.cho_factor(a, check_finite=False)
            return sla.cho_solve(c, b, check_finite=False)
        except np.linalg.LinAlgError:
            pass
    return sla.solve(a, b, check_finite=False)


def schur_indices(m: np.ndarray, keep: np.ndarray, elim: np.ndarray, guard: bool = True) -> np.ndarray:
    """Schur complement of ``m[elim, elim]`` in ``m`` restricted to ``keep``."""
    m = _arr(m)
    mkk = m[np.ix_(elim, elim)]
    if guard:
        _pivot_guard(mkk)
    if len(elim) == 0:
        return m[np.ix_(keep, keep)].copy()
    x = solve(mkk, m[np.ix_(elim, keep)])
    return m[np.ix_(keep, keep)] - m[np.ix_(keep, elim)] @ x


def schur_complement(m, layout: BlockLayout, eliminated: Iterable) -> np.ndarray:
    """Eliminate the blocks labelled ``eliminated`` and return M/M_kk.

    The remaining blocks keep their relative order; the matching layout is
    ``layout.without(eliminated)``.
    """
    m = _arr(m)
    layout.check(m)
    eliminated = list(eliminated)
    keep_labels = [l for l in layout.labels if l not in set(eliminated)]
    s = schur_indices(m, layout.indices(keep_labels), layout.indices(eliminated))
    if np.allclose(m, m.conj().T, rtol=0, atol=1e-12 * max(np.max(np.abs(m)), 1e-300)):
        s = 0.5 * (s + s.conj().T)
    return s


def ldu(m, layout: BlockLayout, eliminated: Iterable):
    """Block factorization M = L D U eliminating ``eliminated``.

    With ``i`` the kept and ``k`` the eliminated indices, in that order,
    ``L = [[I, M_ik M_kk^-1], [0, I]]``, ``D = diag(M/M_kk, M_kk)`` and
    ``U = [[I, 0], [M_kk^-1 M_ki, I]]``.  The factors are returned in the
    original index order, so ``L @ D @ U`` reproduces ``m``.
    """
    m = _arr(m)
    layout.check(m)
    eliminated = list(eliminated)
    keep = layout.indices([l for l in layout.labels if l not in set(eliminated)])
    elim = layout.indices(eliminated)
    mkk = m[np.ix_(elim, elim)]
    _pivot_guard(mkk)
    ni, nk = len(keep), len(elim)
    perm = np.concatenate([keep, elim])
    left = np.eye(ni + nk, dtype=complex)
    right = np.eye(ni + nk, dtype=complex)
    left[:ni, ni:] = solve(mkk.T, m[np.ix_(keep, elim)].T).T
    right[ni:, :ni] = solve(mkk, m[np.ix_(elim, keep)])
    diag = np.zeros((ni + nk, ni + nk), dtype=complex)
    diag[:ni, :ni] = m[np.ix_(keep, keep)] - left[:ni, ni:] @ m[np.ix_(elim, keep)]
    diag[ni:, ni:] = mkk
    inv = np.argsort(perm)
    return (left[np.ix_(inv, inv)], diag[np.ix_(inv, inv)], right[np.ix_(inv, inv)])


def is_positive_definite(m, tol: float = 1e-12) -> bool:
    m = _arr(m)
    if m.size == 0:
        return True
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return bool(ev[0] > tol * np.max(np.abs(ev)))


def log_det(m) -> float:
    """Real log-determinant of a positive definite matrix via Cholesky."""
    m = _arr(m)
    if m.size == 0:
        return 0.0
    try:
        c = np.linalg.cholesky(0.5 * (m + m.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Cholesky factorization failed") from exc
    return float(2.0 * np.sum(np.log(np.abs(np.diag(c)))))


def join(summands: Sequence, layout: BlockLayout) -> np.ndarray:
    """Sum of summands embedded into a common layout.

    Each summand is ``(matrix, labels)``: the matrix is block-partitioned by
    the layout sizes of ``labels`` in that order.
    """
    out = np.zeros((layout.dim, layout.dim), dtype=complex)
    for mat, labels in summands:
        mat = _arr(mat)
        labels = list(labels)
        idx = layout.indices(labels)
        if mat.shape != (len(idx), len(idx)):
            raise LayoutMismatch(
                f"summand of shape {mat.shape} does not fit blocks {labels} ({len(idx)} indices)"
            )
        out[np.ix_(idx, idx)] += mat
    return out


def block(m: np.ndarray, layout: BlockLayout, a, b) -> np.ndarray:
    return _arr(m)[layout.slice(a), layout.slice(b)]
