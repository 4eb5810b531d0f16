"""Face operators, their dihedral symmetries and rectangle precision matrices.

A face carries four edge variables: S and N in H1 (dimension ``d1``), W and
E in H2 (dimension ``d2``).  The face matrix is stored in block order
(S, N, W, E).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NotDihedral, NotPositiveDefinite
from .linalg_core import BlockLayout, is_positive_definite, log_det, schur_indices, symmetrize

SIDES = ("S", "N", "W", "E")


class FaceOperator:
    """Positive definite face weight ``Q`` on H1^2 (+) H2^2."""

    __slots__ = ("d1", "d2", "_m", "__dict__")

    def __init__(self, matrix, d1: int, d2: int):
        m = symmetrize(np.array(matrix, dtype=complex), "face operator")
        if m.shape != (2 * d1 + 2 * d2,) * 2:
            raise DimensionMismatch(f"face matrix has shape {m.shape}, expected {2 * d1 + 2 * d2}")
        if not is_positive_definite(m):
            raise NotPositiveDefinite(
                f"face operator smallest eigenvalue {np.linalg.eigvalsh(m)[0]:.3e}"
            )
        m.setflags(write=False)
        self.d1, self.d2, self._m = int(d1), int(d2), m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @cached_property
    def layout(self) -> BlockLayout:
        return BlockLayout([self.d1, self.d1, self.d2, self.d2], SIDES)

    def block(self, a: str, b: str) -> np.ndarray:
        return self._m[self.layout.slice(a), self.layout.slice(b)]

    def blocks(self, rows: str, cols: str) -> np.ndarray:
        """Compound block, e.g. ``blocks("SN", "WE")``."""
        return np.block([[self.block(a, b) for b in cols] for a in rows])

    @property
    def dihedral(self) -> bool:
        return is_dihedral(self)

    def __eq__(self, other):
        return (
            isinstance(other, FaceOperator)
            and (self.d1, self.d2) == (other.d1, other.d2)
            and np.allclose(self._m, other._m, rtol=0, atol=1e-12)
        )

    def __hash__(self):
        return hash((self.d1, self.d2, self._m.round(10).tobytes()))

    def __repr__(self):
        return f"FaceOperator(d1={self.d1}, d2={self.d2})"


@dataclass(frozen=True)
class DihedralParams:
    T: np.ndarray
    A: np.ndarray
    U: np.ndarray

    @classmethod
    def scalar(cls, t: float, a: float, u: float) -> "DihedralParams":
        return cls(np.array([[t]], complex), np.array([[a]], complex), np.array([[u]], complex))

    @property
    def d(self) -> int:
        return np.atleast_2d(self.T).shape[0]


def dihedral_face(params: DihedralParams) -> FaceOperator:
    """Assemble [[T,A,U,U],[A,T,U,U],[U,U,T,A],[U,U,A,T]]."""
    t, a, u = (np.atleast_2d(np.asarray(x, dtype=complex)) for x in (params.T, params.A, params.U))
    if not (t.shape == a.shape == u.shape and t.shape[0] == t.shape[1]):
        raise DimensionMismatch("T, A, U must be square matrices of one size")
    m = np.block([[t, a, u, u], [a, t, u, u], [u, u, t, a], [u, u, a, t]])
    return FaceOperator(m, t.shape[0], t.shape[0])


def scalar_dihedral(t: float, a: float, u: float) -> FaceOperator:
    return dihedral_face(DihedralParams.scalar(t, a, u))


def dihedral_params(Q: FaceOperator) -> DihedralParams:
    """Recover (T, A, U) from a dihedral face operator."""
    if not is_dihedral(Q):
        raise NotDihedral("face operator is not invariant under the dihedral group")
    return DihedralParams(Q.block("S", "S"), Q.block("S", "N"), Q.block("S", "W"))


# New block (S, N, W, E) <- old block labels.
_GENERATORS = {
    "e": ("S", "N", "W", "E"),
    "r": ("W", "E", "N", "S"),
    "s": ("W", "E", "S", "N"),
}


def _compose(g: tuple, h: tuple) -> tuple:
    """Permutation of g acting after h."""
    old = dict(zip(SIDES, h))
    return tuple(old[x] for x in g)


def _group() -> dict:
    e, r, s = _GENERATORS["e"], _GENERATORS["r"], _GENERATORS["s"]
    out = {"e": e, "r": r}
    out["r2"] = _compose(r, r)
    out["r3"] = _compose(r, out["r2"])
    out["s"] = s
    out["rs"] = _compose(r, s)
    out["r2s"] = _compose(out["r2"], s)
    out["r3s"] = _compose(out["r3"], s)
    return out


DIHEDRAL_GROUP = _group()


def apply_dihedral(g: str, Q: FaceOperator) -> FaceOperator:
    """Action of a dihedral group element on a face operator.

    ``g`` is one of ``e, r, r2, r3, s, rs, r2s, r3s`` where ``r`` is the
    quarter turn and ``s`` the diagonal reflection; words act right to left.
    """
    perm = DIHEDRAL_GROUP[g]
    swaps_types = perm[0] in ("W", "E")
    if swaps_types and Q.d1 != Q.d2:
        raise DimensionMismatch("rotations and diagonal reflections need d1 = d2")
    m = np.block([[Q.block(a, b) for b in perm] for a in perm])
    d1, d2 = (Q.d2, Q.d1) if swaps_types else (Q.d1, Q.d2)
    return FaceOperator(m, d1, d2)


def is_dihedral(Q: FaceOperator, tol: float = 1e-12) -> bool:
    if Q.d1 != Q.d2:
        return False
    scale = max(np.max(np.abs(Q.matrix)), 1e-300)
    for g in ("r", "s"):
        if np.max(np.abs(apply_dihedral(g, Q).matrix - Q.matrix)) > tol * scale:
            return False
    return True


class EdgeIndexing:
    """Enumeration of the edges of the rectangle [0,p] x [0,q].

    Horizontal edges ``h(k, l)`` for ``0 <= k < p, 0 <= l <= q`` carry H1;
    vertical edges ``v(k, l)`` for ``0 <= k <= p, 0 <= l < q`` carry H2.
    Boundary edges come first in the canonical order (S left to right, N left
    to right, W bottom to top, E bottom to top), then interior horizontal
    and interior vertical edges.
    """

    def __init__(self, p: int, q: int, d1: int, d2: int):
        if p < 1 or q < 1:
            raise ValueError("rectangle sizes must be positive")
        self.p, self.q, self.d1, self.d2 = p, q, d1, d2
        h = -np.ones((p, q + 1), dtype=np.int64)
        v = -np.ones((p + 1, q), dtype=np.int64)
        pos = 0
        for k in range(p):
            h[k, 0] = pos
            pos += d1
        for k in range(p):
            h[k, q] = pos
            pos += d1
        for l in range(q):
            v[0, l] = pos
            pos += d2
        for l in range(q):
            v[p, l] = pos
            pos += d2
        self.n_boundary = pos
        for l in range(1, q):
            for k in range(p):
                h[k, l] = pos
                pos += d1
        for l in range(q):
            for k in range(1, p):
                v[k, l] = pos
                pos += d2
        self.dim = pos
        self.h, self.v = h, v

    @property
    def n_horizontal(self) -> int:
        return self.p * (self.q + 1)

    @property
    def n_vertical(self) -> int:
        return self.q * (self.p + 1)

    @property
    def boundary(self) -> np.ndarray:
        return np.arange(self.n_boundary)

    @property
    def interior(self) -> np.ndarray:
        return np.arange(self.n_boundary, self.dim)

    def hslice(self, k: int, l: int) -> slice:
        return slice(self.h[k, l], self.h[k, l] + self.d1)

    def vslice(self, k: int, l: int) -> slice:
        return slice(self.v[k, l], self.v[k, l] + self.d2)

    def face_indices(self) -> np.ndarray:
        """Scalar indices of (S, N, W, E) for each face, faces in row-major order."""
        d1, d2 = self.d1, self.d2
        rows = []
        for l in range(self.q):
            for k in range(self.p):
                idx = np.concatenate(
                    [
                        self.h[k, l] + np.arange(d1),
                        self.h[k, l + 1] + np.arange(d1),
                        self.v[k, l] + np.arange(d2),
                        self.v[k + 1, l] + np.arange(d2),
                    ]
                )
                rows.append(idx)
        return np.array(rows, dtype=np.int64)


def domain_precision(Q: FaceOperator, p: int, q: int):
    """Sum of the face weight over all faces of a p x q rectangle."""
    ix = EdgeIndexing(p, q, Q.d1, Q.d2)
    out = np.zeros((ix.dim, ix.dim), dtype=complex)
    _kernels.scatter_faces(out, Q.matrix, ix.face_indices())
    return out, ix


def oracle_surface_power(Q: FaceOperator, p: int, q: int):
    """Boundary form of the p x q rectangle by one joint elimination.

    Returns ``(RectQuadForm, log_alpha)`` where ``log_alpha`` is the log of
    the Gaussian integral over interior edges, ``(2 pi)^dim / det``.
    """
    from .guill_rect import RectQuadForm

    m, ix = domain_precision(Q, p, q)
    b, i = ix.boundary, ix.interior
    form = schur_indices(m, b, i)
    form = 0.5 * (form + form.conj().T)
    log_alpha = len(i) * np.log(2 * np.pi) - log_det(m[np.ix_(i, i)]) if len(i) else 0.0
    return RectQuadForm(p, q, Q.d1, Q.d2, form), float(log_alpha)
