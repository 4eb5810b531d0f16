"""Boundary quadratic forms of rectangles and their guillotine gluings.

A p x q rectangle form lives on H1^{2p} (+) H2^{2q} in the canonical order
S (left to right), N (left to right), W (bottom to top), E (bottom to top).
Gluing two forms eliminates the shared cut by a Schur complement and
multiplies the scalar by the Gaussian integral over the cut,
``(2 pi)^dim / det``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ShapeMismatch
from .face_weight import FaceOperator
from .linalg_core import BlockLayout, join, log_det, schur_complement, symmetrize

LOG_2PI = float(np.log(2 * np.pi))


class RectQuadForm:
    """Quadratic form on the boundary edges of a p x q rectangle."""

    __slots__ = ("p", "q", "d1", "d2", "_m")

    def __init__(self, p: int, q: int, d1: int, d2: int, matrix):
        m = symmetrize(np.array(matrix, dtype=complex), "rectangle form")
        if m.shape != (2 * p * d1 + 2 * q * d2,) * 2:
            raise DimensionMismatch(f"form of shape {m.shape} does not fit a {p}x{q} rectangle")
        m.setflags(write=False)
        self.p, self.q, self.d1, self.d2, self._m = p, q, d1, d2, m

    @classmethod
    def from_face(cls, Q: FaceOperator) -> "RectQuadForm":
        return cls(1, 1, Q.d1, Q.d2, Q.matrix)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def layout(self) -> BlockLayout:
        p, q, d1, d2 = self.p, self.q, self.d1, self.d2
        return BlockLayout([p * d1, p * d1, q * d2, q * d2], ("S", "N", "W", "E"))

    def block(self, a: str, b: str) -> np.ndarray:
        lay = self.layout
        return self._m[lay.slice(a), lay.slice(b)]

    def __repr__(self):
        return f"RectQuadForm(p={self.p}, q={self.q}, d1={self.d1}, d2={self.d2})"


@dataclass(frozen=True)
class ScaledQuadForm:
    """A Gaussian weight ``exp(log_scale) * exp(-Q(x, x))`` on a rectangle."""

    log_scale: float
    form: RectQuadForm

    @classmethod
    def from_face(cls, Q: FaceOperator) -> "ScaledQuadForm":
        return cls(0.0, RectQuadForm.from_face(Q))

    @property
    def p(self) -> int:
        return self.form.p

    @property
    def q(self) -> int:
        return self.form.q


def _lift(x) -> ScaledQuadForm:
    if isinstance(x, ScaledQuadForm):
        return x
    if isinstance(x, RectQuadForm):
        return ScaledQuadForm(0.0, x)
    if isinstance(x, FaceOperator):
        return ScaledQuadForm.from_face(x)
    raise TypeError(f"cannot glue a {type(x).__name__}")


def _glue(a: ScaledQuadForm, b: ScaledQuadForm, across: str) -> ScaledQuadForm:
    fa, fb = a.form, b.form
    if (fa.d1, fa.d2) != (fb.d1, fb.d2):
        raise DimensionMismatch("fibre dimensions differ")
    if across == "WE":
        if fa.q != fb.q:
            raise ShapeMismatch(f"heights differ: {fa.q} vs {fb.q}")
        # a's E and b's W become the cut.
        rename_a = {"S": "Sa", "N": "Na", "W": "W", "E": "cut"}
        rename_b = {"S": "Sb", "N": "Nb", "W": "cut", "E": "E"}
        order = ["Sa", "Sb", "Na", "Nb", "W", "E", "cut"]
        sizes = {"Sa": fa.p * fa.d1, "Sb": fb.p * fa.d1, "Na": fa.p * fa.d1, "Nb": fb.p * fa.d1,
                 "W": fa.q * fa.d2, "E": fa.q * fa.d2, "cut": fa.q * fa.d2}
        cut_dim = fa.q * fa.d2
        p, q = fa.p + fb.p, fa.q
    else:
        if fa.p != fb.p:
            raise ShapeMismatch(f"widths differ: {fa.p} vs {fb.p}")
        rename_a = {"S": "S", "N": "cut", "W": "Wa", "E": "Ea"}
        rename_b = {"S": "cut", "N": "N", "W": "Wb", "E": "Eb"}
        order = ["S", "N", "Wa", "Wb", "Ea", "Eb", "cut"]
        sizes = {"S": fa.p * fa.d1, "N": fa.p * fa.d1, "cut": fa.p * fa.d1,
                 "Wa": fa.q * fa.d2, "Wb": fb.q * fa.d2, "Ea": fa.q * fa.d2, "Eb": fb.q * fa.d2}
        cut_dim = fa.p * fa.d1
        p, q = fa.p, fa.q + fb.q
    lay = BlockLayout([sizes[k] for k in order], order)
    m = join(
        [
            (fa.matrix, [rename_a[s] for s in ("S", "N", "W", "E")]),
            (fb.matrix, [rename_b[s] for s in ("S", "N", "W", "E")]),
        ],
        lay,
    )
    cut = m[lay.slice("cut"), lay.slice("cut")]
    log_gamma = cut_dim * LOG_2PI - log_det(cut)
    out = schur_complement(m, lay, ["cut"])
    return ScaledQuadForm(a.log_scale + b.log_scale + log_gamma, RectQuadForm(p, q, fa.d1, fa.d2, out))


def glue_we(a, b) -> ScaledQuadForm:
    """Place ``b`` to the East of ``a`` and integrate out the shared vertical cut."""
    return _glue(_lift(a), _lift(b), "WE")


def glue_sn(a, b) -> ScaledQuadForm:
    """Place ``b`` to the North of ``a`` and integrate out the shared horizontal cut."""
    return _glue(_lift(a), _lift(b), "SN")


def surface_power(Q: FaceOperator, p: int, q: int) -> ScaledQuadForm:
    """Boundary weight of the p x q rectangle by iterated gluing.

    Rows are built by left-folding ``glue_we``; the rows are then stacked by
    left-folding ``glue_sn``.
    """
    if p < 1 or q < 1:
        raise ValueError("rectangle sizes must be positive")
    face = ScaledQuadForm.from_face(Q)
    row = face
    for _ in range(p - 1):
        row = glue_we(row, face)
    out = row
    for _ in range(q - 1):
        out = glue_sn(out, row)
    return out
