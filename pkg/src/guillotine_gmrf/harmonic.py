"""Harmonic extensions on rectangles and the explicit sine-mode solutions.

A field is harmonic when every interior edge satisfies the stationarity
equation of the domain precision.  For the dihedral scalar weight the
harmonic field driven by a single side is a finite sum of separable modes
``sin(pi r (l + 1/2) / q) * zeta_r^{+-k}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMode, DimensionMismatch
from .face_weight import EdgeIndexing, FaceOperator, domain_precision, scalar_dihedral
from .guill_rect import RectQuadForm
from .linalg_core import solve

SIDES = ("S", "N", "W", "E")


class HarmonicField:
    """Edge values on a rectangle, stored as one flat vector per column of ``values``."""

    def __init__(self, ix: EdgeIndexing, values: np.ndarray, precision: np.ndarray | None = None):
        self.ix = ix
        self.values = np.asarray(values, dtype=complex)
        self._precision = precision

    @property
    def x1(self) -> np.ndarray:
        """Horizontal edge values, shape (p, q+1, d1)."""
        ix = self.ix
        out = np.empty((ix.p, ix.q + 1, ix.d1), dtype=complex)
        for k in range(ix.p):
            for l in range(ix.q + 1):
                out[k, l] = self.values[ix.hslice(k, l)]
        return out

    @property
    def x2(self) -> np.ndarray:
        """Vertical edge values, shape (p+1, q, d2)."""
        ix = self.ix
        out = np.empty((ix.p + 1, ix.q, ix.d2), dtype=complex)
        for k in range(ix.p + 1):
            for l in range(ix.q):
                out[k, l] = self.values[ix.vslice(k, l)]
        return out

    def residual(self) -> float:
        """Max interior stationarity violation relative to the boundary size."""
        if self._precision is None:
            raise ValueError("field was not built from a precision matrix")
        i = self.ix.interior
        r = (self._precision @ self.values)[i]
        scale = max(np.max(np.abs(self.values[self.ix.boundary])), 1e-300)
        return float(np.max(np.abs(r)) / scale) if r.size else 0.0


def _boundary_sizes(p, q, d1, d2):
    return {"S": p * d1, "N": p * d1, "W": q * d2, "E": q * d2}


def solve_harmonic(Q: FaceOperator, p: int, q: int, boundary) -> HarmonicField:
    """Harmonic extension of canonical-layout boundary values (dense solve)."""
    m, ix = domain_precision(Q, p, q)
    xb = np.asarray(boundary, dtype=complex)
    if xb.shape[0] != ix.n_boundary:
        raise DimensionMismatch(f"boundary vector has {xb.shape[0]} entries, expected {ix.n_boundary}")
    b, i = ix.boundary, ix.interior
    x = np.zeros((ix.dim,) + xb.shape[1:], dtype=complex)
    x[b] = xb
    if len(i):
        x[i] = -solve(m[np.ix_(i, i)], m[np.ix_(i, b)] @ xb)
    return HarmonicField(ix, x, m)


def _local_gradients(Q: FaceOperator, field: HarmonicField) -> np.ndarray:
    """Gradient of the energy at each boundary edge, from its unique face."""
    ix, x = field.ix, field.values
    p, q = ix.p, ix.q
    B = Q.block
    h = lambda k, l: x[ix.hslice(k, l)]
    v = lambda k, l: x[ix.vslice(k, l)]

    def grad(face_k, face_l, role):
        s, n = h(face_k, face_l), h(face_k, face_l + 1)
        w, e = v(face_k, face_l), v(face_k + 1, face_l)
        return B(role, "S") @ s + B(role, "N") @ n + B(role, "W") @ w + B(role, "E") @ e

    rows = []
    rows += [grad(k, 0, "S") for k in range(p)]
    rows += [grad(k, q - 1, "N") for k in range(p)]
    rows += [grad(0, l, "W") for l in range(q)]
    rows += [grad(p - 1, l, "E") for l in range(q)]
    return np.concatenate(rows, axis=0)


def stokes_surface_power(Q: FaceOperator, p: int, q: int) -> RectQuadForm:
    """Boundary form assembled from local gradients of harmonic extensions."""
    nb = 2 * p * Q.d1 + 2 * q * Q.d2
    field = solve_harmonic(Q, p, q, np.eye(nb, dtype=complex))
    return RectQuadForm(p, q, Q.d1, Q.d2, _local_gradients(Q, field))


def split_surface_power(Q: FaceOperator, p: int, q: int) -> dict:
    """The sixteen blocks (a, b): gradient on side ``a`` of the field driven by side ``b``."""
    sizes = _boundary_sizes(p, q, Q.d1, Q.d2)
    off = np.concatenate([[0], np.cumsum([sizes[s] for s in SIDES])])
    nb = off[-1]
    out = {}
    for j, b in enumerate(SIDES):
        drive = np.zeros((nb, sizes[b]), dtype=complex)
        drive[off[j]:off[j + 1]] = np.eye(sizes[b])
        g = _local_gradients(Q, solve_harmonic(Q, p, q, drive))
        for i, a in enumerate(SIDES):
            out[(a, b)] = g[off[i]:off[i + 1]]
    return out


# ---------------------------------------------------------------------------
# Sine modes for the dihedral scalar weight
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZetaMode:
    """Separable mode of index r on a strip of height q.

    Along the strip the vertical edges scale as ``zeta^k`` with unit
    amplitude and the horizontal edges as ``v1 * zeta^k``; the mirror root
    ``1/zeta`` has horizontal amplitude ``v1_inv``.
    """

    r: int
    q: int
    zeta: float
    v1: float
    v1_inv: float

    @property
    def kappa(self) -> complex:
        """Ratio v2/v1 (set to 1 for r = q, where the horizontal part vanishes)."""
        if self.r == self.q:
            return 1.0
        return complex("inf") if self.v1 == 0 else 1.0 / self.v1


def _mode_matrix(t, a, u, theta, z):
    c = np.cos(theta / 2)
    return np.array(
        [
            [2 * t + 2 * a * np.cos(theta), 2 * u * c * (1 + z)],
            [2 * u * c * (1 + 1 / z), 2 * t + a * (z + 1 / z)],
        ]
    )


def mode_residual(t, a, u, mode: ZetaMode) -> float:
    theta = np.pi * mode.r / mode.q
    return float(np.linalg.norm(_mode_matrix(t, a, u, theta, mode.zeta) @ np.array([mode.v1, 1.0])))


def zeta_modes(t: float, a: float, u: float, q: int) -> list:
    """Roots |zeta| > 1 of the mode determinant for r = 1..q."""
    if a == 0:
        raise DegenerateMode("a = 0: the mode equation has no finite root pair")
    scalar_dihedral(t, a, u)  # positivity check
    modes = []
    for r in range(1, q + 1):
        theta = np.pi * r / q
        c, dg = np.cos(theta / 2), 2 * t + 2 * a * np.cos(theta)
        # The determinant is affine in s = zeta + 1/zeta.
        num = 8 * u * u * c * c - 2 * t * dg
        den = a * dg - 4 * u * u * c * c
        if abs(den) < 1e-14 * max(abs(num), 1.0):
            raise DegenerateMode(f"mode r={r}: characteristic equation degenerates")
        s = num / den
        if abs(s) <= 2 + 1e-8:
            raise DegenerateMode(f"mode r={r}: roots on the unit circle (s = {s:.6g})")
        zeta = (s + np.sign(s) * np.sqrt(s * s - 4)) / 2
        v1 = -2 * u * c * (1 + zeta) / dg
        v1_inv = -2 * u * c * (1 + 1 / zeta) / dg
        modes.append(ZetaMode(r, q, float(zeta), float(v1), float(v1_inv)))
    return modes


def sine_transform(values: np.ndarray, q: int) -> np.ndarray:
    """Coefficients c_r with values_l = sum_r c_r sin(pi r (l + 1/2) / q)."""
    l = np.arange(q)
    r = np.arange(1, q + 1)
    basis = np.sin(np.pi * np.outer(r, l + 0.5) / q)
    norm = np.full(q, q / 2.0)
    norm[-1] = q
    return (basis @ np.asarray(values)) / norm


def _west_field(t, a, u, p, q, f):
    """Mode sum for West values ``f`` (length q), zero elsewhere."""
    modes = zeta_modes(t, a, u, q)
    fr = sine_transform(f, q)
    x1 = np.zeros((p, q + 1), dtype=complex)
    x2 = np.zeros((p + 1, q), dtype=complex)
    kv = np.arange(p + 1)
    kh = np.arange(p)
    lh = np.arange(q + 1)
    lv = np.arange(q) + 0.5
    for m, c in zip(modes, fr):
        z = m.zeta
        den = 1 - z ** (-2 * p)
        # Profile g(k) = (z^-k - z^(k-2p)) / (1 - z^-2p): g(0) = 1, g(p) = 0.
        bm, bp = c / den, -c * z ** (-2 * p) / den
        theta = np.pi * m.r / q
        gv = bm * z ** (-kv.astype(float)) + bp * z ** (kv.astype(float))
        gh = bm * m.v1_inv * z ** (-kh.astype(float)) + bp * m.v1 * z ** (kh.astype(float))
        x2 += np.outer(gv, np.sin(theta * lv))
        x1 += np.outer(gh, np.sin(theta * lh))
    return x1, x2


def sine_mode_solution(t: float, a: float, u: float, p: int, q: int, side: str, values) -> HarmonicField:
    """Harmonic field driven by ``values`` on one side, zero on the other three."""
    f = np.asarray(values, dtype=float).ravel()
    if side in ("W", "E"):
        if f.shape[0] != q:
            raise DimensionMismatch(f"side {side} needs {q} values")
        x1, x2 = _west_field(t, a, u, p, q, f)
        if side == "E":
            x1, x2 = x1[::-1], x2[::-1]
    elif side in ("S", "N"):
        if f.shape[0] != p:
            raise DimensionMismatch(f"side {side} needs {p} values")
        # Diagonal reflection: horizontal (k, l) <-> vertical (l, k).
        y1, y2 = _west_field(t, a, u, q, p, f)
        x1, x2 = y2.T, y1.T
        if side == "N":
            x1, x2 = x1[:, ::-1], x2[:, ::-1]
    else:
        raise ValueError(f"unknown side {side!r}")
    ix = EdgeIndexing(p, q, 1, 1)
    vals = np.zeros(ix.dim, dtype=complex)
    for k in range(p):
        for l in range(q + 1):
            vals[ix.h[k, l]] = x1[k, l]
    for k in range(p + 1):
        for l in range(q):
            vals[ix.v[k, l]] = x2[k, l]
    m, _ = domain_precision(scalar_dihedral(t, a, u), p, q)
    return HarmonicField(ix, vals, m)
