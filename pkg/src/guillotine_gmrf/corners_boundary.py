"""Corner boundary weights and the assembly of rectangle boundary weights.

A corner form lives on its vertical half-line followed by its horizontal
half-line, both stored nearest-to-corner first.  The boundary weight of a
p x q rectangle is obtained by surrounding it with four corners and
2p + 2q unit half-strips, then integrating out every half-line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotDihedral, ShapeMismatch, TruncationExceeded
from .face_weight import FaceOperator, domain_precision, is_dihedral
from .folds_halfstrips import (DEFAULT_N, GUARD, HalfStripForm, _eliminate, fold, grid_for,
                               halfstrip_fixed_point, shift_d, u_transverse)
from .guill_rect import RectQuadForm
from .linalg_core import BlockLayout, join, schur_indices, symmetrize
from .spectral import M_START, SymbolFunction, fourier_table, require_spectral_gap
from .strips_halfplanes import halfplane_symbol, w_hat_powers

CORNERS = ("SW", "SE", "NW", "NE")


def _sides(corner: str) -> tuple:
    """(vertical side, horizontal side) of the half-lines leaving a corner."""
    if corner not in CORNERS:
        raise ValueError(f"unknown corner {corner!r}")
    return corner[0], corner[1]


@dataclass
class CornerForm:
    """Boundary weight of a quarter plane.

    ``vv`` acts on the vertical half-line, ``hh`` on the horizontal one and
    ``V`` couples them (rows vertical, columns horizontal).
    """

    corner: str
    n: int
    d: int
    vv: np.ndarray
    hh: np.ndarray
    V: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nd = self.n * self.d
        if self.vv.shape != (nd, nd) or self.hh.shape != (nd, nd) or self.V.shape != (nd, nd):
            raise DimensionMismatch("corner blocks have inconsistent shapes")

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.vv, self.V], [self.V.conj().T, self.hh]])

    @classmethod
    def from_matrix(cls, corner, n, d, m, **kw) -> "CornerForm":
        m = symmetrize(m, "corner form")
        nd = n * d
        return cls(corner, n, d, m[:nd, :nd], m[nd:, nd:], m[:nd, nd:], **kw)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def perturbed(self, eps: float, block: str = "hh") -> "CornerForm":
        """Copy with ``eps * I`` added to the ``hh`` or ``vv`` block."""
        if block not in ("hh", "vv"):
            raise ValueError(f"unknown block {block!r}")
        vv, hh = self.vv, self.hh
        if block == "hh":
            hh = hh + eps * np.eye(hh.shape[0])
        else:
            vv = vv + eps * np.eye(vv.shape[0])
        return CornerForm(self.corner, self.n, self.d, vv, hh, self.V, dict(self.meta))


def corner_transverse(Q: FaceOperator, n: int, M: int, W_powers=None) -> np.ndarray:
    """Coupling block of the South-West corner, rows on the vertical half-line.

    Block row k is ``U_W^* fold((I + W_S) W_S^k)`` with ``U_W`` the West
    half-strip transverse column.
    """
    if W_powers is None:
        W_powers = w_hat_powers(Q, "S", n, M)
    U = u_transverse(Q, "W", n, M=M)
    d = Q.d1
    V = np.empty((n * d, n * d), dtype=complex)
    for k in range(n):
        sym = SymbolFunction(W_powers[k].samples + W_powers[k + 1].samples)
        V[k * d:(k + 1) * d] = U.conj().T @ fold(sym, "W", n).matrix
    return V


def corner_fixed_point(Q: FaceOperator, corner: str = "SW", n: int = DEFAULT_N,
                       M: int = M_START) -> CornerForm:
    """Quarter-plane fixed point of a dihedral face weight.

    The diagonal blocks are folds of half-plane symbols; by dihedral
    invariance the South-West matrices serve every corner.
    """
    _sides(corner)
    if not is_dihedral(Q):
        raise NotDihedral("corner fixed points need a dihedral face weight")
    require_spectral_gap(Q)
    M = grid_for(n, M)
    hp_s = halfplane_symbol(Q, "S", M)
    hp_w = halfplane_symbol(Q, "W", M)
    hh = fold(hp_s.symbol, "W", n).matrix
    vv = fold(hp_w.symbol, "S", n).matrix
    V = corner_transverse(Q, n, M, w_hat_powers(Q, "S", n, M))
    return CornerForm(corner, n, Q.d1, 0.5 * (vv + vv.conj().T), 0.5 * (hh + hh.conj().T), V,
                      {"M": M})


def corner_adjoint_coupling(Q: FaceOperator, n: int = DEFAULT_N, M: int = M_START) -> np.ndarray:
    """The horizontal-to-vertical coupling built from W_W; equals V^* in theory."""
    M = grid_for(n, M)
    Wp = w_hat_powers(Q, "W", n, M)
    U = u_transverse(Q, "S", n, M=M)
    d = Q.d1
    out = np.empty((n * d, n * d), dtype=complex)
    for k in range(n):
        sym = SymbolFunction(Wp[k].samples + Wp[k + 1].samples)
        out[k * d:(k + 1) * d] = U.conj().T @ fold(sym, "S", n).matrix
    return out


def glue_corner_halfstrip(C: CornerForm, A: HalfStripForm, guard: int = GUARD) -> CornerForm:
    """Attach a half-strip along one of the corner's half-lines.

    A half-strip of the corner's vertical side (S or N) is glued next to it
    horizontally; one of the corner's horizontal side (W or E) is glued
    next to it vertically.
    """
    vs, hs = _sides(C.corner)
    if A.n != C.n or A.d != C.d:
        raise ShapeMismatch("truncations or fibres differ")
    n, d = C.n, C.d
    nd, cw = n * d, A.width * d
    if A.width > n - guard:
        raise TruncationExceeded(f"half-strip width {A.width} exceeds n - {guard}")
    if A.side == vs:
        shared_line = 0 if hs == "W" else 1
        moved, shift_side = "hh", hs
    elif A.side == hs:
        shared_line = 0 if vs == "S" else 1
        moved, shift_side = "vv", vs
    else:
        raise ShapeMismatch(f"a {A.side} half-strip does not touch a {C.corner} corner")
    # Coordinates: C.vv, C.hh, A.other line, A.cut
    size = 3 * nd + cw
    m = np.zeros((size, size), dtype=complex)
    m[:2 * nd, :2 * nd] += C.matrix
    shared = np.arange(0, nd) if moved == "hh" else np.arange(nd, 2 * nd)
    other = np.arange(2 * nd, 3 * nd)
    lines = [shared, other] if shared_line == 0 else [other, shared]
    ia = np.concatenate(lines + [3 * nd + np.arange(cw)])
    m[np.ix_(ia, ia)] += A.matrix
    stay = np.arange(nd, 2 * nd) if moved == "hh" else np.arange(0, nd)
    keep = np.concatenate([stay, other, 3 * nd + np.arange(cw)])
    s = _eliminate(m, keep, shared)
    # s is on: stay (line to shift), other (new line), cut segment.
    D = shift_d(n, d, A.width, shift_side)
    Dfull = np.zeros((2 * nd, 2 * nd + cw))
    sel = np.concatenate([np.arange(nd), 2 * nd + np.arange(cw)])
    if moved == "hh":
        # New vertical = other line; new horizontal = shifted old horizontal.
        Dfull[:nd, nd:2 * nd] = np.eye(nd)
        Dfull[nd:, sel] = D
    else:
        Dfull[:nd, sel] = D
        Dfull[nd:, nd:2 * nd] = np.eye(nd)
    out = Dfull @ s @ Dfull.T
    return CornerForm.from_matrix(C.corner, n, d, out, meta=dict(C.meta))


def corner_residuals(C: CornerForm, hs_vertical: HalfStripForm, hs_horizontal: HalfStripForm,
                     guard: int = GUARD) -> dict:
    """Six fixed-point deviations on the leading n - guard blocks.

    ``hs_vertical`` is the half-strip of the corner's vertical side (glued
    beside the corner), ``hs_horizontal`` the one of its horizontal side
    (glued above or below).  Keys name the glued side and the compared block.
    """
    m = C.n - guard
    d = C.d
    lead = slice(0, m * d)
    out = {}
    for A in (hs_vertical, hs_horizontal):
        G = glue_corner_halfstrip(C, A, guard)
        out[f"{A.side}:vertical"] = float(np.max(np.abs(G.vv[lead, lead] - C.vv[lead, lead])))
        out[f"{A.side}:coupling"] = float(np.max(np.abs(G.V[lead, lead] - C.V[lead, lead])))
        out[f"{A.side}:horizontal"] = float(np.max(np.abs(G.hh[lead, lead] - C.hh[lead, lead])))
    return out


@dataclass
class HalfPlaneGluing:
    matrix: np.ndarray
    residual_map: np.ndarray
    sep: int

    @property
    def residual(self) -> float:
        return float(np.max(self.residual_map))


def glue_corners_to_halfplane(A: CornerForm, B: CornerForm, Q: FaceOperator | None = None,
                              symbol: SymbolFunction | None = None, sep: int = GUARD,
                              M: int = M_START) -> HalfPlaneGluing:
    """Join two adjacent corners across their shared half-line.

    SW with SE (or NW with NE) share a vertical half-line and give the South
    (North) half-plane on the horizontal line; SW with NW (SE with NE)
    give the West (East) half-plane on the vertical line.
    """
    pair = A.corner + B.corner
    table = {"SWSE": ("S", "vv"), "NWNE": ("N", "vv"), "SWNW": ("W", "hh"), "SENE": ("E", "hh")}
    if pair not in table:
        raise ShapeMismatch(f"corners {A.corner} and {B.corner} are not adjacent in this order")
    side, shared = table[pair]
    if A.n != B.n or A.d != B.d:
        raise ShapeMismatch("truncations or fibres differ")
    if symbol is None:
        if Q is None:
            raise ValueError("provide the half-plane symbol or the face weight")
        symbol = halfplane_symbol(Q, side, grid_for(A.n, M)).symbol
    n, d = A.n, A.d
    nd = n * d
    # Coordinates: shared, A.free, B.free
    m = np.zeros((3 * nd,) * 2, dtype=complex)
    if shared == "vv":
        ia = np.r_[0:nd, nd:2 * nd]
        ib = np.r_[0:nd, 2 * nd:3 * nd]
    else:
        ia = np.r_[nd:2 * nd, 0:nd]
        ib = np.r_[2 * nd:3 * nd, 0:nd]
    m[np.ix_(ia, ia)] += A.matrix
    m[np.ix_(ib, ib)] += B.matrix
    s = _eliminate(m, np.arange(nd, 3 * nd), np.arange(nd))

    def index(site):
        return (-1 - site) * d if site < 0 else nd + site * d

    sites = np.arange(-sep, sep)
    res = np.zeros((2 * sep, 2 * sep))
    for i, x in enumerate(sites):
        for j, y in enumerate(sites):
            blk = s[index(x):index(x) + d, index(y):index(y) + d]
            res[i, j] = np.max(np.abs(blk - symbol.coeff(y - x)))
    return HalfPlaneGluing(s, res, sep)


# ---------------------------------------------------------------------------
# Rectangle boundary weights
# ---------------------------------------------------------------------------


@dataclass
class BoundaryWeight:
    p: int
    q: int
    form: RectQuadForm
    n: int
    M: int

    @property
    def matrix(self) -> np.ndarray:
        return self.form.matrix


def assemble_boundary_weight(Q: FaceOperator, p: int, q: int, n: int = DEFAULT_N, M: int = M_START,
                             halfstrip: HalfStripForm | None = None,
                             corner: CornerForm | None = None) -> BoundaryWeight:
    """Boundary weight of the p x q rectangle inside the infinite-volume field."""
    if max(p, q) > n - GUARD:
        raise TruncationExceeded(f"n = {n} too small for a {p}x{q} rectangle (need n >= {max(p, q) + GUARD})")
    d = Q.d1
    hs = halfstrip_fixed_point(Q, "W", n, M) if halfstrip is None else halfstrip
    cf = corner_fixed_point(Q, "SW", n, M) if corner is None else corner
    nd = n * d
    lines = ([f"VS{x}" for x in range(p + 1)] + [f"VN{x}" for x in range(p + 1)]
             + [f"HW{y}" for y in range(q + 1)] + [f"HE{y}" for y in range(q + 1)])
    bnd = ([f"S{k}" for k in range(p)] + [f"N{k}" for k in range(p)]
           + [f"W{l}" for l in range(q)] + [f"E{l}" for l in range(q)])
    lay = BlockLayout([nd] * len(lines) + [d] * len(bnd), lines + bnd)
    H, C = hs.matrix, cf.matrix
    pieces = []
    for k in range(p):
        pieces.append((H, [f"VS{k}", f"VS{k + 1}", f"S{k}"]))
        pieces.append((H, [f"VN{k}", f"VN{k + 1}", f"N{k}"]))
    for l in range(q):
        pieces.append((H, [f"HW{l}", f"HW{l + 1}", f"W{l}"]))
        pieces.append((H, [f"HE{l}", f"HE{l + 1}", f"E{l}"]))
    pieces += [
        (C, ["VS0", "HW0"]),
        (C, [f"VS{p}", "HE0"]),
        (C, ["VN0", f"HW{q}"]),
        (C, [f"VN{p}", f"HE{q}"]),
    ]
    m = join(pieces, lay)
    out = schur_indices(m, lay.indices(bnd), lay.indices(lines))
    return BoundaryWeight(p, q, RectQuadForm(p, q, d, d, 0.5 * (out + out.conj().T)), n, M)


def _full_precision(Q: FaceOperator, bw: BoundaryWeight):
    m, ix = domain_precision(Q, bw.p, bw.q)
    b = ix.boundary
    m[np.ix_(b, b)] += bw.matrix
    return m, ix


def restriction_consistency_check(Q: FaceOperator, outer=(4, 4), inner=(2, 2), n: int = DEFAULT_N,
                                  M: int = M_START, offset=None, outer_bw: BoundaryWeight | None = None,
                                  inner_bw: BoundaryWeight | None = None) -> float:
    """Compare the inner rectangle's law induced by the outer one with its own boundary weight.

    Returns the max-entry deviation between the marginal precision on the
    inner rectangle's edges and (inner bulk + inner boundary weight).
    """
    (p, q), (pi, qi) = outer, inner
    if not (pi <= p and qi <= q):
        raise ShapeMismatch("inner rectangle must fit in the outer one")
    ox, oy = ((p - pi) // 2, (q - qi) // 2) if offset is None else offset
    if ox < 0 or oy < 0 or ox + pi > p or oy + qi > q:
        raise ShapeMismatch("offset places the inner rectangle outside")
    outer_bw = assemble_boundary_weight(Q, p, q, n, M) if outer_bw is None else outer_bw
    inner_bw = assemble_boundary_weight(Q, pi, qi, n, M) if inner_bw is None else inner_bw
    big, ix = _full_precision(Q, outer_bw)
    small, jx = _full_precision(Q, inner_bw)
    # Map each inner edge to its index in the outer rectangle.
    sel = np.zeros(jx.dim, dtype=np.int64)
    d1, d2 = Q.d1, Q.d2
    for k in range(pi):
        for l in range(qi + 1):
            sel[jx.h[k, l] + np.arange(d1)] = ix.h[k + ox, l + oy] + np.arange(d1)
    for k in range(pi + 1):
        for l in range(qi):
            sel[jx.v[k, l] + np.arange(d2)] = ix.v[k + ox, l + oy] + np.arange(d2)
    rest = np.setdiff1d(np.arange(ix.dim), sel)
    marg = schur_indices(big, sel, rest)
    return float(np.max(np.abs(marg - small)))


@dataclass
class CovarianceCheck:
    residual_map: np.ndarray  # per pair of edges, max entry deviation
    residual: float


def edge_positions(ix):
    """(type, k, l, first scalar index) for every edge of an EdgeIndexing."""
    out = []
    for k in range(ix.p):
        for l in range(ix.q + 1):
            out.append((1, k, l, ix.h[k, l]))
    for k in range(ix.p + 1):
        for l in range(ix.q):
            out.append((2, k, l, ix.v[k, l]))
    return out


def covariance_check(Q: FaceOperator, p: int, q: int, n: int = DEFAULT_N, M: int = M_START,
                     bw: BoundaryWeight | None = None) -> CovarianceCheck:
    """Compare covariances of the rectangle law with the infinite-volume ones."""
    bw = assemble_boundary_weight(Q, p, q, n, M) if bw is None else bw
    m, ix = _full_precision(Q, bw)
    cov = np.linalg.inv(m)
    ft = fourier_table(Q, p + 1, q + 1, M)
    edges = edge_positions(ix)
    size = {1: Q.d1, 2: Q.d2}
    res = np.zeros((len(edges), len(edges)))
    for a, (ti, ki, li, si) in enumerate(edges):
        for b, (tj, kj, lj, sj) in enumerate(edges):
            blk = cov[si:si + size[ti], sj:sj + size[tj]]
            ref = ft.block(ti, tj, kj - ki, lj - li)
            res[a, b] = np.max(np.abs(blk - ref))
    return CovarianceCheck(res, float(res.max()))
