"""Half-line operators, half-strip boundary weights and their gluings.

Half-lines are truncated to ``n`` sites and stored nearest-to-cut first.
On a West or South half-line block ``i`` is the lattice site ``-1-i``; on an
East or North half-line it is site ``i``.  With this layout attaching a
segment of ``p`` edges at the cut is a block shift.

Toeplitz and Hankel operators follow the coefficient rule
``<1_k, T 1_l> = F_{k-l}`` and ``<1_k, H 1_l> = F_{k+l+1}`` in lattice
coordinates, which in the stored layout reads ``F_{j-i}`` / ``F_{-(i+j+1)}``
on W/S sides and ``F_{i-j}`` / ``F_{i+j+1}`` on E/N sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NotDihedral, NotEven, ShapeMismatch, TruncationExceeded
from .face_weight import FaceOperator, dihedral_params, is_dihedral
from .guill_rect import RectQuadForm, ScaledQuadForm
from .linalg_core import schur_indices, symmetrize
from .one_dim import EdgeCoupling, w_via_fourier
from .spectral import M_START, SymbolFunction, grid, require_spectral_gap
from .strips_halfplanes import strip_symbol

SIDES = ("W", "E", "S", "N")
DEFAULT_N = 48
GUARD = 8

# Lines of a half-strip on each side (first = lower/left), and whether the
# half-lines run towards negative lattice coordinates.
LINES = {"W": ("S", "N"), "E": ("S", "N"), "S": ("W", "E"), "N": ("W", "E")}
NEGATIVE = {"W": True, "S": True, "E": False, "N": False}


def _check_side(side):
    if side not in SIDES:
        raise ValueError(f"unknown side {side!r}")


def grid_for(n: int, M: int = M_START) -> int:
    """Smallest power-of-two grid >= M resolving coefficients up to order 2n."""
    need = 1 << int(np.ceil(np.log2(4 * n + 4)))
    return max(M, need)


@dataclass
class HalfLineOperator:
    side: str
    d: int
    n: int
    matrix: np.ndarray
    hermitian: bool = False

    def block(self, i: int, j: int) -> np.ndarray:
        d = self.d
        return self.matrix[i * d:(i + 1) * d, j * d:(j + 1) * d]

    def leading(self, m: int) -> np.ndarray:
        return self.matrix[: m * self.d, : m * self.d]

    def decay_ratio(self) -> float:
        """Geometric decay of block norms along the first block row (log-linear fit)."""
        norms = np.array([np.linalg.norm(self.block(0, j)) for j in range(self.n)])
        ok = norms > 1e-14 * max(norms.max(), 1e-300)
        j = np.arange(self.n)[ok]
        if len(j) < 3:
            return 0.0
        slope = np.polyfit(j, np.log(norms[ok]), 1)[0]
        return float(np.exp(slope))


def _coeff_table(sym: SymbolFunction, n: int) -> np.ndarray:
    return sym.coeffs(2 * n)


def toeplitz(sym: SymbolFunction, side: str, n: int) -> HalfLineOperator:
    _check_side(side)
    c = _coeff_table(sym, n)
    a, b = (-1, 1) if NEGATIVE[side] else (1, -1)
    m = _kernels.index_blocks(c, 2 * n, n, a, b, 0)
    return HalfLineOperator(side, sym.shape[0], n, m, sym.hermitian)


def hankel(sym: SymbolFunction, side: str, n: int) -> HalfLineOperator:
    _check_side(side)
    c = _coeff_table(sym, n)
    a, b, c0 = (-1, -1, -1) if NEGATIVE[side] else (1, 1, 1)
    m = _kernels.index_blocks(c, 2 * n, n, a, b, c0)
    return HalfLineOperator(side, sym.shape[0], n, m, False)


def _require_even(sym: SymbolFunction, tol: float = 1e-10):
    if not sym.is_even(tol):
        raise NotEven("fold of a symbol that is not even")


def fold(sym: SymbolFunction, side: str, n: int, require_even: bool = True) -> HalfLineOperator:
    """Toeplitz minus Hankel."""
    if require_even:
        _require_even(sym)
    t, h = toeplitz(sym, side, n), hankel(sym, side, n)
    return HalfLineOperator(side, t.d, n, t.matrix - h.matrix, sym.hermitian)


def fold_plus(sym: SymbolFunction, side: str, n: int, require_even: bool = True) -> HalfLineOperator:
    """Toeplitz plus Hankel."""
    if require_even:
        _require_even(sym)
    t, h = toeplitz(sym, side, n), hankel(sym, side, n)
    return HalfLineOperator(side, t.d, n, t.matrix + h.matrix, sym.hermitian)


def transverse_chain(Q: FaceOperator, side: str) -> EdgeCoupling:
    """1D coupling of the edges crossing a half-strip of the given side."""
    _check_side(side)
    cols = "WE" if side in ("W", "E") else "SN"
    return EdgeCoupling(Q.blocks(cols, cols))


def u_transverse(Q: FaceOperator, side: str, n: int = DEFAULT_N, WL: np.ndarray | None = None,
                 M: int = M_START) -> np.ndarray:
    """Stack of blocks U (I + WL) WL^k, k = 0..n-1, for a dihedral face weight."""
    U = dihedral_params(Q).U
    if WL is None:
        WL = w_via_fourier(transverse_chain(Q, side), M).WL
    d = U.shape[0]
    out = np.empty((n * d, d), dtype=complex)
    row = U @ (np.eye(d) + WL)
    for k in range(n):
        out[k * d:(k + 1) * d] = row
        row = row @ WL
    return out


@dataclass
class HalfStripForm:
    """Boundary weight of a half-strip on two truncated half-lines and its cut.

    ``lines`` couples the two half-lines (each n blocks of size d, first
    line first), ``cross`` couples them to the cut, and ``cut`` is the cut
    block (``width`` edges of size d).
    """

    side: str
    n: int
    d: int
    lines: np.ndarray
    cross: np.ndarray
    cut: np.ndarray
    width: int = 1
    sigma: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nd, wd = self.n * self.d, self.width * self.d
        if self.lines.shape != (2 * nd, 2 * nd) or self.cross.shape != (2 * nd, wd) or self.cut.shape != (wd, wd):
            raise DimensionMismatch("half-strip blocks have inconsistent shapes")

    @property
    def line_names(self) -> tuple:
        return LINES[self.side]

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.lines, self.cross], [self.cross.conj().T, self.cut]])

    @classmethod
    def from_matrix(cls, side, n, d, m, width=1, **kw) -> "HalfStripForm":
        m = symmetrize(m, "half-strip form")
        k = 2 * n * d
        return cls(side, n, d, m[:k, :k], m[:k, k:], m[k:, k:], width, **kw)

    def line_block(self, a: str, b: str) -> HalfLineOperator:
        names, nd = self.line_names, self.n * self.d
        i, j = names.index(a), names.index(b)
        return HalfLineOperator(self.side, self.d, self.n,
                                self.lines[i * nd:(i + 1) * nd, j * nd:(j + 1) * nd], a == b)

    def line_indices(self, which: int) -> np.ndarray:
        nd = self.n * self.d
        return np.arange(which * nd, (which + 1) * nd)

    @property
    def cut_indices(self) -> np.ndarray:
        return np.arange(2 * self.n * self.d, 2 * self.n * self.d + self.width * self.d)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def leading(self, m: int) -> "np.ndarray":
        """Indices of the leading m blocks of both half-lines followed by the cut."""
        d, nd = self.d, self.n * self.d
        a = np.arange(m * d)
        return np.concatenate([a, nd + a, self.cut_indices])

    def perturbed(self, eps: float, block: str = "lines") -> "HalfStripForm":
        """Copy with ``eps * I`` added to the ``lines`` or ``cut`` block."""
        lines, cut = self.lines, self.cut
        if block == "lines":
            lines = lines + eps * np.eye(lines.shape[0])
        elif block == "cut":
            cut = cut + eps * np.eye(cut.shape[0])
        else:
            raise ValueError(f"unknown block {block!r}")
        return HalfStripForm(self.side, self.n, self.d, lines, self.cross, cut, self.width, self.sigma,
                             dict(self.meta))


def halfstrip_fixed_point(Q: FaceOperator, side: str = "W", n: int = DEFAULT_N,
                          M: int = M_START) -> HalfStripForm:
    """Unit-width half-strip fixed point of a dihedral face weight.

    The line block is the fold of the strip symbol, the cross block stacks
    the transverse coupling on both lines and the cut block is T + A WL.
    By dihedral invariance the same matrices serve all four sides.
    """
    _check_side(side)
    if not is_dihedral(Q):
        raise NotDihedral("half-strip fixed points need a dihedral face weight")
    require_spectral_gap(Q)
    prm = dihedral_params(Q)
    M = grid_for(n, M)
    st = strip_symbol(Q, "WE", M)
    blocks = [[fold(st.part(a, b), "W", n).matrix for b in "SN"] for a in "SN"]
    W = w_via_fourier(transverse_chain(Q, "W"), M).WL
    Uw = u_transverse(Q, "W", n, WL=W)
    cut = prm.T + prm.A @ W
    sigma = float(np.max(np.abs(np.linalg.eigvals(W)))) if W.size else 0.0
    return HalfStripForm(side, n, Q.d1, np.block(blocks), np.vstack([Uw, Uw]),
                         0.5 * (cut + cut.conj().T), 1, sigma)


# ---------------------------------------------------------------------------
# Shifts and gluings
# ---------------------------------------------------------------------------


def shift_d(n: int, d: int, p: int, side: str) -> np.ndarray:
    """Selection matrix of the shift by p on a truncated half-line.

    Input coordinates are the old half-line (n blocks) followed by a
    segment of p edges in canonical order (left to right, bottom to top).
    The segment is placed at the cut end and the last p old blocks drop.
    """
    _check_side(side)
    if p < 0 or p > n:
        raise TruncationExceeded(f"shift by {p} exceeds truncation {n}")
    D = np.zeros((n * d, (n + p) * d))
    I = np.eye(d)
    for i in range(n):
        if i < p:
            # Segment edge nearest the new cut comes first.
            src = n + (p - 1 - i if NEGATIVE[side] else i)
        else:
            src = i - p
        D[i * d:(i + 1) * d, src * d:(src + 1) * d] = I
    return D


def _eliminate(m: np.ndarray, keep: np.ndarray, elim: np.ndarray) -> np.ndarray:
    s = schur_indices(m, keep, elim)
    return 0.5 * (s + s.conj().T)


def glue_halfstrips_vertical(A: HalfStripForm, B: HalfStripForm) -> HalfStripForm:
    """Stack two half-strips of one side across their shared half-line.

    For W/E sides ``B`` sits on top of ``A``; for S/N sides to its right.
    """
    if A.side != B.side or A.n != B.n or A.d != B.d:
        raise ShapeMismatch("half-strips must share side, truncation and fibre")
    n, d = A.n, A.d
    nd = n * d
    wa, wb = A.width * d, B.width * d
    # Coordinates: A.first, shared, B.second, A.cut, B.cut
    size = 3 * nd + wa + wb
    m = np.zeros((size, size), dtype=complex)
    ia = np.concatenate([np.arange(0, 2 * nd), 3 * nd + np.arange(wa)])
    ib = np.concatenate([np.arange(nd, 3 * nd), 3 * nd + wa + np.arange(wb)])
    m[np.ix_(ia, ia)] += A.matrix
    m[np.ix_(ib, ib)] += B.matrix
    keep = np.concatenate([np.arange(nd), np.arange(2 * nd, size)])
    out = _eliminate(m, keep, np.arange(nd, 2 * nd))
    return HalfStripForm.from_matrix(A.side, n, d, out, A.width + B.width, sigma=A.sigma)


glue_halfstrips = glue_halfstrips_vertical


def _rect_form(R) -> RectQuadForm:
    if isinstance(R, ScaledQuadForm):
        return R.form
    if isinstance(R, FaceOperator):
        return RectQuadForm.from_face(R)
    return R


def glue_halfstrip_rect(A: HalfStripForm, R, guard: int = GUARD) -> HalfStripForm:
    """Attach a rectangle at the cut of a half-strip and shift the half-lines.

    The rectangle sits East of a W half-strip, West of an E one, North of
    an S one and South of an N one; its side facing the half-strip must
    match the cut width.
    """
    R = _rect_form(R)
    side, n, d = A.side, A.n, A.d
    if R.d1 != d or R.d2 != d:
        raise DimensionMismatch("rectangle fibres must match the half-strip")
    facing, far = {"W": ("W", "E"), "E": ("E", "W"), "S": ("S", "N"), "N": ("N", "S")}[side]
    first, second = LINES[side]
    width = R.q if side in ("W", "E") else R.p
    length = R.p if side in ("W", "E") else R.q
    if width != A.width:
        raise ShapeMismatch(f"rectangle side has {width} edges, cut has {A.width}")
    if length > n - guard:
        raise TruncationExceeded(f"rectangle length {length} exceeds n - {guard} = {n - guard}")
    nd, cw, sl = n * d, A.width * d, length * d
    # Coordinates: line1 (nd), line2 (nd), cut (cw), seg1 (sl), seg2 (sl), far (cw)
    off = np.cumsum([0, nd, nd, cw, sl, sl, cw])
    size = off[-1]
    m = np.zeros((size, size), dtype=complex)
    m[:off[3], :off[3]] += A.matrix
    role = {first: 3, second: 4, facing: 2, far: 5}
    ridx = np.concatenate([np.arange(off[role[s]], off[role[s] + 1]) for s in ("S", "N", "W", "E")])
    m[np.ix_(ridx, ridx)] += R.matrix
    keep = np.concatenate([np.arange(0, off[2]), np.arange(off[3], size)])
    s = _eliminate(m, keep, np.arange(off[2], off[3]))
    # s is on line1, line2, seg1, seg2, far.
    D = shift_d(n, d, length, side)
    loc = np.cumsum([0, nd, nd, sl, sl, cw])
    sel1 = np.concatenate([np.arange(loc[0], loc[1]), np.arange(loc[2], loc[3])])
    sel2 = np.concatenate([np.arange(loc[1], loc[2]), np.arange(loc[3], loc[4])])
    T = np.zeros((2 * nd + cw, size - cw), dtype=complex)
    T[:nd, sel1] = D
    T[nd:2 * nd, sel2] = D
    T[2 * nd:, loc[4]:loc[5]] = np.eye(cw)
    out = T @ s @ T.conj().T
    return HalfStripForm.from_matrix(side, n, d, out, A.width, sigma=A.sigma)


def halfstrip_residuals(H: HalfStripForm, Q: FaceOperator, guard: int = GUARD) -> dict:
    """Deviation after gluing one face, on the leading n - guard blocks.

    Keys: ``cut`` (cut block), ``lines`` (half-line couplings) and
    ``transverse`` (line-to-cut coupling).
    """
    G = glue_halfstrip_rect(H, Q, guard)
    m = H.n - guard
    d, nd = H.d, H.n * H.d
    lead = np.concatenate([np.arange(m * d), nd + np.arange(m * d)])
    c = H.cut_indices
    A, B = H.matrix, G.matrix
    return {
        "cut": float(np.max(np.abs(A[np.ix_(c, c)] - B[np.ix_(c, c)]))),
        "lines": float(np.max(np.abs(A[np.ix_(lead, lead)] - B[np.ix_(lead, lead)]))),
        "transverse": float(np.max(np.abs(A[np.ix_(lead, c)] - B[np.ix_(lead, c)]))),
    }


@dataclass
class OppositeGluing:
    """Strip operator near the cut, assembled from two opposite half-strips."""

    matrix: np.ndarray  # on line1 (W sites, E sites), line2 (W sites, E sites)
    residual_map: np.ndarray  # |assembled - Toeplitz| over the window, shape (2s, 2s, 2, 2)
    sep: int

    @property
    def residual(self) -> float:
        return float(np.max(self.residual_map))


def glue_opposite_halfstrips(Wf: HalfStripForm, Ef: HalfStripForm, shift: int = 0, sep: int = GUARD,
                             strip: SymbolFunction | None = None, Q: FaceOperator | None = None,
                             M: int = M_START) -> OppositeGluing:
    """Join a West and an East half-strip across the shared cut.

    The result is compared entrywise with the strip operator coefficients
    on sites ``-sep..sep-1`` of both lines; ``shift`` offsets the East
    half-line sites.
    """
    if Wf.side != "W" or Ef.side != "E":
        raise ShapeMismatch("need a West and an East half-strip")
    if Wf.n != Ef.n or Wf.d != Ef.d or Wf.width != Ef.width:
        raise ShapeMismatch("half-strips must share truncation, fibre and width")
    if strip is None:
        if Q is None:
            raise ValueError("provide the strip symbol or the face weight")
        strip = strip_symbol(Q, "WE", grid_for(Wf.n, M)).symbol
    n, d = Wf.n, Wf.d
    nd, cw = n * d, Wf.width * d
    # Coordinates: W.line1, W.line2, E.line1, E.line2, cut
    size = 4 * nd + cw
    m = np.zeros((size, size), dtype=complex)
    iw = np.concatenate([np.arange(0, 2 * nd), 4 * nd + np.arange(cw)])
    ie = np.concatenate([np.arange(2 * nd, 4 * nd), 4 * nd + np.arange(cw)])
    m[np.ix_(iw, iw)] += Wf.matrix
    m[np.ix_(ie, ie)] += Ef.matrix
    s = _eliminate(m, np.arange(4 * nd), np.arange(4 * nd, size))

    def index(line, site):
        if site < 0:
            return line * nd + (-1 - site) * d
        return 2 * nd + line * nd + (site - shift) * d

    sites = np.arange(-sep, sep)
    res = np.zeros((2 * sep, 2 * sep, 2, 2))
    for a in range(2):
        for b in range(2):
            for i, x in enumerate(sites):
                for j, y in enumerate(sites):
                    blk = s[index(a, x):index(a, x) + d, index(b, y):index(b, y) + d]
                    ref = strip.coeff(y - x)[a * d:(a + 1) * d, b * d:(b + 1) * d]
                    res[i, j, a, b] = np.max(np.abs(blk - ref))
    return OppositeGluing(s, res, sep)


def halfplane_from_halfstrip(H: HalfStripForm, M: int = M_START) -> SymbolFunction:
    """Half-plane symbol on the cut, rebuilt from a stack of half-strips.

    Stacking copies of ``H`` transversally and eliminating every half-line
    is a one-dimensional chain in the line variables; per Fourier mode
    ``u`` this leaves ``cut - b(u)^* phi(u)^-1 b(u)`` with
    ``phi(u) = L_11 + L_22 + L_12 u + L_21 / u`` and
    ``b(u) = X_1 + X_2 / u``.
    """
    nd = H.n * H.d
    L, X = H.lines, H.cross
    L11, L12, L21, L22 = L[:nd, :nd], L[:nd, nd:], L[nd:, :nd], L[nd:, nd:]
    X1, X2 = X[:nd], X[nd:]
    u = grid(M)[:, None, None]
    phi = (L11 + L22)[None] + u * L12 + L21 / u
    b = X1[None] + X2 / u
    g = H.cut[None] - np.conj(np.swapaxes(b, 1, 2)) @ np.linalg.solve(phi, b)
    return SymbolFunction(0.5 * (g + np.conj(np.swapaxes(g, 1, 2))), hermitian=True)
