"""Doubly infinite strips, cylinders and half-planes, mode by mode.

A strip in direction WE is the row of faces (k, 0), k in Z.  Fourier
transforming along the strip and eliminating the vertical edges leaves a
symbol ``u -> Qhat(u)`` on H1 (+) H1 = (S, N).  Stacking strips is the
one-dimensional Schur product at every ``u``, so the half-plane boundary
weights are the invariant boundaries of that chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolated, DimensionMismatch, SingularPivot
from .linalg_core import BlockLayout, join, schur_complement
from .spectral import (M_START, TOL_QUAD, SymbolFunction, grid, partial_fourier_stack, psi_h, psi_v,
                       require_spectral_gap)

DIRECTIONS = ("WE", "SN")


def _dims(Q):
    """Sizes of the S/N and W/E blocks of a face or rectangle form."""
    return Q.block("S", "S").shape[0], Q.block("W", "W").shape[0]


def _batched_schur(m: np.ndarray, n_keep: int) -> np.ndarray:
    a, b = m[:, :n_keep, :n_keep], m[:, :n_keep, n_keep:]
    c, d = m[:, n_keep:, :n_keep], m[:, n_keep:, n_keep:]
    s = np.linalg.svd(d, compute_uv=False)
    if np.any(s[:, -1] < 1e-12 * s[:, 0]):
        raise SingularPivot("transverse block singular at a grid point")
    out = a - b @ np.linalg.solve(d, c)
    return 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))


def strip_samples(Q, direction: str, u) -> np.ndarray:
    """Strip symbol at the points ``u`` (shape (len(u), 2h, 2h))."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    d1, d2 = _dims(Q)
    if direction == "WE":
        m = psi_h(Q, u)
        return _batched_schur(m, 2 * d1)
    if direction == "SN":
        m = psi_v(Q, u)
        # Move the shared horizontal block last before eliminating it.
        perm = np.r_[d1:d1 + 2 * d2, 0:d1]
        return _batched_schur(m[:, perm][:, :, perm], 2 * d2)
    raise ValueError(f"unknown direction {direction!r}")


@dataclass
class StripSymbol:
    direction: str
    symbol: SymbolFunction

    @property
    def h(self) -> int:
        """Fibre dimension of one boundary line."""
        return self.symbol.shape[0] // 2

    def part(self, a: str, b: str) -> SymbolFunction:
        """Block of the symbol between the two boundary lines (S/N or W/E)."""
        names = ("S", "N") if self.direction == "WE" else ("W", "E")
        h = self.h
        s = lambda x: slice(names.index(x) * h, (names.index(x) + 1) * h)
        return self.symbol.block(s(a), s(b))


def strip_symbol(Q, direction: str = "WE", M: int = M_START) -> StripSymbol:
    pts = grid(M)
    return StripSymbol(direction, SymbolFunction(strip_samples(Q, direction, pts), hermitian=True))


def cylinder_form(Q, p: int, direction: str = "WE") -> np.ndarray:
    """Ring of p faces with the transverse edges eliminated.

    Direction WE returns the form on (S_0..S_{p-1}, N_0..N_{p-1}); direction
    SN the form on (W_0..W_{p-1}, E_0..E_{p-1}).
    """
    if p < 1:
        raise ValueError("p must be positive")
    d1, d2 = _dims(Q)
    m = np.block([[Q.block(a, b) for b in "SNWE"] for a in "SNWE"])
    if direction == "WE":
        labels = [f"S{k}" for k in range(p)] + [f"N{k}" for k in range(p)] + [f"V{k}" for k in range(p)]
        lay = BlockLayout([d1] * 2 * p + [d2] * p, labels)
        faces = [(m, [f"S{k}", f"N{k}", f"V{k}", f"V{(k + 1) % p}"]) for k in range(p)]
        elim = [f"V{k}" for k in range(p)]
    elif direction == "SN":
        labels = [f"W{l}" for l in range(p)] + [f"E{l}" for l in range(p)] + [f"H{l}" for l in range(p)]
        lay = BlockLayout([d2] * 2 * p + [d1] * p, labels)
        faces = [(m, [f"H{l}", f"H{(l + 1) % p}", f"W{l}", f"E{l}"]) for l in range(p)]
        elim = [f"H{l}" for l in range(p)]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if p == 1:
        # A one-face ring identifies the two transverse edges.
        a, b = ("W", "E") if direction == "WE" else ("S", "N")
        keep = "SN" if direction == "WE" else "WE"
        t = lambda x: [Q.block(x, a) + Q.block(x, b)]
        rows = [[Q.block(x, y) for y in keep] + t(x) for x in keep]
        last = [Q.block(a, y) + Q.block(b, y) for y in keep]
        tt = Q.block(a, a) + Q.block(a, b) + Q.block(b, a) + Q.block(b, b)
        full = np.block(rows + [last + [tt]])
        h = Q.block(keep[0], keep[0]).shape[0]
        lay = BlockLayout([h, h, tt.shape[0]], ("x", "y", "t"))
        return schur_complement(full, lay, ["t"])
    return schur_complement(join(faces, lay), lay, elim)


def cylinder_block(Q, p: int, k: int, direction: str = "WE") -> np.ndarray:
    """Fourier block of the cylinder at the root of unity exp(2 pi i k / p)."""
    if not 0 <= k < p:
        raise ValueError("k must satisfy 0 <= k < p")
    u = np.exp(2j * np.pi * k / p)
    B = Q.block
    if direction == "WE":
        long_, a, b = "SN", "W", "E"
    else:
        long_, a, b = "WE", "S", "N"
    top = np.block([[B(x, y) for y in long_] for x in long_])
    left = np.block([[B(x, a) + u * B(x, b)] for x in long_])
    right = np.block([[B(a, y) + B(b, y) / u for y in long_]])
    mid = B(a, a) + B(b, b) + u * B(a, b) + B(b, a) / u
    return top - left @ np.linalg.solve(mid, right)


def strip_schur(A: StripSymbol, B: StripSymbol) -> StripSymbol:
    """Pointwise one-dimensional Schur product (A below/left of B)."""
    if A.direction != B.direction or A.symbol.M != B.symbol.M:
        raise DimensionMismatch("strip symbols must share direction and grid")
    h = A.h
    a, b = A.symbol.samples, B.symbol.samples
    M = a.shape[0]
    full = np.zeros((M, 3 * h, 3 * h), dtype=complex)
    full[:, : 2 * h, : 2 * h] += a
    full[:, h:, h:] += b
    perm = np.r_[0:h, 2 * h:3 * h, h:2 * h]
    out = _batched_schur(full[:, perm][:, :, perm], 2 * h)
    return StripSymbol(A.direction, SymbolFunction(out, hermitian=True))


# ---------------------------------------------------------------------------
# Half-planes
# ---------------------------------------------------------------------------

# side -> (partial-coefficient axis, order, diagonal block of the inverse symbol)
_W_TABLE = {"S": ("w", 1, 1), "N": ("w", -1, 1), "W": ("z", 1, 2), "E": ("z", -1, 2)}


def _inverse_block(Q, index: int, c: SymbolFunction) -> SymbolFunction:
    d1, d2 = Q.d1, Q.d2
    s = slice(0, d1) if index == 1 else slice(d1, d1 + d2)
    return c.block(s, s)


def w_hat_powers(Q, side: str, n_max: int, M: int = M_START, tol: float = TOL_QUAD) -> list:
    """[W_side(u)^n for n = 0..n_max] from partial Fourier coefficients."""
    axis, sgn, idx = _W_TABLE[side]
    require_spectral_gap(Q)
    cs = partial_fourier_stack(Q, axis, [sgn * n for n in range(n_max + 1)], M, tol)
    blocks = [_inverse_block(Q, idx, c) for c in cs]
    c0 = blocks[0].samples
    s = np.linalg.svd(c0, compute_uv=False)
    if np.any(s[:, -1] < 1e-12 * s[:, 0]):
        raise SingularPivot("zeroth partial coefficient singular at a grid point")
    inv0 = np.linalg.inv(c0)
    return [SymbolFunction(b.samples @ inv0) for b in blocks]


def w_hat(Q, side: str, M: int = M_START, tol: float = TOL_QUAD) -> SymbolFunction:
    """Half-plane W symbol, e.g. W_S(u) = C11_{.,1}(u) C11_{.,0}(u)^-1."""
    if side not in _W_TABLE:
        raise ValueError(f"unknown side {side!r}")
    W = w_hat_powers(Q, side, 1, M, tol)[1]
    rho = np.max(np.abs(np.linalg.eigvals(W.samples)))
    if rho >= 1 - 1e-8:
        raise AssumptionViolated(f"half-plane W symbol has spectral radius {rho:.6g}")
    return W


@dataclass
class HalfPlaneSymbol:
    side: str
    symbol: SymbolFunction
    w: SymbolFunction
    strip: StripSymbol
    asymmetry: float = 0.0  # before symmetrization; Hermitian in exact arithmetic

    def residual(self) -> float:
        """Max pointwise deviation from the half-plane fixed-point equation."""
        K = self.strip.symbol.samples
        G = self.symbol.samples
        h = G.shape[1]
        LL, LR, RL, RR = K[:, :h, :h], K[:, :h, h:], K[:, h:, :h], K[:, h:, h:]
        if self.side in ("S", "W"):
            new = RR - RL @ np.linalg.solve(G + LL, LR)
        else:
            new = LL - LR @ np.linalg.solve(G + RR, RL)
        return float(np.max(np.abs(new - G)))


def halfplane_symbol(Q, side: str, M: int = M_START, strip: StripSymbol | None = None,
                     W: SymbolFunction | None = None) -> HalfPlaneSymbol:
    """Boundary weight of the half-plane on the given side, per Fourier mode.

    For the South half-plane ``G(u) = Qhat_NN(u) + Qhat_NS(u) W_S(u)``.
    """
    direction = "WE" if side in ("S", "N") else "SN"
    strip = strip_symbol(Q, direction, M) if strip is None else strip
    W = w_hat(Q, side, M) if W is None else W
    near, far = {"S": ("N", "S"), "N": ("S", "N"), "W": ("E", "W"), "E": ("W", "E")}[side]
    g = strip.part(near, near).samples + strip.part(near, far).samples @ W.samples
    gh = np.conj(np.swapaxes(g, 1, 2))
    asym = float(np.max(np.abs(g - gh)))
    return HalfPlaneSymbol(side, SymbolFunction(0.5 * (g + gh), hermitian=True), W, strip, asym)


def halfplane_from_inverse(Q, M: int = M_START) -> SymbolFunction:
    """South half-plane symbol written with Q and the blocks of the inverse symbol only."""
    d1 = Q.d1
    c0, c1 = partial_fourier_stack(Q, "w", [0, 1], M)
    u = grid(M)[:, None, None]
    C11_0 = c0.samples[:, :d1, :d1]
    C11_1, C21_1 = c1.samples[:, :d1, :d1], c1.samples[:, d1:, :d1]
    B = Q.block
    g = B("N", "N") + (B("N", "S") @ C11_1 + (B("N", "W") + B("N", "E") * u) @ C21_1) @ np.linalg.inv(C11_0)
    return SymbolFunction(g)
