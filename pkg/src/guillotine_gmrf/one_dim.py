"""One-dimensional Gaussian Markov chains with nearest-neighbour coupling K.

The chain ... x_{-1}, x_0, x_1 ... carries the weight K on each pair
(x_j, x_{j+1}), with blocks L = x_j and R = x_{j+1}.  Its symbol is
``phi(z) = K_LL + K_RR + K_LR z + K_RL / z``.

``WL`` continues a harmonic profile to the left (``x_{-1} = WL x_0``) and
``WR`` to the right (``x_{1} = WR x_0``).  ``G_L`` is the boundary weight
that the left half-chain induces on its last site.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import AssumptionViolated, DimensionMismatch, NotPositiveDefinite
from .linalg_core import BlockLayout, is_positive_definite, join, schur_complement, solve, symmetrize
from .spectral import GAP_RTOL, M_START, TOL_QUAD, SymbolFunction, grid

ROOT_RTOL = 1e-6
KERNEL_RTOL = 1e-6


class EdgeCoupling:
    """Positive definite coupling K on H (+) H."""

    __slots__ = ("d", "_m")

    def __init__(self, matrix, d: int | None = None, check_pd: bool = True):
        m = symmetrize(np.array(matrix, dtype=complex), "edge coupling")
        if m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatch(f"coupling must be square of even size, got {m.shape}")
        d = m.shape[0] // 2 if d is None else d
        if m.shape[0] != 2 * d:
            raise DimensionMismatch("coupling size does not match 2d")
        if check_pd and not is_positive_definite(m):
            raise NotPositiveDefinite("edge coupling is not positive definite")
        m.setflags(write=False)
        self.d, self._m = d, m

    @classmethod
    def from_blocks(cls, LL, LR, RL, RR, check_pd: bool = True) -> "EdgeCoupling":
        m = np.block([[np.atleast_2d(LL), np.atleast_2d(LR)], [np.atleast_2d(RL), np.atleast_2d(RR)]])
        return cls(m, check_pd=check_pd)

    @property
    def matrix(self):
        return self._m

    @property
    def LL(self):
        return self._m[: self.d, : self.d]

    @property
    def LR(self):
        return self._m[: self.d, self.d:]

    @property
    def RL(self):
        return self._m[self.d:, : self.d]

    @property
    def RR(self):
        return self._m[self.d:, self.d:]

    def __repr__(self):
        return f"EdgeCoupling(d={self.d})"


def _coupling(K) -> EdgeCoupling:
    return K if isinstance(K, EdgeCoupling) else EdgeCoupling(K, check_pd=False)


def phi_1d(K, z) -> np.ndarray:
    K = _coupling(K)
    z = np.asarray(z, dtype=complex)
    return ((K.LL + K.RR) + z[..., None, None] * K.LR + (1 / z)[..., None, None] * K.RL)


@dataclass
class WPair:
    WL: np.ndarray
    WR: np.ndarray
    roots: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    kernels: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))

    @property
    def spectral_radius(self) -> float:
        r = lambda w: float(np.max(np.abs(np.linalg.eigvals(w)))) if w.size else 0.0
        return max(r(self.WL), r(self.WR))


def w_operators(K) -> WPair:
    """W operators from the kernels of phi at its roots (generalized eigenproblem).

    Infinite eigenvalues, coming from ker K_LR, contribute the eigenvalue 0 to
    WL; zero eigenvalues, from ker K_RL, contribute 0 to WR.
    """
    K = _coupling(K)
    d = K.d
    I, Z = np.eye(d), np.zeros((d, d))
    A = np.block([[Z, I], [-K.RL, -(K.LL + K.RR)]])
    B = np.block([[I, Z], [Z, K.LR]])
    (alpha, beta), vecs = sla.eig(A, B, homogeneous_eigvals=True)
    outside = np.abs(alpha) > np.abs(beta) * (1 + 1e-12)
    inside = np.abs(alpha) < np.abs(beta) * (1 - 1e-12)
    if outside.sum() != d or inside.sum() != d:
        raise AssumptionViolated(
            f"expected {d} roots on each side of the unit circle, got {outside.sum()} and {inside.sum()}"
        )
    finite = np.abs(beta) > 1e-14 * np.abs(alpha)
    roots = np.where(finite, alpha / np.where(finite, beta, 1), np.inf)
    regular = finite & (np.abs(roots) > 1e-12)
    rr = roots[regular]
    for i in range(len(rr)):
        for j in range(i + 1, len(rr)):
            if abs(rr[i] - rr[j]) < ROOT_RTOL * max(abs(rr[i]), abs(rr[j])):
                raise AssumptionViolated(f"repeated root {rr[i]:.6g}")
    kern = np.where(outside[None, :], vecs[d:], vecs[:d])
    kern = kern / np.linalg.norm(kern, axis=0, keepdims=True)

    def assemble(mask, ev):
        E = kern[:, mask]
        s = np.linalg.svd(E, compute_uv=False)
        if s[-1] < KERNEL_RTOL * s[0]:
            raise AssumptionViolated("root kernels do not span the fibre")
        return E @ np.diag(ev[mask]) @ np.linalg.inv(E)

    WL = assemble(outside, beta / np.where(outside, alpha, 1))
    WR = assemble(inside, alpha / np.where(inside, beta, 1))
    return WPair(WL, WR, roots, kern)


def inverse_symbol(K, M: int = M_START, tol: float = TOL_QUAD) -> SymbolFunction:
    K = _coupling(K)
    return SymbolFunction.from_callable(lambda u: np.linalg.inv(phi_1d(K, u)), M, tol, hermitian=True)


def w_via_fourier(K, M: int = M_START, tol: float = TOL_QUAD) -> WPair:
    """WL = F_1(phi^-1) F_0(phi^-1)^-1 and WR = F_-1(phi^-1) F_0(phi^-1)^-1."""
    K = _coupling(K)
    ev = np.linalg.eigvalsh(phi_1d(K, grid(M)))
    if ev[:, 0].min() < GAP_RTOL * ev[:, -1].max():
        raise AssumptionViolated(f"1D symbol nearly singular on the circle (min eigenvalue {ev[:, 0].min():.3e})")
    inv = inverse_symbol(K, M, tol)
    f0 = inv.coeff(0)
    f0i = np.linalg.inv(f0)
    return WPair(inv.coeff(1) @ f0i, inv.coeff(-1) @ f0i)


def invariant_boundaries(K, method: str = "fourier", M: int = M_START):
    """(G_L, G_R) = (K_RR + K_RL WL, K_LL + K_LR WR)."""
    K = _coupling(K)
    W = w_via_fourier(K, M) if method == "fourier" else w_operators(K)
    GL = K.RR + K.RL @ W.WL
    GR = K.LL + K.LR @ W.WR
    return 0.5 * (GL + GL.conj().T), 0.5 * (GR + GR.conj().T)


def schur_1d(A, B) -> np.ndarray:
    """Join A on (x0, x1) with B on (x1, x2) and eliminate x1."""
    A, B = np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)
    d = A.shape[0] // 2
    if A.shape != B.shape:
        raise DimensionMismatch("couplings must have the same size")
    lay = BlockLayout([d, d, d], ("0", "1", "2"))
    m = join([(A, ["0", "1"]), (B, ["1", "2"])], lay)
    return schur_complement(m, lay, ["1"])


def schur_1d_left(G, K) -> np.ndarray:
    """Attach boundary weight G to the left end of K and eliminate it."""
    K = _coupling(K)
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    return K.RR - K.RL @ solve(G + K.LL, K.LR)


def schur_1d_right(K, G) -> np.ndarray:
    """Attach boundary weight G to the right end of K and eliminate it."""
    K = _coupling(K)
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    return K.LL - K.LR @ solve(G + K.RR, K.RL)


def iterate_left(K, steps: int = 200, rtol: float = 1e-12):
    """Fixed-point iteration G -> schur_1d_left(G, K) from K_RR; returns (G, iterations)."""
    K = _coupling(K)
    G = K.RR.copy()
    for it in range(1, steps + 1):
        nxt = schur_1d_left(G, K)
        if np.max(np.abs(nxt - G)) <= rtol * np.max(np.abs(nxt)):
            return nxt, it
        G = nxt
    return G, steps


def conditional_profile(K, x0, xn, n: int, k: int) -> np.ndarray:
    """Conditional mean of x_k given x_0 and x_n on a chain of n couplings.

    The profile is ``WR^k a + WL^(n-k) b`` with (a, b) fixed by the two end
    values.
    """
    K = _coupling(K)
    if not 0 <= k <= n:
        raise ValueError("k must lie in [0, n]")
    W = w_operators(K)
    d = K.d
    x0 = np.atleast_1d(np.asarray(x0, dtype=complex))
    xn = np.atleast_1d(np.asarray(xn, dtype=complex))
    mp = np.linalg.matrix_power
    sys = np.block([[np.eye(d), mp(W.WL, n)], [mp(W.WR, n), np.eye(d)]])
    s = np.linalg.svd(sys, compute_uv=False)
    if s[-1] < 1e-12 * s[0]:
        raise AssumptionViolated("boundary data do not determine the mode amplitudes")
    ab = np.linalg.solve(sys, np.concatenate([x0, xn]))
    return mp(W.WR, k) @ ab[:d] + mp(W.WL, n - k) @ ab[d:]


def chain_precision(K, n: int) -> np.ndarray:
    """Precision of x_0..x_n for n couplings (no boundary weights)."""
    K = _coupling(K)
    d = K.d
    lay = BlockLayout([d] * (n + 1))
    return join([(K.matrix, [j, j + 1]) for j in range(n)], lay)
