"""The free-energy eigenvalue by three independent routes.

All values are logarithms under the complex-Gaussian convention
``gamma = (2 pi)^dim / det``.  The routes:

* torus: ``log Z(p, q) / (p q)`` for periodic p x q tori;
* factorization: ``log Lambda = log Lambda1D_WE + log Lambda'`` where the
  first factor is the eigenvalue of the chain of vertical edges and the
  second averages ``log det`` of the Schur complement of the symbol on H1;
* Szego: ``log Lambda'`` as the limit of ratios of one-dimensional
  eigenvalues of folded (Toeplitz minus Hankel) transverse processes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NotPositiveDefinite, QuadratureNotConverged
from .face_weight import FaceOperator
from .folds_halfstrips import fold, grid_for
from .linalg_core import log_det
from .one_dim import EdgeCoupling, invariant_boundaries
from .spectral import M_MAX, M_START, TOL_QUAD, free_energy, grid, psi
from .strips_halfplanes import strip_symbol

LOG_2PI = float(np.log(2 * np.pi))
CONVENTION = "complex-gaussian: gamma = (2pi)^dim / det"


# ---------------------------------------------------------------------------
# Torus
# ---------------------------------------------------------------------------


def torus_precision(Q: FaceOperator, p: int, q: int) -> np.ndarray:
    """Dense precision of all edges of the periodic p x q torus.

    Horizontal edge (k, l) sits at ``(k + p l) d1``; vertical edges follow.
    """
    if p < 1 or q < 1:
        raise ValueError("torus sides must be positive")
    d1, d2 = Q.d1, Q.d2
    k, l = np.meshgrid(np.arange(p), np.arange(q), indexing="ij")
    H = lambda k, l: ((k % p) + p * (l % q)) * d1
    V = lambda k, l: p * q * d1 + ((k % p) + p * (l % q)) * d2
    starts = [(H(k, l), d1), (H(k, l + 1), d1), (V(k, l), d2), (V(k + 1, l), d2)]
    idx = np.concatenate([s.reshape(-1, 1) + np.arange(n) for s, n in starts], axis=1)
    dim = p * q * (d1 + d2)
    out = np.zeros((dim, dim), dtype=complex)
    _kernels.scatter_faces(out, np.ascontiguousarray(Q.matrix), idx)
    return out


def torus_log_z(Q: FaceOperator, p: int, q: int) -> float:
    """``(d1+d2) p q log 2pi - sum log det Psi`` over the roots of unity."""
    z, w = np.meshgrid(grid(p), grid(q), indexing="ij")
    sign, ld = np.linalg.slogdet(psi(Q, z, w))
    if np.any(sign.real <= 0):
        raise NotPositiveDefinite("torus symbol not positive at a root of unity")
    return (Q.d1 + Q.d2) * p * q * LOG_2PI - float(np.sum(ld))


def torus_log_z_dense(Q: FaceOperator, p: int, q: int) -> float:
    m = torus_precision(Q, p, q)
    return m.shape[0] * LOG_2PI - log_det(m)


# ---------------------------------------------------------------------------
# Factorized routes
# ---------------------------------------------------------------------------


def _we_coupling(Q) -> EdgeCoupling:
    return EdgeCoupling(Q.blocks("WE", "WE"))


def lambda_1d_we(Q: FaceOperator, M: int = M_START) -> float:
    """Eigenvalue of the chain of vertical edges, from its left invariant boundary."""
    K = _we_coupling(Q)
    GL, _ = invariant_boundaries(K, M=M)
    return Q.d2 * LOG_2PI - log_det(GL + K.LL)


def lambda_1d_we_quadrature(Q: FaceOperator, M: int = M_START, tol: float = TOL_QUAD) -> float:
    """Same eigenvalue as ``d2 log 2pi - mean log det phi_WE``."""
    K = _we_coupling(Q)

    def mean(m):
        u = grid(m)
        return float(np.mean(np.linalg.slogdet(K.LL + K.RR + u[:, None, None] * K.LR
                                               + (1 / u)[:, None, None] * K.RL)[1]))

    return Q.d2 * LOG_2PI - _doubling(mean, M, tol, "1D eigenvalue")


def _doubling(f, M, tol, what):
    cur = f(M)
    while True:
        nxt = f(2 * M)
        if abs(nxt - cur) < tol:
            return nxt
        M *= 2
        if M > M_MAX // 8:
            raise QuadratureNotConverged(f"{what}: change {abs(nxt - cur):.2e} at M={M}")
        cur = nxt


def transverse_schur(Q: FaceOperator, u1, u2) -> np.ndarray:
    """Schur complement of the symbol onto H1, eliminating the vertical edges."""
    m = psi(Q, u1, u2)
    d1 = Q.d1
    a, b, c, d = m[..., :d1, :d1], m[..., :d1, d1:], m[..., d1:, :d1], m[..., d1:, d1:]
    return a - b @ np.linalg.solve(d, c)


def lambda_prime_integral(Q: FaceOperator, M: int = M_START, tol: float = TOL_QUAD) -> float:
    def mean(m):
        u = grid(m)
        z, w = np.meshgrid(u, u, indexing="ij")
        sign, ld = np.linalg.slogdet(transverse_schur(Q, z, w))
        if np.any(sign.real <= 0):
            raise NotPositiveDefinite("transverse Schur complement not positive on the grid")
        return float(np.mean(ld))

    return Q.d1 * LOG_2PI - _doubling(mean, M, tol, "transverse eigenvalue")


def _folded_blocks(Q: FaceOperator, n: int, M: int):
    """Folds of the four strip-symbol blocks at truncation n."""
    strip = strip_symbol(Q, "WE", grid_for(n, M))
    return {(a, b): fold(strip.part(a, b), "W", n).matrix for a in "SN" for b in "SN"}


def folded_log_lambda_1d(blocks: dict, n: int, d1: int, M: int = 64, tol: float = 1e-12) -> float:
    """log Lambda1D of the vertical chain whose coupling is the truncation of ``blocks`` to n."""
    s = slice(0, n * d1)
    B = {k: v[s, s] for k, v in blocks.items()}
    diag = B["S", "S"] + B["N", "N"]

    def mean(m):
        u = grid(m)[:, None, None]
        sign, ld = np.linalg.slogdet(diag + u * B["S", "N"] + B["N", "S"] / u)
        if np.any(sign.real <= 0):
            raise NotPositiveDefinite("folded transverse symbol not positive")
        return float(np.mean(ld))

    return n * d1 * LOG_2PI - _doubling(mean, M, tol, "folded 1D eigenvalue")


def lambda_prime_szego(Q: FaceOperator, ns, M: int = M_START) -> list:
    """Ratios ``log Lambda1D(K_{n+1}) - log Lambda1D(K_n)`` for every n in ``ns``."""
    ns = [int(n) for n in ns]
    if not ns or min(ns) < 1:
        raise ValueError("truncations must be positive")
    blocks = _folded_blocks(Q, max(ns) + 1, M)
    cache = {}

    def lam(n):
        if n not in cache:
            cache[n] = folded_log_lambda_1d(blocks, n, Q.d1)
        return cache[n]

    return [lam(n + 1) - lam(n) for n in ns]


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def geometric_fit(ns, errors, floor: float = 1e-12) -> float:
    """Per-unit-step ratio of a geometric fit ``err ~ C r^n``; nan if unusable.

    Errors at or below ``floor`` are roundoff and are left out of the fit.
    """
    ns, e = np.asarray(ns, dtype=float), np.abs(np.asarray(errors, dtype=float))
    ok = e > floor
    if ok.sum() < 2:
        return float("nan")
    slope = np.polyfit(ns[ok], np.log(e[ok]), 1)[0]
    return float(np.exp(slope))


@dataclass
class EigenReport:
    log_lambda_fourier: float
    torus: list = field(default_factory=list)  # (p, log Z / p^2)
    log_lambda_1d_we: float = float("nan")
    log_lambda_prime_integral: float = float("nan")
    szego: list = field(default_factory=list)  # (n, value)
    tolerances: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)

    @property
    def factorization_residual(self) -> float:
        return abs(self.log_lambda_1d_we + self.log_lambda_prime_integral - self.log_lambda_fourier)

    def rows(self):
        yield "convention", "", CONVENTION
        yield "fourier", "", self.log_lambda_fourier
        for p, v in self.torus:
            yield "torus", p, v
        yield "1d_we", "", self.log_lambda_1d_we
        yield "prime_integral", "", self.log_lambda_prime_integral
        for n, v in self.szego:
            yield "prime_szego", n, v
        yield "factorization_residual", "", self.factorization_residual
        for k, v in self.tolerances.items():
            yield "tolerance", k, v
        for k, v in self.fits.items():
            yield "fit", k, v

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("route", "parameter", "value"))
        for route, param, value in self.rows():
            w.writerow((route, param, f"{value:.15g}" if isinstance(value, float) else value))
        return buf.getvalue()


def eigen_report(Q: FaceOperator, torus_sizes=(8, 16, 32, 64), szego_ns=(8, 16, 32, 64),
                 M: int = M_START, tol: float = TOL_QUAD) -> EigenReport:
    f = free_energy(Q, M, tol)
    torus = [(p, torus_log_z(Q, p, p) / p**2) for p in torus_sizes]
    lp = lambda_prime_integral(Q, M, tol)
    sz = lambda_prime_szego(Q, szego_ns, M) if szego_ns else []
    rep = EigenReport(
        log_lambda_fourier=f,
        torus=torus,
        log_lambda_1d_we=lambda_1d_we(Q, M),
        log_lambda_prime_integral=lp,
        szego=list(zip(szego_ns, sz)),
        tolerances={"quadrature": tol, "factorization": 1e-9, "szego": 1e-4, "torus": 1e-3},
    )
    if len(torus) >= 2:
        rep.fits["torus_gap_ratio"] = geometric_fit([p for p, _ in torus], [v - f for _, v in torus])
    if len(sz) >= 2:
        rep.fits["szego_ratio"] = geometric_fit(szego_ns, [v - lp for v in sz])
    return rep
