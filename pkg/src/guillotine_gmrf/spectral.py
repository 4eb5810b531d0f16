"""Matrix symbols of the face weight, their Fourier coefficients and the free energy.

Conventions: the Fourier coefficient of order k of a function on the unit
circle is ``F_k(a) = (1/2pi) int a(e^{i theta}) e^{-i k theta} d theta``, the
coefficient of ``u^k``.  With ``C_{k,l}`` the coefficients of the inverse
symbol, the stationary covariance between an edge at x and an edge at
x + (k, l) is ``C_{k,l}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolated, QuadratureNotConverged
from .face_weight import FaceOperator

TOL_QUAD = 1e-12
M_START = 256
M_MAX = 1 << 14


def grid(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def _as_points(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)


def _stack(rows) -> np.ndarray:
    """Assemble a block matrix whose entries are broadcast arrays of matrices."""
    return np.concatenate([np.concatenate(r, axis=-1) for r in rows], axis=-2)


def _bcast(m, s):
    """Constant matrix ``m`` times scalar field ``s`` -> shape s.shape + m.shape."""
    return np.asarray(s)[..., None, None] * m


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------


def psi(Q: FaceOperator, z, w) -> np.ndarray:
    """Symbol of the planar precision; broadcasts over arrays of (z, w)."""
    z, w = np.broadcast_arrays(_as_points(z), _as_points(w))
    B = Q.block
    one = np.ones_like(z)
    p11 = _bcast(B("S", "S") + B("N", "N"), one) + _bcast(B("S", "N"), w) + _bcast(B("N", "S"), 1 / w)
    p22 = _bcast(B("W", "W") + B("E", "E"), one) + _bcast(B("W", "E"), z) + _bcast(B("E", "W"), 1 / z)
    p12 = (_bcast(B("S", "W"), one) + _bcast(B("S", "E"), z) + _bcast(B("N", "W"), 1 / w)
           + _bcast(B("N", "E"), z / w))
    p21 = (_bcast(B("W", "S"), one) + _bcast(B("E", "S"), 1 / z) + _bcast(B("W", "N"), w)
           + _bcast(B("E", "N"), w / z))
    return _stack([[p11, p12], [p21, p22]])


def phi_we(Q: FaceOperator, z) -> np.ndarray:
    """1D symbol of the vertical edges alone, Q_WW + Q_EE + z Q_WE + z^-1 Q_EW."""
    z = _as_points(z)
    B = Q.block
    return (_bcast(B("W", "W") + B("E", "E"), np.ones_like(z)) + _bcast(B("W", "E"), z)
            + _bcast(B("E", "W"), 1 / z))


def phi_sn(Q: FaceOperator, w) -> np.ndarray:
    """1D symbol of the horizontal edges alone, Q_SS + Q_NN + w Q_SN + w^-1 Q_NS."""
    w = _as_points(w)
    B = Q.block
    return (_bcast(B("S", "S") + B("N", "N"), np.ones_like(w)) + _bcast(B("S", "N"), w)
            + _bcast(B("N", "S"), 1 / w))


def psi_h(Q: FaceOperator, z) -> np.ndarray:
    """Horizontal transform on H1 (+) H1 (+) H2 (S, N, shared vertical)."""
    z = _as_points(z)
    B = Q.block
    one = np.ones_like(z)
    c = lambda a, b: _bcast(B(a, b), one)
    return _stack(
        [
            [c("S", "S"), c("S", "N"), c("S", "W") + _bcast(B("S", "E"), z)],
            [c("N", "S"), c("N", "N"), c("N", "W") + _bcast(B("N", "E"), z)],
            [c("W", "S") + _bcast(B("E", "S"), 1 / z), c("W", "N") + _bcast(B("E", "N"), 1 / z),
             phi_we(Q, z)],
        ]
    )


def psi_v(Q: FaceOperator, w) -> np.ndarray:
    """Vertical transform on H1 (+) H2 (+) H2 (shared horizontal, W, E)."""
    w = _as_points(w)
    B = Q.block
    one = np.ones_like(w)
    c = lambda a, b: _bcast(B(a, b), one)
    return _stack(
        [
            [phi_sn(Q, w), c("S", "W") + _bcast(B("N", "W"), 1 / w), c("S", "E") + _bcast(B("N", "E"), 1 / w)],
            [c("W", "S") + _bcast(B("W", "N"), w), c("W", "W"), c("W", "E")],
            [c("E", "S") + _bcast(B("E", "N"), w), c("E", "W"), c("E", "E")],
        ]
    )


def _min_eig(m: np.ndarray) -> float:
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    return float(np.min(np.linalg.eigvalsh(m)[..., 0]))


def torus_positivity_check(Q: FaceOperator, M: int = 64) -> bool:
    u = grid(M)
    z, w = np.meshgrid(u, u, indexing="ij")
    checks = (psi(Q, z, w), psi_h(Q, u), psi_v(Q, u), phi_we(Q, u), phi_sn(Q, u))
    return all(_min_eig(c) > 0 for c in checks)


GAP_RTOL = 1e-8


def spectral_gap(Q: FaceOperator, M: int = 64) -> float:
    """Smallest over largest eigenvalue of the symbol on the M x M grid."""
    u = grid(M)
    z, w = np.meshgrid(u, u, indexing="ij")
    m = psi(Q, z, w)
    ev = np.linalg.eigvalsh(0.5 * (m + np.conj(np.swapaxes(m, -1, -2))))
    return float(ev[..., 0].min() / ev[..., -1].max())


def require_spectral_gap(Q: FaceOperator, M: int = 64, rtol: float = GAP_RTOL) -> float:
    """Reject weights whose symbol nearly vanishes on the torus (massless regime)."""
    g = spectral_gap(Q, M)
    if g < rtol:
        raise AssumptionViolated(f"symbol nearly singular on the torus (relative gap {g:.3e})")
    return g


# ---------------------------------------------------------------------------
# Sampled functions on the unit circle
# ---------------------------------------------------------------------------


class SymbolFunction:
    """Matrix-valued function sampled at the M-th roots of unity."""

    def __init__(self, samples: np.ndarray, hermitian: bool = False):
        s = np.asarray(samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None, None]
        if s.ndim != 3:
            raise ValueError("samples must have shape (M, rows, cols)")
        self.samples = s
        self.hermitian = hermitian
        self._fft = None

    @classmethod
    def from_callable(cls, f, M: int = M_START, tol: float = TOL_QUAD, hermitian: bool = False,
                      max_M: int = M_MAX) -> "SymbolFunction":
        """Sample ``f`` on a grid, doubling until the Fourier coefficients settle."""
        cur = cls(f(grid(M)), hermitian)
        while True:
            nxt = cls(f(grid(2 * M)), hermitian)
            ka = np.arange(-M // 2 + 1, M // 2)
            err = np.max(np.abs(cur.coeffs_at(ka) - nxt.coeffs_at(ka)))
            if err < tol:
                return cur
            M *= 2
            if M > max_M:
                raise QuadratureNotConverged(f"coefficient change {err:.2e} at M={M}")
            cur = nxt

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def shape(self) -> tuple:
        return self.samples.shape[1:]

    @property
    def points(self) -> np.ndarray:
        return grid(self.M)

    def _spectrum(self) -> np.ndarray:
        if self._fft is None:
            self._fft = np.fft.fft(self.samples, axis=0) / self.M
        return self._fft

    def coeff(self, k: int) -> np.ndarray:
        return self._spectrum()[k % self.M]

    def coeffs_at(self, ks) -> np.ndarray:
        return self._spectrum()[np.asarray(ks) % self.M]

    def coeffs(self, kmax: int) -> np.ndarray:
        """Stack of F_k for k = -kmax..kmax (index k + kmax)."""
        if 2 * kmax + 1 > self.M:
            raise QuadratureNotConverged(f"grid of {self.M} points cannot resolve order {kmax}")
        return self.coeffs_at(np.arange(-kmax, kmax + 1))

    def is_even(self, tol: float = 1e-10, atol: float = 1e-13) -> bool:
        f = self._spectrum()
        flip = f[(-np.arange(self.M)) % self.M]
        return bool(np.max(np.abs(f - flip)) <= tol * np.max(np.abs(f)) + atol)

    # Pointwise algebra.
    def _wrap(self, s, hermitian=False):
        return SymbolFunction(s, hermitian)

    def __add__(self, other):
        return self._wrap(self.samples + _samples(other), self.hermitian and _herm(other))

    def __sub__(self, other):
        return self._wrap(self.samples - _samples(other), self.hermitian and _herm(other))

    def __neg__(self):
        return self._wrap(-self.samples, self.hermitian)

    def __matmul__(self, other):
        return self._wrap(self.samples @ _samples(other))

    def __mul__(self, c):
        return self._wrap(self.samples * c)

    __rmul__ = __mul__

    def inv(self):
        return self._wrap(np.linalg.inv(self.samples), self.hermitian)

    def adjoint(self):
        return self._wrap(np.conj(np.swapaxes(self.samples, 1, 2)), self.hermitian)

    def block(self, rows: slice, cols: slice):
        return self._wrap(self.samples[:, rows, cols])

    def __repr__(self):
        return f"SymbolFunction(M={self.M}, shape={self.shape})"


def _samples(x):
    return x.samples if isinstance(x, SymbolFunction) else np.asarray(x)


def _herm(x):
    return x.hermitian if isinstance(x, SymbolFunction) else False


def powers(u: np.ndarray, k: int) -> np.ndarray:
    return np.asarray(u, dtype=complex) ** k


# ---------------------------------------------------------------------------
# Fourier coefficients of the inverse symbol
# ---------------------------------------------------------------------------


@dataclass
class FourierTable:
    kmax: int
    lmax: int
    d1: int
    d2: int
    table: np.ndarray  # (2kmax+1, 2lmax+1, D, D)
    M: int

    def C(self, k: int, l: int) -> np.ndarray:
        return self.table[k + self.kmax, l + self.lmax]

    def block(self, i: int, j: int, k: int, l: int) -> np.ndarray:
        s = [slice(0, self.d1), slice(self.d1, self.d1 + self.d2)]
        return self.C(k, l)[s[i - 1], s[j - 1]]


def _inv_psi_grid(Q, M, N=None):
    N = M if N is None else N
    z, w = np.meshgrid(grid(M), grid(N), indexing="ij")
    return np.linalg.inv(psi(Q, z, w))


def fourier_table(Q: FaceOperator, kmax: int, lmax: int, M: int = M_START,
                  tol: float = TOL_QUAD) -> FourierTable:
    """C_{k,l} for |k| <= kmax, |l| <= lmax by trapezoidal quadrature with doubling."""
    M = max(M, 1 << int(np.ceil(np.log2(2 * max(kmax, lmax) + 2))))
    ks, ls = np.arange(-kmax, kmax + 1), np.arange(-lmax, lmax + 1)

    def table(m):
        f = np.fft.fft2(_inv_psi_grid(Q, m), axes=(0, 1)) / (m * m)
        return f[np.ix_(ks % m, ls % m)]

    cur = table(M)
    while True:
        nxt = table(2 * M)
        err = np.max(np.abs(cur - nxt))
        if err < tol:
            return FourierTable(kmax, lmax, Q.d1, Q.d2, cur, M)
        M *= 2
        if M > M_MAX // 8:
            raise QuadratureNotConverged(f"table change {err:.2e} at M={M}")
        cur = nxt


def partial_fourier(Q: FaceOperator, axis: str, k: int, M: int = M_START,
                    tol: float = TOL_QUAD) -> SymbolFunction:
    """Partial coefficient of the inverse symbol as a function on the M-grid.

    ``axis="z"`` gives C_{k,.}(w), the z^k coefficient as a function of w;
    ``axis="w"`` gives C_{.,k}(z).
    """
    return partial_fourier_stack(Q, axis, [k], M, tol)[0]


def partial_fourier_stack(Q: FaceOperator, axis: str, ks, M: int = M_START,
                          tol: float = TOL_QUAD) -> list:
    """Several partial coefficients sharing one quadrature."""
    if axis not in ("z", "w"):
        raise ValueError("axis must be 'z' or 'w'")
    ks = np.asarray(list(ks))
    N = max(M_START, 1 << int(np.ceil(np.log2(4 * np.max(np.abs(ks)) + 4))))
    # Integrated variable on axis 1.
    inner = 0 if axis == "z" else 1

    def coeffs(n):
        if inner == 0:
            inv = _inv_psi_grid(Q, n, M)  # (n, M)
            f = np.fft.fft(inv, axis=0) / n
            return f[ks % n]  # (len(ks), M, D, D)
        inv = _inv_psi_grid(Q, M, n)
        f = np.fft.fft(inv, axis=1) / n
        return np.moveaxis(f[:, ks % n], 1, 0)

    cur = coeffs(N)
    while True:
        nxt = coeffs(2 * N)
        err = np.max(np.abs(cur - nxt))
        if err < tol:
            break
        N *= 2
        if N > M_MAX:
            raise QuadratureNotConverged(f"partial coefficient change {err:.2e} at N={N}")
        cur = nxt
    return [SymbolFunction(c) for c in cur]


def free_energy(Q: FaceOperator, M: int = M_START, tol: float = TOL_QUAD) -> float:
    """(d1+d2) log 2pi minus the average of log det of the symbol over the torus."""
    D = Q.d1 + Q.d2

    def mean_logdet(m):
        u = grid(m)
        z, w = np.meshgrid(u, u, indexing="ij")
        sign, ld = np.linalg.slogdet(psi(Q, z, w))
        return float(np.mean(ld))

    cur = mean_logdet(M)
    while True:
        nxt = mean_logdet(2 * M)
        if abs(cur - nxt) < tol:
            return D * np.log(2 * np.pi) - nxt
        M *= 2
        if M > M_MAX // 8:
            raise QuadratureNotConverged(f"free energy change {abs(cur - nxt):.2e} at M={M}")
        cur = nxt


def logdet_samples(Q: FaceOperator, M: int) -> np.ndarray:
    """log det of the symbol on the M x M grid, rows indexed by theta1."""
    u = grid(M)
    z, w = np.meshgrid(u, u, indexing="ij")
    return np.linalg.slogdet(psi(Q, z, w))[1]


# ---------------------------------------------------------------------------
# Spectral curve slices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SliceRoot:
    root: complex
    kernel: np.ndarray


def spectral_slice(Q: FaceOperator, axis: str, u: complex, root_rtol: float = 1e-6,
                   kernel_rtol: float = 1e-6) -> list:
    """Zeros in C* of det psi(u, .) (axis="w") or det psi(., u) (axis="z").

    The Laurent determinant is interpolated by FFT on 4D+1 points,
    ``D = d1 + d2``, and its roots taken as companion eigenvalues.
    """
    D = Q.d1 + Q.d2
    n = 4 * D + 1
    x = grid(n)
    ev = (lambda y: psi(Q, u, y)) if axis == "w" else (lambda y: psi(Q, y, u))
    vals = np.linalg.det(ev(x)) * x ** D
    c = np.fft.fft(vals) / n  # coefficients of x^0..x^{n-1}
    c = c[: 2 * D + 1]
    scale = np.max(np.abs(c))
    if scale == 0:
        raise AssumptionViolated("determinant vanishes identically")
    nz = np.nonzero(np.abs(c) > 1e-13 * scale)[0]
    c = c[nz[0]: nz[-1] + 1]  # roots at 0 are not in C*; top drop removes roots at infinity
    roots = np.roots(c[::-1]) if len(c) > 1 else np.array([], dtype=complex)
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < root_rtol * max(abs(roots[i]), abs(roots[j])):
                raise AssumptionViolated(f"near-multiple root {roots[i]:.6g}")
    out = []
    for r in roots:
        m = ev(np.array([r]))[0]
        _, s, vh = np.linalg.svd(m)
        if len(s) > 1 and s[-2] < kernel_rtol * s[0]:
            raise AssumptionViolated(f"kernel of dimension > 1 at root {r:.6g}")
        out.append(SliceRoot(complex(r), vh[-1].conj()))
    out.sort(key=lambda sr: (abs(sr.root), np.angle(sr.root)))
    return out
