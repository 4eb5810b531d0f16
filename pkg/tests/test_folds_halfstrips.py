import numpy as np
import pytest

from guillotine_gmrf.errors import NotDihedral, NotEven, ShapeMismatch, TruncationExceeded
from guillotine_gmrf.face_weight import scalar_dihedral
from guillotine_gmrf.folds_halfstrips import (fold, fold_plus, glue_halfstrip_rect, glue_halfstrips_vertical,
                                              glue_opposite_halfstrips, grid_for, halfplane_from_halfstrip,
                                              halfstrip_fixed_point, halfstrip_residuals, hankel, shift_d,
                                              toeplitz, transverse_chain, u_transverse)
from guillotine_gmrf.guill_rect import surface_power
from guillotine_gmrf.linalg_core import schur_indices
from guillotine_gmrf.one_dim import invariant_boundaries, w_via_fourier
from guillotine_gmrf.spectral import SymbolFunction, grid
from guillotine_gmrf.strips_halfplanes import halfplane_symbol, strip_symbol

from conftest import REF, random_face

N = 48
M = grid_for(N)


@pytest.fixture(scope="module")
def hs_ref():
    Q = scalar_dihedral(*REF)
    return {side: halfstrip_fixed_point(Q, side, N) for side in "WESN"}


def sym(f, M=256):
    u = grid(M)
    return SymbolFunction(np.asarray(f(u))[:, None, None] * np.ones((1, 1, 1)))


@pytest.mark.parametrize("side", "WESN")
def test_constant_symbol(side):
    c = sym(lambda u: 2.5 + 0 * u)
    assert np.allclose(toeplitz(c, side, 6).matrix, 2.5 * np.eye(6))
    assert np.allclose(hankel(c, side, 6).matrix, 0)
    assert np.allclose(fold(c, side, 6).matrix, 2.5 * np.eye(6))
    assert np.allclose(fold_plus(c, side, 6).matrix, 2.5 * np.eye(6))


def test_single_mode_is_shift():
    t = toeplitz(sym(lambda u: u), "W", 5).matrix
    assert np.allclose(t, np.eye(5, k=1))
    t = toeplitz(sym(lambda u: 1 / u), "W", 5).matrix
    assert np.allclose(t, np.eye(5, k=-1))
    assert np.allclose(toeplitz(sym(lambda u: u), "E", 5).matrix, np.eye(5, k=-1))


def test_coefficient_layout():
    # F_k = 1/(k+10) for k in [-3, 3]: entries F_{j-i} (W) and F_{-(i+j+1)}
    u = grid(64)
    f = sum(u ** k / (k + 10) for k in range(-3, 4))
    s = SymbolFunction(f[:, None, None])
    F = lambda k: 1 / (k + 10) if abs(k) <= 3 else 0
    t, h = toeplitz(s, "W", 4).matrix, hankel(s, "W", 4).matrix
    te, he = toeplitz(s, "E", 4).matrix, hankel(s, "E", 4).matrix
    for i in range(4):
        for j in range(4):
            assert np.isclose(t[i, j], F(j - i)) and np.isclose(h[i, j], F(-(i + j + 1)))
            assert np.isclose(te[i, j], F(i - j)) and np.isclose(he[i, j], F(i + j + 1))


def test_symmetry_inheritance(Qref):
    s = strip_symbol(Qref, "WE", M)
    for a in "SN":
        for b in "SN":
            p = s.part(a, b)
            t, h = toeplitz(p, "W", 12).matrix, hankel(p, "W", 12).matrix
            if a == b:
                assert np.max(np.abs(t - t.conj().T)) < 1e-12
                assert np.max(np.abs(h - h.conj().T)) < 1e-12
    rq = random_face(np.random.default_rng(5))
    t = toeplitz(strip_symbol(rq, "WE", M).part("S", "S"), "S", 12).matrix
    assert np.max(np.abs(t - t.conj().T)) < 1e-12


def test_fold_needs_even_symbol():
    with pytest.raises(NotEven):
        fold(sym(lambda u: 2 + u), "W", 4)
    fold(sym(lambda u: 2 + u), "W", 4, require_even=False)


def test_fold_multiplicative(Qref):
    a = strip_symbol(Qref, "WE", M).part("S", "S")
    b = strip_symbol(scalar_dihedral(1.5, -0.3, 0.2), "WE", M).part("S", "N")
    ab = a @ b
    m = 8
    lhs = fold(ab, "W", N).leading(m)
    rhs = (fold(a, "W", N).matrix @ fold(b, "W", N).matrix)[:m, :m]
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_fold_of_identity_strip(Qid):
    s = strip_symbol(Qid, "WE", M)
    assert np.allclose(fold(s.part("S", "S"), "W", 10).matrix, np.eye(10))


def test_fold_positive(Qref):
    f = fold(strip_symbol(Qref, "WE", M).part("S", "S"), "W", N).matrix
    assert np.linalg.eigvalsh(f)[0] > 0


def test_transverse_zero_coupling():
    Q = scalar_dihedral(2.0, -0.5, 0.0)
    assert np.allclose(u_transverse(Q, "W", 10), 0)


def test_transverse_decay(Qref):
    U = u_transverse(Qref, "W", 30)
    WL = w_via_fourier(transverse_chain(Qref, "W")).WL
    rho = float(np.max(np.abs(np.linalg.eigvals(WL))))
    ratios = np.abs(U[1:, 0] / U[:-1, 0])
    assert np.allclose(ratios, rho, atol=1e-9)
    # recursion: next row = row times W^L, first row = U (I + W^L)
    assert np.max(np.abs(U[1:] - U[:-1] @ WL)) < 1e-10
    assert np.allclose(U[0], -0.25 * (1 + WL[0, 0]))


def test_identity_fixed_point(Qid):
    H = halfstrip_fixed_point(Qid, "W", 12)
    assert np.allclose(H.lines, np.eye(24)) and np.allclose(H.cross, 0) and np.allclose(H.cut, 1)


def test_non_dihedral_rejected(rng):
    with pytest.raises(NotDihedral):
        halfstrip_fixed_point(random_face(rng), "W", 12)


@pytest.mark.parametrize("side", "WESN")
def test_fixed_point_residuals(hs_ref, Qref, side):
    r = halfstrip_residuals(hs_ref[side], Qref)
    assert set(r) == {"cut", "lines", "transverse"}
    assert max(r.values()) < 1e-7


def test_perturbed_fixed_point_fails(hs_ref, Qref):
    r = halfstrip_residuals(hs_ref["W"].perturbed(1e-2), Qref)
    assert r["lines"] > 1e-3


def test_cut_is_invariant_boundary(hs_ref, Qref):
    GL, _ = invariant_boundaries(transverse_chain(Qref, "W"))
    assert np.max(np.abs(hs_ref["W"].cut - GL)) < 1e-12


def test_halfstrip_spectrum(hs_ref):
    for H in hs_ref.values():
        m = H.matrix
        assert np.max(np.abs(m - m.conj().T)) < 1e-14
        assert H.min_eigenvalue() > 0.1


def test_schur_over_cut_is_fold_plus(hs_ref, Qref):
    H = hs_ref["W"]
    nd = N
    s = schur_indices(H.matrix, np.arange(2 * nd), H.cut_indices)
    st = strip_symbol(Qref, "WE", M)
    fp = np.block([[fold_plus(st.part(a, b), "W", N).matrix for b in "SN"] for a in "SN"])
    lead = np.r_[0:N - 8, nd:nd + N - 8]
    assert np.max(np.abs(s[np.ix_(lead, lead)] - fp[np.ix_(lead, lead)])) < 1e-8


def test_intertwining(Qref):
    U = u_transverse(Qref, "W", N)
    WL = w_via_fourier(transverse_chain(Qref, "W")).WL
    T = toeplitz(SymbolFunction(grid(M)[:, None, None] * np.ones((1, 1, 1))), "W", N).matrix
    assert np.max(np.abs((U @ WL)[:N - 1] - (T @ U)[:N - 1])) < 1e-9


def test_shift_identity_and_composition():
    n, d = 6, 2
    assert np.array_equal(shift_d(n, d, 0, "W"), np.eye(n * d))
    rng = np.random.default_rng(1)
    x = rng.standard_normal(n * d)
    sa, sb = rng.standard_normal(d), rng.standard_normal(d)
    D1, D2 = shift_d(n, d, 1, "W"), shift_d(n, d, 2, "W")
    # West: segments are listed left to right, the later one lies further East
    assert np.array_equal(D1 @ np.r_[D1 @ np.r_[x, sa], sb], D2 @ np.r_[x, sa, sb])
    D1, D2 = shift_d(n, d, 1, "E"), shift_d(n, d, 2, "E")
    assert np.array_equal(D1 @ np.r_[D1 @ np.r_[x, sb], sa], D2 @ np.r_[x, sa, sb])
    with pytest.raises(TruncationExceeded):
        shift_d(n, d, 7, "W")


def test_shift_is_toeplitz_of_conjugate_mode():
    n = 8
    D = shift_d(n, 1, 1, "W")[:, :n]
    T = toeplitz(sym(lambda u: 1 / u, 64), "W", n).matrix
    assert np.allclose(D, T)


def test_glue_identity_strips(Qid):
    H = halfstrip_fixed_point(Qid, "W", 10)
    G = glue_halfstrips_vertical(H, H)
    assert G.width == 2
    assert np.allclose(G.lines, np.eye(20)) and np.allclose(G.cross, 0) and np.allclose(G.cut, np.eye(2))
    assert np.allclose(glue_halfstrip_rect(H, Qid).matrix, H.matrix)


def test_vertical_glue_is_fixed_point_of_double_face(hs_ref, Qref):
    G = glue_halfstrips_vertical(hs_ref["W"], hs_ref["W"])
    assert np.max(np.abs(G.matrix - G.matrix.conj().T)) < 1e-14
    assert G.min_eigenvalue() > 0
    R = glue_halfstrip_rect(G, surface_power(Qref, 1, 2))
    lead = G.leading(N - 8)
    assert np.max(np.abs(R.matrix[np.ix_(lead, lead)] - G.matrix[np.ix_(lead, lead)])) < 1e-6


def test_rect_glue_associative(hs_ref, Qref):
    H = hs_ref["W"]
    twice = glue_halfstrip_rect(glue_halfstrip_rect(H, Qref), Qref)
    once = glue_halfstrip_rect(H, surface_power(Qref, 2, 1))
    assert np.max(np.abs(twice.matrix - once.matrix)) < 1e-8


def test_rect_glue_errors(hs_ref, Qref):
    with pytest.raises(ShapeMismatch):
        glue_halfstrip_rect(hs_ref["W"], surface_power(Qref, 1, 2))
    with pytest.raises(TruncationExceeded):
        glue_halfstrip_rect(hs_ref["W"], surface_power(Qref, N - 7, 1))
    with pytest.raises(ShapeMismatch):
        glue_halfstrips_vertical(hs_ref["W"], hs_ref["E"])


def test_opposite_identity(Qid):
    H, E = halfstrip_fixed_point(Qid, "W", 16), halfstrip_fixed_point(Qid, "E", 16)
    assert glue_opposite_halfstrips(H, E, Q=Qid).residual < 1e-14


def test_opposite_reference(hs_ref, Qref):
    g = glue_opposite_halfstrips(hs_ref["W"], hs_ref["E"], Q=Qref)
    assert g.residual < 1e-6


@pytest.mark.parametrize("n", [16, 24, 32])
def test_opposite_smaller_truncations(Qref, n):
    H, E = halfstrip_fixed_point(Qref, "W", n), halfstrip_fixed_point(Qref, "E", n)
    assert glue_opposite_halfstrips(H, E, Q=Qref).residual < 1e-6


def test_cross_cut_coefficients(hs_ref, Qref):
    # strip coefficients between West and East sites equal -U^W K^-1 (U^E)*
    W, E = hs_ref["W"], hs_ref["E"]
    K = W.cut + E.cut
    st = strip_symbol(Qref, "WE", M).symbol
    worst = 0.0
    for i in range(7):
        for j in range(7):
            x, y = -1 - i, j
            for a in range(2):
                for b in range(2):
                    lhs = st.coeff(y - x)[a, b]
                    rhs = -(W.cross[a * N + i] * np.conj(E.cross[b * N + j]) / K)[0, 0]
                    worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-8


def test_transverse_representation(hs_ref, Qref):
    g = halfplane_from_halfstrip(hs_ref["W"], M).samples
    ref = halfplane_symbol(Qref, "W", M).symbol.samples
    assert np.max(np.abs(g - ref)) < 1e-7
