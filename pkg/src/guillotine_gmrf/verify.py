"""Executable invariant checks, grouped into suites.

Each suite takes a face weight and a :class:`VerifyOptions` and returns a
list of :class:`Check` records.  Checks whose hypotheses do not hold for
the given weight (non-dihedral, degenerate modes) are reported as skipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corners_boundary import (assemble_boundary_weight, corner_adjoint_coupling, corner_fixed_point,
                               corner_residuals, covariance_check, glue_corners_to_halfplane,
                               restriction_consistency_check)
from .errors import DegenerateMode, GuillotineError, NotDihedral
from .face_weight import dihedral_params, is_dihedral, oracle_surface_power
from .folds_halfstrips import (_eliminate, fold, fold_plus, glue_opposite_halfstrips, grid_for,
                               halfplane_from_halfstrip, halfstrip_fixed_point, halfstrip_residuals,
                               hankel, toeplitz, u_transverse)
from .guill_rect import glue_sn, glue_we, surface_power
from .eigenvalue import (lambda_1d_we, lambda_1d_we_quadrature, lambda_prime_integral, lambda_prime_szego,
                         torus_log_z, torus_log_z_dense)
from .harmonic import HarmonicField, sine_mode_solution, solve_harmonic, stokes_surface_power
from .one_dim import (EdgeCoupling, inverse_symbol, invariant_boundaries, iterate_left, schur_1d_left,
                      w_operators, w_via_fourier)
from .spectral import (SymbolFunction, fourier_table, free_energy, grid, partial_fourier, psi,
                       torus_positivity_check)
from .strips_halfplanes import (HalfPlaneSymbol, cylinder_block, cylinder_form, halfplane_symbol, strip_samples, strip_schur,
                                strip_symbol, w_hat_powers)

SUITES = ("rect", "spectral", "onedim", "strips", "halfstrip", "corner", "boundary", "eigen")


@dataclass
class VerifyOptions:
    p: int = 3
    q: int = 3
    n: int = 48
    M: int = 256
    perturb: float = 0.0
    seed: int = 0


@dataclass
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    status: str = ""  # pass | fail | skip
    note: str = ""

    def __post_init__(self):
        if not self.status:
            ok = np.isfinite(self.value) and self.value < self.threshold
            self.status = "pass" if ok else "fail"


def _skip(suite, name, reason) -> Check:
    return Check(suite, name, float("nan"), float("nan"), "skip", reason)


def _maxabs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _rel(a, b) -> float:
    return _maxabs(a, b) / max(float(np.max(np.abs(b))), 1e-300)


def _scalar_triple(Q):
    if Q.d1 != 1 or Q.d2 != 1 or not is_dihedral(Q):
        return None
    prm = dihedral_params(Q)
    return float(prm.T.real[0, 0]), float(prm.A.real[0, 0]), float(prm.U.real[0, 0])


# ---------------------------------------------------------------------------


def suite_rect(Q, o: VerifyOptions) -> list:
    s = "rect"
    out = []
    form = logs = stokes = 0.0
    for p in range(1, 5):
        for q in range(1, 5):
            a = surface_power(Q, p, q)
            ref, log_alpha = oracle_surface_power(Q, p, q)
            form = max(form, _rel(a.form.matrix, ref.matrix))
            logs = max(logs, abs(a.log_scale - log_alpha))
            stokes = max(stokes, _rel(stokes_surface_power(Q, p, q).matrix, ref.matrix))
    out.append(Check(s, "surface_power_vs_oracle", form, 1e-9))
    out.append(Check(s, "log_scale_vs_oracle", logs, 1e-8))
    out.append(Check(s, "stokes_vs_oracle", stokes, 1e-8))

    a, b, c = (surface_power(Q, 1, 2), surface_power(Q, 2, 2), surface_power(Q, 1, 2))
    l, r = glue_we(glue_we(a, b), c), glue_we(a, glue_we(b, c))
    out.append(Check(s, "horizontal_associativity", _maxabs(l.form.matrix, r.form.matrix)
                     + abs(l.log_scale - r.log_scale), 1e-10))
    x, y = surface_power(Q, 2, 1), surface_power(Q, 2, 2)
    l, r = glue_sn(glue_sn(x, y), x), glue_sn(x, glue_sn(y, x))
    out.append(Check(s, "vertical_associativity", _maxabs(l.form.matrix, r.form.matrix)
                     + abs(l.log_scale - r.log_scale), 1e-10))
    f = surface_power(Q, 1, 1)
    l = glue_sn(glue_we(f, f), glue_we(f, f))
    r = glue_we(glue_sn(f, f), glue_sn(f, f))
    out.append(Check(s, "interchange", _maxabs(l.form.matrix, r.form.matrix) + abs(l.log_scale - r.log_scale),
                     1e-10))

    rng = np.random.default_rng(o.seed)
    p, q = 4, 3
    nb = 2 * p * Q.d1 + 2 * q * Q.d2
    field = solve_harmonic(Q, p, q, rng.standard_normal((nb, 5)))
    res = 0.0
    for j in range(5):
        res = max(res, HarmonicField(field.ix, field.values[:, j], field._precision).residual())
    out.append(Check(s, "harmonic_interior_residual", res, 1e-10))

    triple = _scalar_triple(Q)
    if triple is None:
        out.append(_skip(s, "sine_modes_vs_dense", "needs a scalar dihedral weight"))
        return out
    try:
        err = 0.0
        for p in range(1, 9):
            for q in range(1, 9):
                ix_sizes = {"S": p, "N": p, "W": q, "E": q}
                for side in "SNWE":
                    vals = rng.standard_normal(ix_sizes[side])
                    hf = sine_mode_solution(*triple, p, q, side, vals)
                    drive = np.zeros(2 * p + 2 * q)
                    off = {"S": 0, "N": p, "W": 2 * p, "E": 2 * p + q}[side]
                    drive[off:off + len(vals)] = vals
                    ref = solve_harmonic(Q, p, q, drive)
                    err = max(err, _maxabs(hf.values, ref.values))
        out.append(Check(s, "sine_modes_vs_dense", err, 1e-8))
    except DegenerateMode as exc:
        out.append(_skip(s, "sine_modes_vs_dense", str(exc)))
    return out


def suite_spectral(Q, o: VerifyOptions) -> list:
    s = "spectral"
    out = [Check(s, "torus_positivity", 0.0 if torus_positivity_check(Q) else 1.0, 0.5)]
    K = 6
    ft = fourier_table(Q, K + 1, K + 1, o.M)
    # Stencil of the symbol: coefficient of z^a w^b for a, b in {-1, 0, 1}.
    u3 = grid(3)
    z, w = np.meshgrid(u3, u3, indexing="ij")
    st = np.fft.fft2(psi(Q, z, w), axes=(0, 1)) / 9
    D = Q.d1 + Q.d2
    res = 0.0
    for k in range(-K, K + 1):
        for l in range(-K, K + 1):
            acc = -np.eye(D) if (k, l) == (0, 0) else np.zeros((D, D))
            for a in (-1, 0, 1):
                for b in (-1, 0, 1):
                    acc = acc + st[a % 3, b % 3] @ ft.C(k - a, l - b)
            res = max(res, float(np.max(np.abs(acc))))
    out.append(Check(s, "difference_equation", res, 1e-10))

    # The H1 block of the inverse symbol is the inverse of the 1D symbol of the strip.
    u = grid(16)
    strip = strip_samples(Q, "WE", u)
    d1 = Q.d1
    err = 0.0
    for wv in np.exp(1j * np.linspace(0.1, 3.0, 5)):
        inv11 = np.linalg.inv(psi(Q, u, wv))[:, :d1, :d1]
        phi = (strip[:, :d1, :d1] + strip[:, d1:, d1:] + wv * strip[:, :d1, d1:] + strip[:, d1:, :d1] / wv)
        err = max(err, _maxabs(inv11, np.linalg.inv(phi)))
    out.append(Check(s, "inverse_block_vs_strip", err, 1e-10))
    return out


def suite_onedim(Q, o: VerifyOptions) -> list:
    s = "onedim"
    out = []
    K = EdgeCoupling(Q.blocks("WE", "WE"))
    try:
        Wr = w_operators(K)
    except GuillotineError as exc:
        return [_skip(s, "roots", str(exc))]
    Wf = w_via_fourier(K, o.M)
    out.append(Check(s, "W_roots_vs_fourier", max(_maxabs(Wr.WL, Wf.WL), _maxabs(Wr.WR, Wf.WR)), 1e-9))
    out.append(Check(s, "spectral_radius_below_one", Wf.spectral_radius, 1.0))
    GL0, GR = invariant_boundaries(K, M=o.M)
    GL = GL0 + o.perturb * np.eye(K.d)
    out.append(Check(s, "GL_fixed_point", _maxabs(schur_1d_left(GL, K), GL), 1e-10))
    inv = inverse_symbol(K, o.M)
    out.append(Check(s, "GL_plus_GR", _maxabs(GL + GR, np.linalg.inv(inv.coeff(0))), 1e-10))
    res = 0.0
    for m in range(-6, 7):
        acc = (K.LL + K.RR) @ inv.coeff(m) + K.LR @ inv.coeff(m - 1) + K.RL @ inv.coeff(m + 1)
        res = max(res, _maxabs(acc, np.eye(K.d) if m == 0 else 0))
    out.append(Check(s, "fourier_recursion", res, 1e-9))
    G_it, its = iterate_left(K)
    out.append(Check(s, "iteration_converges", _maxabs(G_it, GL0), 1e-9,
                     note=f"{its} iterations"))
    return out


def suite_strips(Q, o: VerifyOptions) -> list:
    s = "strips"
    out = []
    M = o.M
    tall = surface_power(Q, 1, 2).form
    a = strip_symbol(Q, "WE", M)
    err = _maxabs(strip_symbol(tall, "WE", M).symbol.samples, strip_schur(a, a).symbol.samples)
    out.append(Check(s, "strip_morphism", err, 1e-10))
    for p in (2, 3, 5):
        cf = cylinder_form(Q, p)
        ld_modes = sum(np.linalg.slogdet(cylinder_block(Q, p, k))[1] for k in range(p))
        out.append(Check(s, f"cylinder_logdet_p{p}", abs(np.linalg.slogdet(cf)[1] - ld_modes), 1e-10))
    for side in "SNWE":
        try:
            hp = halfplane_symbol(Q, side, M)
        except GuillotineError as exc:
            out.append(_skip(s, f"halfplane_{side}", str(exc)))
            continue
        if o.perturb:
            g = hp.symbol.samples + o.perturb * np.eye(hp.symbol.shape[0])
            hp = HalfPlaneSymbol(side, SymbolFunction(g, hermitian=True), hp.w, hp.strip, hp.asymmetry)
        out.append(Check(s, f"halfplane_{side}_fixed_point", hp.residual(), 1e-9))
        out.append(Check(s, f"halfplane_{side}_hermitian", hp.asymmetry, 1e-10))
    if is_dihedral(Q):
        n = o.n
        H = halfstrip_fixed_point(Q, "W", n, M)
        ref = halfplane_symbol(Q, "W", grid_for(n, M)).symbol.samples
        g = halfplane_from_halfstrip(H, grid_for(n, M)).samples
        out.append(Check(s, "transverse_representation", _maxabs(g, ref), 1e-7))
    else:
        out.append(_skip(s, "transverse_representation", "needs a dihedral weight"))
    return out


def suite_halfstrip(Q, o: VerifyOptions) -> list:
    s = "halfstrip"
    if not is_dihedral(Q):
        return [_skip(s, "all", "needs a dihedral weight")]
    n, M = o.n, grid_for(o.n, o.M)
    out = []
    m = n - 8
    for side in "WESN":
        H = halfstrip_fixed_point(Q, side, n, M)
        if o.perturb:
            H = H.perturbed(o.perturb)
        for k, v in halfstrip_residuals(H, Q).items():
            out.append(Check(s, f"{side}_{k}", v, 1e-7))
    H = halfstrip_fixed_point(Q, "W", n, M)
    out.append(Check(s, "min_eigenvalue_positive", -H.min_eigenvalue(), 0.0,
                     note=f"min eigenvalue {H.min_eigenvalue():.6g}"))
    st = strip_symbol(Q, "WE", M)
    nd = n * Q.d1
    sch = _eliminate(H.matrix, np.arange(2 * nd), H.cut_indices)
    fp = np.block([[fold_plus(st.part(a, b), "W", n).matrix for b in "SN"] for a in "SN"])
    lead = np.r_[0:m * Q.d1, nd:nd + m * Q.d1]
    out.append(Check(s, "schur_over_cut_is_fold_plus", _maxabs(sch[np.ix_(lead, lead)], fp[np.ix_(lead, lead)]),
                     1e-8))
    U = u_transverse(Q, "W", n, M=M)
    WL = w_via_fourier(EdgeCoupling(Q.blocks("WE", "WE")), M).WL
    shift = toeplitz(SymbolFunction(grid(M)[:, None, None] * np.eye(Q.d1)), "W", n).matrix
    r = slice(0, (n - 1) * Q.d1)
    out.append(Check(s, "intertwining", _maxabs((U @ WL)[r], (shift @ U)[r]), 1e-9))
    E = halfstrip_fixed_point(Q, "E", n, M)
    g = glue_opposite_halfstrips(H, E, Q=Q, M=M)
    out.append(Check(s, "opposite_gluing", g.residual, 1e-6))
    return out


def suite_corner(Q, o: VerifyOptions) -> list:
    s = "corner"
    if not is_dihedral(Q):
        return [_skip(s, "all", "needs a dihedral weight")]
    n, M = o.n, grid_for(o.n, o.M)
    out = []
    hs = {side: halfstrip_fixed_point(Q, side, n, M) for side in "WESN"}
    C = {}
    for c in ("SW", "SE", "NW", "NE"):
        C[c] = corner_fixed_point(Q, c, n, M)
        F = C[c].perturbed(o.perturb) if o.perturb else C[c]
        worst = max(corner_residuals(F, hs[c[0]], hs[c[1]]).values())
        out.append(Check(s, f"{c}_fixed_point", worst, 1e-6))
    V = C["SW"].V
    out.append(Check(s, "V_adjoint", _maxabs(V, corner_adjoint_coupling(Q, n, M).conj().T), 1e-8))
    for a, b in (("SW", "SE"), ("SW", "NW"), ("NW", "NE"), ("SE", "NE")):
        out.append(Check(s, f"glue_{a}_{b}", glue_corners_to_halfplane(C[a], C[b], Q=Q, M=M).residual, 1e-5))
    hp_s = halfplane_symbol(Q, "S", M)
    hp_w = halfplane_symbol(Q, "W", M)
    out.append(Check(s, "diagonal_blocks_are_folds",
                     max(_maxabs(C["SW"].hh, fold(hp_s.symbol, "W", n).matrix),
                         _maxabs(C["SW"].vv, fold(hp_w.symbol, "S", n).matrix)), 1e-10))
    m = slice(0, (n - 8) * Q.d1)
    Wp = w_hat_powers(Q, "S", 1, M)
    shift = toeplitz(SymbolFunction(grid(M)[:, None, None] * np.eye(Q.d1)), "W", n).matrix
    lhs = V @ fold(Wp[1], "W", n).matrix
    out.append(Check(s, "intertwining", _maxabs(lhs[m, m], (shift @ V)[m, m]), 1e-8))
    c0 = partial_fourier(Q, "z", 0, M)
    c22 = SymbolFunction(c0.samples[:, Q.d1:, Q.d1:])
    hk = -V @ fold(c22, "S", n).matrix @ V.conj().T
    out.append(Check(s, "hankel_identity", _maxabs(hk[m, m], hankel(hp_s.symbol, "W", n).matrix[m, m]), 1e-7))
    return out


def suite_boundary(Q, o: VerifyOptions) -> list:
    s = "boundary"
    if not is_dihedral(Q):
        return [_skip(s, "all", "needs a dihedral weight")]
    n, M = o.n, o.M
    out = []
    hs = halfstrip_fixed_point(Q, "W", n, M)
    if o.perturb:
        hs = hs.perturbed(o.perturb)
    bw = assemble_boundary_weight(Q, o.p, o.q, n, M, halfstrip=hs)
    ev = float(np.linalg.eigvalsh(bw.matrix)[0])
    out.append(Check(s, "positive_definite", -ev, 0.0, note=f"min eigenvalue {ev:.6g}"))
    out.append(Check(s, "covariance", covariance_check(Q, o.p, o.q, n, M, bw=bw).residual, 1e-5))
    if max(4, o.p, o.q) <= n - 8:
        outer = assemble_boundary_weight(Q, 4, 4, n, M, halfstrip=hs)
        inner = assemble_boundary_weight(Q, 2, 2, n, M, halfstrip=hs)
        r = restriction_consistency_check(Q, (4, 4), (2, 2), n, M, outer_bw=outer, inner_bw=inner)
        out.append(Check(s, "restriction_4x4_to_2x2", r, 1e-5))
    return out


def suite_eigen(Q, o: VerifyOptions) -> list:
    s = "eigen"
    f = free_energy(Q, o.M)
    l1 = lambda_1d_we(Q, o.M)
    lp = lambda_prime_integral(Q, o.M)
    out = [
        Check(s, "factorization", abs(l1 + lp - f), 1e-9),
        Check(s, "1d_invariant_vs_quadrature", abs(l1 - lambda_1d_we_quadrature(Q, o.M)), 1e-10),
        Check(s, "torus_dense_vs_modes", abs(torus_log_z(Q, 2, 2) - torus_log_z_dense(Q, 2, 2)), 1e-10),
        Check(s, "torus_64", abs(torus_log_z(Q, 64, 64) / 64**2 - f), 1e-3),
    ]
    sz = lambda_prime_szego(Q, [64], o.M)[0]
    out.append(Check(s, "szego_64", abs(sz - lp), 1e-4))
    return out


SUITE_FUNCS = {
    "rect": suite_rect, "spectral": suite_spectral, "onedim": suite_onedim, "strips": suite_strips,
    "halfstrip": suite_halfstrip, "corner": suite_corner, "boundary": suite_boundary, "eigen": suite_eigen,
}


def run_suites(Q, names, options: VerifyOptions | None = None) -> list:
    options = VerifyOptions() if options is None else options
    out = []
    for name in names:
        try:
            out.extend(SUITE_FUNCS[name](Q, options))
        except NotDihedral as exc:
            out.append(_skip(name, "all", str(exc)))
    return out
