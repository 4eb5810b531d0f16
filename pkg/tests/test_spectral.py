import numpy as np
import pytest
from hypothesis import given, settings

from guillotine_gmrf.errors import AssumptionViolated
from guillotine_gmrf.face_weight import scalar_dihedral
from guillotine_gmrf.spectral import (SymbolFunction, fourier_table, free_energy, grid, logdet_samples,
                                      partial_fourier, phi_sn, phi_we, psi, psi_h, psi_v, require_spectral_gap,
                                      spectral_gap, spectral_slice, torus_positivity_check)
from guillotine_gmrf.strips_halfplanes import strip_samples

from conftest import REF, random_face, seeds

REF_LOG_LAMBDA = 0.956982468046317


def random_points(rng, n):
    return (rng.uniform(0.5, 2, n) * np.exp(2j * np.pi * rng.uniform(size=n)),
            rng.uniform(0.5, 2, n) * np.exp(2j * np.pi * rng.uniform(size=n)))


def test_identity_symbol(Qid, rng):
    z, w = random_points(rng, 5)
    assert np.allclose(psi(Qid, z, w), 2 * np.eye(2))
    assert np.allclose(psi_h(Qid, z), np.diag([1, 1, 2]))
    assert np.allclose(psi_v(Qid, w), np.diag([2, 1, 1]))


def test_reference_symbol_at_one(Qref):
    assert np.allclose(psi(Qref, 1, 1), [[3, -1], [-1, 3]])


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_reflection_symmetry(seed):
    rng = np.random.default_rng(seed)
    Q = random_face(rng, 1, 2)
    z, w = random_points(rng, 20)
    lhs = np.conj(np.swapaxes(psi(Q, z, w), -1, -2))
    assert np.max(np.abs(lhs - psi(Q, 1 / np.conj(z), 1 / np.conj(w)))) < 1e-12
    lh = np.conj(np.swapaxes(psi_h(Q, z), -1, -2))
    assert np.max(np.abs(lh - psi_h(Q, 1 / np.conj(z)))) < 1e-12
    lv = np.conj(np.swapaxes(psi_v(Q, w), -1, -2))
    assert np.max(np.abs(lv - psi_v(Q, 1 / np.conj(w)))) < 1e-12


def test_psi_h_schur_is_strip(rng):
    Q = random_face(rng, 2, 1)
    u = grid(16)
    m = psi_h(Q, u)
    a, b, c, d = m[:, :4, :4], m[:, :4, 4:], m[:, 4:, :4], m[:, 4:, 4:]
    assert np.max(np.abs(a - b @ np.linalg.solve(d, c) - strip_samples(Q, "WE", u))) < 1e-12


def test_positivity(Qid, Qref):
    assert torus_positivity_check(Qid)
    assert torus_positivity_check(Qref)
    u = grid(64)
    z, w = np.meshgrid(u, u, indexing="ij")
    assert np.linalg.eigvalsh(psi(Qref, z, w))[..., 0].min() > 0
    assert np.linalg.eigvalsh(phi_we(Qref, u))[..., 0].min() > 0
    assert np.linalg.eigvalsh(phi_sn(Qref, u))[..., 0].min() > 0


def test_spectral_gap_guard():
    assert spectral_gap(scalar_dihedral(1, 0, 0)) == 1.0
    with pytest.raises(AssumptionViolated):
        require_spectral_gap(scalar_dihedral(1, -0.5, -0.25 + 1e-10))


def test_identity_table(Qid):
    t = fourier_table(Qid, 2, 2)
    for k in range(-2, 3):
        for l in range(-2, 3):
            expected = 0.5 * np.eye(2) if k == l == 0 else np.zeros((2, 2))
            assert np.allclose(t.C(k, l), expected, atol=1e-14)


def test_table_hermitian(Qref):
    t = fourier_table(Qref, 4, 4)
    for k in range(-4, 5):
        for l in range(-4, 5):
            assert np.max(np.abs(t.C(-k, -l) - t.C(k, l).conj().T)) < 1e-14


def laurent_coefficients(Q):
    """Coefficients P[a, b] of z^a w^b in the symbol, exact since degrees are within [-1, 1]."""
    u = grid(3)
    z, w = np.meshgrid(u, u, indexing="ij")
    f = np.fft.fft2(psi(Q, z, w), axes=(0, 1)) / 9
    return {(a, b): f[a % 3, b % 3] for a in (-1, 0, 1) for b in (-1, 0, 1)}


@pytest.mark.parametrize("which", ["ref", "random"])
def test_difference_equation(Qref, which, rng):
    Q = Qref if which == "ref" else random_face(rng, 1, 2)
    P = laurent_coefficients(Q)
    t = fourier_table(Q, 5, 5)
    D = Q.d1 + Q.d2
    worst = 0.0
    for k in range(-4, 5):
        for l in range(-4, 5):
            s = sum(P[a, b] @ t.C(k - a, l - b) for (a, b) in P)
            delta = np.eye(D) if k == l == 0 else 0
            worst = max(worst, np.max(np.abs(s - delta)))
    assert worst < 1e-10


def test_partial_identity(Qid):
    f = partial_fourier(Qid, "w", 0)
    assert np.allclose(f.samples, 0.5 * np.eye(2))


def test_partial_block_invertible(Qref):
    f = partial_fourier(Qref, "w", 0)
    blk = f.samples[:, :1, :1]
    assert np.min(np.abs(blk)) > 0.1


@pytest.mark.parametrize("axis", ["z", "w"])
def test_partial_matches_table(Qref, axis):
    t = fourier_table(Qref, 3, 3)
    for k in range(-2, 3):
        f = partial_fourier(Qref, axis, k)
        for l in range(-3, 4):
            ref = t.C(k, l) if axis == "z" else t.C(l, k)
            assert np.max(np.abs(f.coeff(l) - ref)) < 1e-10


def test_free_energy_identity(Qid):
    assert np.isclose(free_energy(Qid), np.log(np.pi ** 2), atol=1e-14)


def test_free_energy_reference(Qref):
    v = free_energy(Qref)
    assert abs(v - REF_LOG_LAMBDA) < 1e-12
    assert abs(free_energy(Qref, M=512) - v) < 1e-12


def test_logdet_samples(Qid):
    assert np.allclose(logdet_samples(Qid, 8), np.log(4))


def test_slice_identity(Qid):
    assert spectral_slice(Qid, "w", 1.0) == []


@pytest.mark.parametrize("axis", ["z", "w"])
def test_slice_roots_pair_up(Qref, rng, axis):
    Q = random_face(rng, 1, 2)
    for Qx in (Qref, Q):
        for u in np.exp(2j * np.pi * np.array([0.1, 0.37, 0.8])):
            roots = np.array([r.root for r in spectral_slice(Qx, axis, u)])
            assert len(roots) > 0
            assert np.all(np.abs(np.abs(roots) - 1) > 1e-6)
            for r in roots:
                assert np.min(np.abs(roots - 1 / np.conj(r))) < 1e-8 * max(1, abs(r))


def test_slice_kernels(Qref):
    u = np.exp(0.7j)
    for sr in spectral_slice(Qref, "w", u):
        m = psi(Qref, u, sr.root)
        assert np.linalg.norm(m @ sr.kernel) < 1e-8 * np.linalg.norm(m)


def test_kernel_projects_to_strip_kernel(rng):
    # a zero of the symbol restricts to a zero of the strip symbol
    Q = random_face(rng, 1, 2)
    u = np.exp(1.1j)
    strip = strip_samples(Q, "WE", u)[0]
    for sr in spectral_slice(Q, "w", u):
        w = sr.root
        phi = strip[:1, :1] + strip[1:, 1:] + w * strip[:1, 1:] + strip[1:, :1] / w
        v1 = sr.kernel[:1]
        assert np.linalg.norm(phi @ v1) < 1e-8 * max(1, np.linalg.norm(phi)) * np.linalg.norm(sr.kernel)


def test_inverse_block_is_strip_inverse(rng):
    Q = random_face(rng, 2, 1)
    u, w = grid(8), np.exp(0.3j) * np.ones(8)
    inv = np.linalg.inv(psi(Q, u, w))[:, :2, :2]
    s = strip_samples(Q, "WE", u)
    phi = s[:, :2, :2] + s[:, 2:, 2:] + w[:, None, None] * s[:, :2, 2:] + s[:, 2:, :2] / w[:, None, None]
    assert np.max(np.abs(inv - np.linalg.inv(phi))) < 1e-10


def test_symbol_function_basics():
    u = grid(64)
    f = SymbolFunction((u + 1 / u)[:, None, None] * np.ones((1, 1, 1)), hermitian=True)
    assert np.isclose(f.coeff(1)[0, 0], 1) and np.isclose(f.coeff(-1)[0, 0], 1)
    assert f.is_even()
    g = f @ f
    assert np.isclose(g.coeff(0)[0, 0], 2)
    assert np.isclose((f * 3 - f).coeff(1)[0, 0], 2)
