import numpy as np
import pytest
from hypothesis import given, settings

from guillotine_gmrf.errors import DimensionMismatch, NotDihedral, NotPositiveDefinite
from guillotine_gmrf.face_weight import (DIHEDRAL_GROUP, DihedralParams, EdgeIndexing, FaceOperator,
                                         apply_dihedral, dihedral_face, dihedral_params, domain_precision,
                                         is_dihedral, oracle_surface_power, scalar_dihedral)
from guillotine_gmrf.linalg_core import is_positive_definite, join, BlockLayout

from conftest import random_face, random_pd, seeds


def test_identity_weight():
    assert np.allclose(scalar_dihedral(1, 0, 0).matrix, np.eye(4))


def test_reference_weight_spectrum(Qref):
    assert np.allclose(np.linalg.eigvalsh(Qref.matrix), [1, 2, 2.5, 2.5], atol=1e-14)
    assert np.allclose(Qref.matrix, [[2, -0.5, -0.25, -0.25], [-0.5, 2, -0.25, -0.25],
                                     [-0.25, -0.25, 2, -0.5], [-0.25, -0.25, -0.5, 2]])


def test_weight_with_positive_couplings_is_accepted():
    # dense eigensolve of the assembled matrix: smallest eigenvalue t - a = 0.4
    Q = scalar_dihedral(1, 0.6, 0.3)
    assert np.isclose(np.linalg.eigvalsh(Q.matrix)[0], 0.4)


def test_indefinite_weight_rejected():
    with pytest.raises(NotPositiveDefinite):
        scalar_dihedral(1, 0.6, 0.9)
    with pytest.raises(NotPositiveDefinite):
        FaceOperator(-np.eye(4), 1, 1)


def test_shape_checked():
    with pytest.raises(DimensionMismatch):
        FaceOperator(np.eye(5), 1, 1)
    with pytest.raises(DimensionMismatch):
        dihedral_face(DihedralParams(np.eye(2), np.eye(1), np.eye(2)))


def test_blocks(Qref):
    assert Qref.block("S", "N")[0, 0] == -0.5
    assert Qref.blocks("SN", "WE").shape == (2, 2)
    assert Qref.layout.labels == ("S", "N", "W", "E")


def test_dihedral_params_roundtrip():
    rng = np.random.default_rng(3)
    T = random_pd(rng, 2, shift=4.0)
    A = 0.1 * random_pd(rng, 2)
    U = 0.05 * random_pd(rng, 2)
    Q = dihedral_face(DihedralParams(T, A, U))
    back = dihedral_params(Q)
    assert np.allclose(back.T, T) and np.allclose(back.A, A) and np.allclose(back.U, U)


def test_dihedral_invariant_fixed_by_group(Qref):
    for g in DIHEDRAL_GROUP:
        assert apply_dihedral(g, Qref) == Qref


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_rotation_has_order_four(seed):
    Q = random_face(np.random.default_rng(seed))
    R = Q
    for _ in range(4):
        R = apply_dihedral("r", R)
    assert R == Q
    assert apply_dihedral("s", apply_dihedral("s", Q)) == Q


def test_rotation_block_table():
    # hand permutation: the quarter turn sends the West edge to South, East to North,
    # North to West and South to East.
    m = np.arange(16, dtype=float).reshape(4, 4)
    Q = FaceOperator(m @ m.T + 40 * np.eye(4), 1, 1)
    R = apply_dihedral("r", Q)
    new_from_old = {"S": "W", "N": "E", "W": "N", "E": "S"}
    for a in "SNWE":
        for b in "SNWE":
            assert R.block(a, b) == Q.block(new_from_old[a], new_from_old[b])


def test_group_closure():
    perms = set(DIHEDRAL_GROUP.values())
    assert len(perms) == 8


def test_mixed_generators_need_equal_dims(rng):
    Q = random_face(rng, 1, 2)
    with pytest.raises(DimensionMismatch):
        apply_dihedral("r", Q)
    assert apply_dihedral("r2", Q).d1 == 1


def test_dihedral_detector(rng):
    assert is_dihedral(scalar_dihedral(2, -0.5, -0.25))
    assert not is_dihedral(random_face(rng))
    with pytest.raises(NotDihedral):
        dihedral_params(random_face(rng))


def test_edge_counts():
    ix = EdgeIndexing(3, 2, 1, 1)
    assert ix.n_horizontal == 9 and ix.n_vertical == 8
    assert ix.n_boundary == 2 * 3 + 2 * 2
    assert ix.dim == 17
    ix = EdgeIndexing(2, 3, 2, 1)
    assert ix.n_boundary == 2 * 2 * 2 + 2 * 3


def test_canonical_boundary_order():
    ix = EdgeIndexing(2, 2, 1, 1)
    assert list(ix.h[:, 0]) == [0, 1]
    assert list(ix.h[:, 2]) == [2, 3]
    assert list(ix.v[0, :]) == [4, 5]
    assert list(ix.v[2, :]) == [6, 7]


def test_single_face_precision():
    m, ix = domain_precision(scalar_dihedral(1, 0, 0), 1, 1)
    assert np.allclose(m, np.eye(4))


def test_shared_edge_doubled():
    m, ix = domain_precision(scalar_dihedral(1, 0, 0), 2, 1)
    d = np.real(np.diag(m))
    assert d[ix.v[1, 0]] == 2
    assert np.sum(d == 1) == 6 and np.allclose(m, np.diag(d))


def test_reference_precision_pd(Qref):
    m, ix = domain_precision(Qref, 2, 2)
    assert ix.dim == 12
    assert np.allclose(m, m.conj().T) and is_positive_definite(m)


def test_markov_factorization(Qref):
    # a 3x2 rectangle is the join of its 1x2 and 2x2 parts on shared edge labels
    m, ix = domain_precision(Qref, 3, 2)
    left, ixl = domain_precision(Qref, 1, 2)
    right, ixr = domain_precision(Qref, 2, 2)

    def edges(sub, dx):
        out = np.empty(sub.dim, dtype=np.int64)
        for k in range(sub.p):
            for l in range(sub.q + 1):
                out[sub.h[k, l]] = ix.h[k + dx, l]
        for k in range(sub.p + 1):
            for l in range(sub.q):
                out[sub.v[k, l]] = ix.v[k + dx, l]
        return out

    lay = BlockLayout([1] * ix.dim)
    joined = join([(left, list(edges(ixl, 0))), (right, list(edges(ixr, 1)))], lay)
    assert np.array_equal(joined, m)


def test_oracle_decoupled():
    form, la = oracle_surface_power(scalar_dihedral(1, 0, 0), 2, 1)
    assert np.allclose(form.matrix, np.eye(6))
    assert np.isclose(la, np.log(np.pi))
    form, la = oracle_surface_power(scalar_dihedral(1, 0, 0), 3, 4)
    assert np.allclose(form.matrix, np.eye(14))


def test_oracle_golden(Qref):
    golden = np.load(__import__("pathlib").Path(__file__).parent / "golden" / "oracle_3x3.npz")
    form, la = oracle_surface_power(Qref, 3, 3)
    assert np.allclose(form.matrix, golden["matrix"], rtol=0, atol=1e-12)
    assert abs(la - float(golden["log_alpha"])) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_oracle_pd(seed):
    rng = np.random.default_rng(seed)
    Q = random_face(rng, 1, int(rng.integers(1, 3)))
    form, _ = oracle_surface_power(Q, 2, 3)
    assert is_positive_definite(form.matrix)
