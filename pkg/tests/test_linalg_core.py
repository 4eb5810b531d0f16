import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guillotine_gmrf.errors import LayoutMismatch, NotPositiveDefinite, SingularPivot
from guillotine_gmrf.linalg_core import (BlockLayout, HermitianMatrix, is_positive_definite, join, ldu,
                                         log_det, schur_complement, symmetrize)

from conftest import random_pd, seeds


def test_two_by_two_elimination():
    lay = BlockLayout([1, 1], ("a", "b"))
    s = schur_complement(np.array([[2.0, 1.0], [1.0, 2.0]]), lay, ["b"])
    assert np.allclose(s, [[1.5]])


def test_identity_elimination_leaves_identity():
    lay = BlockLayout([2, 3, 1])
    s = schur_complement(np.eye(6), lay, [1])
    assert np.allclose(s, np.eye(3))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(3, 24))
def test_chain_rule_order_independent(seed, n):
    rng = np.random.default_rng(seed)
    m = random_pd(rng, n)
    a, b = sorted(rng.choice(np.arange(1, n), 2, replace=False))
    lay = BlockLayout([a, b - a, n - b], ("i", "k", "l"))
    joint = schur_complement(m, lay, ["k", "l"])
    s1 = schur_complement(schur_complement(m, lay, ["k"]), lay.without(["k"]), ["l"])
    s2 = schur_complement(schur_complement(m, lay, ["l"]), lay.without(["l"]), ["k"])
    scale = np.max(np.abs(joint))
    assert np.max(np.abs(s1 - joint)) <= 1e-12 * scale * 10
    assert np.max(np.abs(s2 - joint)) <= 1e-12 * scale * 10


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_pd_propagates(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    m = random_pd(rng, n, shift=0.05)
    k = int(rng.integers(1, n))
    lay = BlockLayout([n - k, k])
    assert is_positive_definite(schur_complement(m, lay, [1]))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_inverse_block_formula(seed):
    rng = np.random.default_rng(seed)
    m = random_pd(rng, 9)
    lay = BlockLayout([4, 5])
    s = schur_complement(m, lay, [1])
    top = np.linalg.inv(m)[:4, :4]
    assert np.max(np.abs(top - np.linalg.inv(s))) <= 1e-10 * np.max(np.abs(top))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_log_det_additivity(seed):
    rng = np.random.default_rng(seed)
    m = random_pd(rng, 8)
    lay = BlockLayout([3, 5])
    lhs = log_det(m)
    rhs = log_det(schur_complement(m, lay, [1])) + log_det(m[3:, 3:])
    assert abs(lhs - rhs) < 1e-10


def test_ldu_hand_example():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    L, D, U = ldu(m, BlockLayout([1, 1]), [1])
    assert np.allclose(D, np.diag([1.5, 2.0]))
    assert np.allclose(L, [[1, 0.5], [0, 1]])
    assert np.allclose(U, [[1, 0], [0.5, 1]])
    assert np.allclose(L @ D @ U, m)


def test_ldu_diagonal_is_trivial():
    m = np.diag([1.0, 2.0, 3.0])
    L, D, U = ldu(m, BlockLayout([1, 2]), [1])
    assert np.allclose(L, np.eye(3)) and np.allclose(U, np.eye(3)) and np.allclose(D, m)


def test_ldu_reconstructs(rng):
    m = random_pd(rng, 8)
    L, D, U = ldu(m, BlockLayout([2, 3, 3], "abc"), ["b"])
    assert np.max(np.abs(L @ D @ U - m)) < 1e-12 * np.max(np.abs(m)) * 10


def test_positive_definite_examples(Qref):
    assert is_positive_definite(np.eye(4))
    assert not is_positive_definite(np.diag([1.0, -1.0]))
    assert is_positive_definite(Qref.matrix)
    assert np.allclose(np.linalg.eigvalsh(Qref.matrix), [1, 2, 2.5, 2.5])


def test_log_det_examples():
    assert log_det(np.eye(5)) == 0.0
    assert np.isclose(log_det(np.diag([2.0, 2.0])), np.log(4))
    with pytest.raises(NotPositiveDefinite):
        log_det(np.diag([1.0, -1.0]))


def test_join_examples():
    lay = BlockLayout([1, 1, 1])
    m = join([(np.eye(2), [0, 1]), (np.eye(2), [1, 2])], lay)
    assert np.allclose(m, np.diag([1, 2, 1]))
    a = np.array([[3.0, 1.0], [1.0, 2.0]])
    assert np.allclose(join([(a, [0, 1])], BlockLayout([1, 1])), a)


def test_join_then_eliminate_either_order(rng):
    A, B = random_pd(rng, 4), random_pd(rng, 4)
    lay = BlockLayout([2, 2, 2, 2], "wxyz")
    m = join([(A, "wx"), (B, "xy"), (random_pd(rng, 4), "yz")], lay)
    s1 = schur_complement(schur_complement(m, lay, "x"), lay.without("x"), "y")
    s2 = schur_complement(schur_complement(m, lay, "y"), lay.without("y"), "x")
    assert np.max(np.abs(s1 - s2)) < 1e-12


def test_singular_pivot_rejected():
    lay = BlockLayout([1, 2])
    m = np.array([[1.0, 0, 0], [0, 1.0, 1.0], [0, 1.0, 1.0]])
    with pytest.raises(SingularPivot):
        schur_complement(m, lay, [1])


def test_layout_errors():
    with pytest.raises(LayoutMismatch):
        BlockLayout([1, 2], ("a", "a"))
    with pytest.raises(LayoutMismatch):
        schur_complement(np.eye(3), BlockLayout([1, 1]), [0])
    with pytest.raises(LayoutMismatch):
        join([(np.eye(3), [0])], BlockLayout([2]))


def test_symmetrize_warns_on_asymmetry():
    with pytest.warns(RuntimeWarning):
        s = symmetrize(np.array([[1.0, 0.5], [0.0, 1.0]]))
    assert np.allclose(s, [[1, 0.25], [0.25, 1]])


def test_hermitian_matrix_is_read_only():
    h = HermitianMatrix(np.eye(2))
    with pytest.raises(ValueError):
        np.asarray(h)[0, 0] = 2.0
