import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guillotine_gmrf import _kernels

from conftest import seeds

needs_numba = pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba backend disabled")


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 6), st.integers(1, 5))
def test_scatter_backends_agree(seed, nf, m):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    idx = rng.integers(0, 10, size=(nf, m)).astype(np.int64)
    a = _kernels._scatter_faces_np(np.zeros((10, 10), complex), q, idx)
    b = _kernels._scatter_faces_nb(np.zeros((10, 10), complex), q, idx)
    assert np.allclose(a, b, atol=1e-14)


@needs_numba
@pytest.mark.parametrize("a,b,c0", [(1, -1, 0), (1, 1, 1), (-1, 1, 0)])
def test_index_blocks_backends_agree(rng, a, b, c0):
    n = 6
    coeffs = rng.standard_normal((4 * n + 2, 2, 3)) + 0j
    x = _kernels._index_blocks_np(coeffs, 2 * n, n, a, b, c0)
    y = _kernels._index_blocks_nb(coeffs, 2 * n, n, a, b, c0)
    assert np.array_equal(x, y)


def test_index_blocks_layout():
    coeffs = np.arange(7, dtype=complex).reshape(7, 1, 1)
    m = _kernels.index_blocks(coeffs, 3, 3, 1, -1, 0)
    assert np.array_equal(m.real, 3 + np.subtract.outer(np.arange(3), np.arange(3)))
    with pytest.raises(IndexError):
        _kernels.index_blocks(coeffs, 3, 5, 1, -1, 0)


def test_scatter_repeated_indices():
    out = _kernels.scatter_faces(np.zeros((2, 2), complex), np.ones((2, 2)), np.array([[0, 0], [1, 1]]))
    assert np.array_equal(out.real, [[4, 0], [0, 4]])


def test_env_flag_selects_numpy():
    env = dict(os.environ, GUILLOTINE_GMRF_NO_NUMBA="1")
    code = ("from guillotine_gmrf import _kernels; "
            "from guillotine_gmrf.face_weight import domain_precision, scalar_dihedral; "
            "domain_precision(scalar_dihedral(2, -0.5, -0.25), 2, 2); print(_kernels.backend())")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
