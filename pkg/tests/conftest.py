import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from guillotine_gmrf.face_weight import FaceOperator, scalar_dihedral

REF = (2.0, -0.5, -0.25)
NEAR_CRITICAL = (1.0, -0.45, -0.26)


@pytest.fixture(scope="session")
def Qref():
    return scalar_dihedral(*REF)


@pytest.fixture(scope="session")
def Qid():
    return scalar_dihedral(1.0, 0.0, 0.0)


def random_pd(rng, n, complex_=True, shift=0.5):
    b = rng.standard_normal((n, n))
    if complex_:
        b = b + 1j * rng.standard_normal((n, n))
    return b @ b.conj().T / n + shift * np.eye(n)


def random_face(rng, d1=1, d2=1, complex_=True) -> FaceOperator:
    return FaceOperator(random_pd(rng, 2 * (d1 + d2), complex_), d1, d2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


seeds = st.integers(min_value=0, max_value=2**31 - 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
