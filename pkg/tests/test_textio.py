import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guillotine_gmrf.errors import ParseError
from guillotine_gmrf.face_weight import scalar_dihedral
from guillotine_gmrf.guill_rect import surface_power
from guillotine_gmrf.textio import (format_face, format_matrix, format_rect, logdet_csv, parse_face, parse_matrix,
                                    parse_object, read_face, roots_csv, symbol_csv)

from conftest import random_face, seeds


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 5), st.integers(1, 5))
def test_matrix_roundtrip(seed, r, c):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    assert np.array_equal(parse_matrix(format_matrix(m)), m)


def test_face_roundtrip(rng):
    Q = random_face(rng, 1, 2)
    back = parse_face(format_face(Q))
    assert back == Q and (back.d1, back.d2) == (1, 2)


def test_dihedral_file():
    text = "# reference weight\ndihedral 1\ncomplex 1 1\n2 0\ncomplex 1 1\n-0.5 0\ncomplex 1 1\n-0.25 0\n"
    assert parse_face(text) == scalar_dihedral(2, -0.5, -0.25)


@pytest.mark.parametrize("text", [
    "",
    "face 1 1\ncomplex 2 2\n1 0 0 0 0 0 1 0\n",
    "face 1 1\ncomplex 4 4\n" + "1 0 " * 15,
    "face 1 1\ncomplex 4 4\n" + "x 0 " * 16,
    "face 1 1\ncomplex 4 4\n" + "1 0 " * 16 + "7",
    "square 1 1\n",
    "dihedral 2\ncomplex 1 1\n1 0\ncomplex 1 1\n0 0\ncomplex 1 1\n0 0\n",
    "face a 1\n",
    "face -1 1\n",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_face(text)


def test_parse_error_names_line():
    with pytest.raises(ParseError, match=r"<text>:3"):
        parse_face("face 1 1\ncomplex 4 4\n1 0 oops")


def test_not_pd_face_file():
    from guillotine_gmrf.errors import NotPositiveDefinite

    with pytest.raises(NotPositiveDefinite):
        parse_face("face 1 1\n" + format_matrix(-np.eye(4)))


def test_read_face(tmp_path):
    p = tmp_path / "q.txt"
    p.write_text(format_face(scalar_dihedral(1, 0, 0)))
    assert read_face(p) == scalar_dihedral(1, 0, 0)
    with pytest.raises(ParseError):
        read_face(tmp_path / "missing.txt")


def test_rect_object():
    sp = surface_power(scalar_dihedral(2, -0.5, -0.25), 2, 1)
    header, mats = parse_object(format_rect(sp.form, sp.log_scale))
    assert header[:5] == ["rect", "2", "1", "1", "1"]
    assert float(header[5]) == sp.log_scale
    assert np.array_equal(mats[0], sp.form.matrix)
    with pytest.raises(ParseError):
        parse_object("rect 1 1 1 1 0\n")


def test_csv_headers():
    assert logdet_csv(np.zeros((2, 2))).splitlines()[0] == "theta1,theta2,logdet"
    assert len(logdet_csv(np.zeros((2, 2))).splitlines()) == 5
    assert roots_csv([(1 + 0j, 2 + 1j)]).splitlines() == ["u_re,u_im,root_re,root_im", "1,0,2,1"]
    s = symbol_csv(np.ones((3, 1, 2), complex)).splitlines()
    assert s[0] == "theta,entry_00_re,entry_00_im,entry_01_re,entry_01_im"
    assert len(s) == 4
