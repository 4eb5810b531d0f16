"""Plain-text matrix files and CSV exports.

Matrix format::

    # comment lines start with '#'
    complex <rows> <cols>
    <re> <im> <re> <im> ...      (row-major)

Object files put one header line in front of one or more matrices, e.g.
``face <d1> <d2>`` or ``dihedral <d>`` followed by T, A and U.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import ParseError
from .face_weight import DihedralParams, FaceOperator, dihedral_face


class _Tokens:
    def __init__(self, text: str, source: str = "<text>"):
        self.source = source
        self._toks = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if line.lstrip().startswith("#"):
                continue
            self._toks.extend((t, lineno) for t in line.split())
        self._i = 0

    def next(self, what: str) -> tuple:
        if self._i >= len(self._toks):
            raise ParseError(f"{self.source}: unexpected end of input, expected {what}")
        tok = self._toks[self._i]
        self._i += 1
        return tok

    def word(self, expected: str | None = None) -> str:
        tok, line = self.next(expected or "keyword")
        if expected is not None and tok != expected:
            raise ParseError(f"{self.source}:{line}: expected {expected!r}, got {tok!r}")
        return tok

    def int(self, what: str) -> int:
        tok, line = self.next(what)
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(f"{self.source}:{line}: {what} must be an integer, got {tok!r}") from None
        if v < 0:
            raise ParseError(f"{self.source}:{line}: {what} must be non-negative")
        return v

    def float(self, what: str) -> float:
        tok, line = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise ParseError(f"{self.source}:{line}: {what} is not a number: {tok!r}") from None

    def matrix(self) -> np.ndarray:
        self.word("complex")
        r, c = self.int("rows"), self.int("cols")
        vals = [self.float("matrix entry") for _ in range(2 * r * c)]
        a = np.asarray(vals, dtype=float).reshape(r, c, 2)
        return a[..., 0] + 1j * a[..., 1]

    @property
    def exhausted(self) -> bool:
        return self._i >= len(self._toks)

    def done(self):
        if self._i != len(self._toks):
            tok, line = self._toks[self._i]
            raise ParseError(f"{self.source}:{line}: trailing data starting at {tok!r}")


def format_matrix(m) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    lines = [f"complex {m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(f"{x.real:.17g} {x.imag:.17g}" for x in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, source: str = "<text>") -> np.ndarray:
    t = _Tokens(text, source)
    m = t.matrix()
    t.done()
    return m


def format_object(header: str, *matrices) -> str:
    return header + "\n" + "".join(format_matrix(m) for m in matrices)


def parse_face(text: str, source: str = "<text>") -> FaceOperator:
    """Face operator from a ``face`` or ``dihedral`` file."""
    t = _Tokens(text, source)
    kind = t.word()
    if kind == "face":
        d1, d2 = t.int("d1"), t.int("d2")
        m = t.matrix()
        t.done()
        if m.shape != (2 * (d1 + d2),) * 2:
            raise ParseError(f"{source}: face matrix is {m.shape}, expected side {2 * (d1 + d2)}")
        return FaceOperator(m, d1, d2)
    if kind == "dihedral":
        d = t.int("d")
        T, A, U = (t.matrix() for _ in range(3))
        t.done()
        for name, x in zip("TAU", (T, A, U)):
            if x.shape != (d, d):
                raise ParseError(f"{source}: block {name} is {x.shape}, expected ({d}, {d})")
        return dihedral_face(DihedralParams(T, A, U))
    raise ParseError(f"{source}: unknown object kind {kind!r}")


def read_face(path) -> FaceOperator:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_face(text, str(path))


def format_face(Q: FaceOperator) -> str:
    return format_object(f"face {Q.d1} {Q.d2}", Q.matrix)


def format_rect(form, log_scale: float = 0.0) -> str:
    return format_object(f"rect {form.p} {form.q} {form.d1} {form.d2} {log_scale:.17g}", form.matrix)


def parse_object(text: str, source: str = "<text>"):
    """(header tokens, [matrices]) for any object file."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError(f"{source}: empty file")
    header = lines[0].split()
    t = _Tokens("\n".join(lines[1:]), source)
    mats = []
    while not t.exhausted:
        mats.append(t.matrix())
    if not mats:
        raise ParseError(f"{source}: no matrix after header")
    return header, mats


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{x:.17g}" if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def logdet_csv(samples: np.ndarray) -> str:
    """Columns theta1, theta2, logdet over an M x M grid."""
    M = samples.shape[0]
    th = 2 * np.pi * np.arange(M) / M
    rows = ((float(th[i]), float(th[j]), float(samples[i, j])) for i in range(M) for j in range(M))
    return _csv(("theta1", "theta2", "logdet"), rows)


def roots_csv(pairs) -> str:
    """``pairs`` iterates over (u, root)."""
    rows = ((float(np.real(u)), float(np.imag(u)), float(np.real(r)), float(np.imag(r))) for u, r in pairs)
    return _csv(("u_re", "u_im", "root_re", "root_im"), rows)


def symbol_csv(samples: np.ndarray) -> str:
    """Row-major entries of a sampled symbol, one row per grid angle."""
    M, r, c = samples.shape
    header = ["theta"] + [f"entry_{i}{j}_{part}" for i in range(r) for j in range(c) for part in ("re", "im")]
    th = 2 * np.pi * np.arange(M) / M
    rows = []
    for k in range(M):
        flat = samples[k].reshape(-1)
        rows.append([float(th[k])] + [float(v) for x in flat for v in (x.real, x.imag)])
    return _csv(header, rows)


def table_csv(header, rows) -> str:
    return _csv(header, rows)
