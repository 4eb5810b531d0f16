"""Command-line front end.

Examples::

    guillotine-gmrf --dihedral 1 0 0 free-energy
    guillotine-gmrf surface-power --p 2 --q 2 --dihedral 2 -0.5 -0.25
    guillotine-gmrf verify boundary --dihedral 2 -0.5 -0.25 --n 48 --out results/

Exit codes: 0 success, 1 failed verification, 2 assumption or configuration
violation, 3 quadrature did not converge, 4 input/output or parse error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import textio
from .errors import GuillotineError, ParseError, QuadratureNotConverged, TruncationExceeded
from .face_weight import FaceOperator, scalar_dihedral

EXIT_OK, EXIT_FAILED, EXIT_ASSUMPTION, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3, 4


class ConfigError(GuillotineError, ValueError):
    """Inconsistent or out-of-range run configuration."""


@dataclass(frozen=True)
class RunConfig:
    face: str | None = None
    dihedral: tuple | None = None
    p: int = 3
    q: int = 3
    n: int = 48
    grid: int = 256
    tol: float = 1e-12
    out: str | None = None
    seed: int = 0
    perturb: float = 0.0
    side: str = "W"
    corner: str = "SW"

    def validate(self, needs_boundary: bool = False) -> "RunConfig":
        if self.face is not None and self.dihedral is not None:
            raise ConfigError("give either --face or --dihedral, not both")
        if self.grid < 64 or self.grid & (self.grid - 1):
            raise ConfigError(f"grid size must be a power of two >= 64, got {self.grid}")
        if min(self.p, self.q) < 1 or self.n < 1:
            raise ConfigError("p, q and n must be positive")
        if needs_boundary and self.n < max(self.p, self.q) + 8:
            raise TruncationExceeded(
                f"truncation n={self.n} too small for p={self.p}, q={self.q} (need n >= {max(self.p, self.q) + 8})"
            )
        if self.tol <= 0:
            raise ConfigError("tolerance must be positive")
        return self

    def face_operator(self) -> FaceOperator:
        if self.face is not None:
            return textio.read_face(self.face)
        t, a, u = self.dihedral if self.dihedral is not None else (2.0, -0.5, -0.25)
        return scalar_dihedral(t, a, u)


_INT_KEYS = {"p", "q", "n", "grid", "seed"}
_FLOAT_KEYS = {"tol", "perturb"}
_KEYS = {f.name for f in fields(RunConfig)}


def _cast(key: str, value: str):
    if key == "dihedral":
        parts = value.replace(",", " ").split()
        if len(parts) != 3:
            raise ValueError(value)
        return tuple(float(x) for x in parts)
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return value


def read_config(path) -> dict:
    """Flat ``key = value`` file; blank lines and ``#`` comments are ignored."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _cast(key, value)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _emit(cfg: RunConfig, name: str, text: str, summary: str | None = None):
    """Write ``text`` to ``out/name`` or to stdout when no directory is set."""
    if cfg.out is None:
        sys.stdout.write(text)
        if summary:
            print(summary, file=sys.stderr)
        return
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)
    print(f"wrote {d / name}")
    if summary:
        print(summary)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_free_energy(cfg: RunConfig) -> int:
    from .eigenvalue import eigen_report

    Q = cfg.face_operator()
    rep = eigen_report(Q, M=cfg.grid, tol=cfg.tol)
    print(f"log Lambda = {rep.log_lambda_fourier:.12f}")
    print(f"log Lambda1D_WE = {rep.log_lambda_1d_we:.12f}")
    print(f"log Lambda' = {rep.log_lambda_prime_integral:.12f}")
    if cfg.out is not None:
        _emit(cfg, "eigen_report.csv", rep.to_csv())
    return EXIT_OK


def cmd_surface_power(cfg: RunConfig) -> int:
    from .guill_rect import surface_power

    Q = cfg.face_operator()
    sp = surface_power(Q, cfg.p, cfg.q)
    _emit(cfg, f"surface_power_{cfg.p}x{cfg.q}.txt", textio.format_rect(sp.form, sp.log_scale))
    return EXIT_OK


def cmd_halfstrip(cfg: RunConfig) -> int:
    from .folds_halfstrips import halfstrip_fixed_point, halfstrip_residuals

    Q = cfg.face_operator()
    H = halfstrip_fixed_point(Q, cfg.side, cfg.n, cfg.grid)
    res = halfstrip_residuals(H, Q)
    text = textio.format_object(f"halfstrip {cfg.side} {cfg.n} {Q.d1} {Q.d2}", H.matrix)
    summary = " ".join(f"{k}={v:.3e}" for k, v in res.items())
    _emit(cfg, f"halfstrip_{cfg.side}_n{cfg.n}.txt", text, f"residuals: {summary}")
    return EXIT_OK


def cmd_corner(cfg: RunConfig) -> int:
    from .corners_boundary import corner_fixed_point, corner_residuals
    from .folds_halfstrips import halfstrip_fixed_point

    Q = cfg.face_operator()
    C = corner_fixed_point(Q, cfg.corner, cfg.n, cfg.grid)
    hv = halfstrip_fixed_point(Q, cfg.corner[0], cfg.n, cfg.grid)
    hh = halfstrip_fixed_point(Q, cfg.corner[1], cfg.n, cfg.grid)
    worst = max(corner_residuals(C, hv, hh).values())
    text = textio.format_object(f"corner {cfg.corner} {cfg.n} {Q.d1} {Q.d2}", C.matrix)
    _emit(cfg, f"corner_{cfg.corner}_n{cfg.n}.txt", text, f"max fixed-point residual: {worst:.3e}")
    return EXIT_OK


def cmd_boundary_weight(cfg: RunConfig) -> int:
    from .corners_boundary import assemble_boundary_weight, covariance_check

    Q = cfg.face_operator()
    bw = assemble_boundary_weight(Q, cfg.p, cfg.q, cfg.n, cfg.grid)
    cov = covariance_check(Q, cfg.p, cfg.q, cfg.n, cfg.grid, bw=bw)
    text = textio.format_object(f"boundary {cfg.p} {cfg.q} {Q.d1} {Q.d2} {cfg.n} {cfg.grid}", bw.matrix)
    _emit(cfg, f"boundary_{cfg.p}x{cfg.q}_n{cfg.n}.txt", text,
          f"covariance_check residual: {cov.residual:.3e}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    from .verify import SUITES, VerifyOptions, run_suites

    names = SUITES if suite == "all" else (suite,)
    Q = cfg.face_operator()
    opts = VerifyOptions(p=cfg.p, q=cfg.q, n=cfg.n, M=cfg.grid, perturb=cfg.perturb, seed=cfg.seed)
    checks = run_suites(Q, names, opts)
    rows = []
    for c in checks:
        print(f"{c.status.upper():4s}  {c.suite}/{c.name}  value={c.value:.3e}  threshold={c.threshold:.1e}"
              + (f"  ({c.note})" if c.note else ""))
        rows.append((c.suite, c.name, float(c.value), float(c.threshold), c.status, c.note))
    failed = sum(c.status == "fail" for c in checks)
    print(f"{len(checks)} checks, {failed} failed, {sum(c.status == 'skip' for c in checks)} skipped")
    if cfg.out is not None:
        _emit(cfg, f"verify_{suite}.csv",
              textio.table_csv(("suite", "check", "value", "threshold", "status", "note"), rows))
    return EXIT_FAILED if failed else EXIT_OK


def cmd_export(cfg: RunConfig, kind: str) -> int:
    from .spectral import logdet_samples, spectral_slice
    from .strips_halfplanes import halfplane_symbol, strip_symbol

    Q = cfg.face_operator()
    if kind == "logdet":
        text = textio.logdet_csv(logdet_samples(Q, cfg.grid))
    elif kind == "roots":
        pairs = []
        for u in np.exp(2j * np.pi * np.arange(cfg.grid) / cfg.grid):
            pairs.extend((u, r.root) for r in spectral_slice(Q, "w", u))
        text = textio.roots_csv(pairs)
    elif kind == "strip":
        text = textio.symbol_csv(strip_symbol(Q, "WE", cfg.grid).symbol.samples)
    else:
        text = textio.symbol_csv(halfplane_symbol(Q, cfg.side, cfg.grid).symbol.samples)
    _emit(cfg, f"{kind}.csv", text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace so that flags given
    # before and after the subcommand, and config-file values, merge cleanly.
    c = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    src = c.add_mutually_exclusive_group()
    src.add_argument("--face", metavar="FILE", help="face weight file (face or dihedral format)")
    src.add_argument("--dihedral", nargs=3, type=float, metavar=("T", "A", "U"),
                     help="scalar dihedral weight")
    c.add_argument("--p", type=int, help="rectangle width")
    c.add_argument("--q", type=int, help="rectangle height")
    c.add_argument("--n", type=int, help="half-line truncation")
    c.add_argument("--grid", type=int, metavar="M", help="quadrature grid size (power of two >= 64)")
    c.add_argument("--tol", type=float, help="quadrature tolerance")
    c.add_argument("--out", metavar="DIR", help="output directory (default: stdout)")
    c.add_argument("--seed", type=int, help="seed for randomized checks")
    c.add_argument("--perturb", type=float, metavar="EPS", help="add EPS*I to fixed-point blocks (negative control)")
    c.add_argument("--side", choices=("W", "E", "S", "N"))
    c.add_argument("--corner", choices=("SW", "SE", "NW", "NE"))
    c.add_argument("--config", metavar="FILE", help="key=value config file; flags win")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="guillotine-gmrf", parents=[common],
                                description="Boundary weights and free energies of lattice Gaussian fields.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("free-energy", "free-energy eigenvalue by three routes"),
                       ("surface-power", "boundary form of a p x q rectangle"),
                       ("halfstrip", "half-strip fixed point"),
                       ("corner", "corner fixed point"),
                       ("boundary-weight", "infinite-volume boundary weight of a rectangle")):
        sub.add_parser(name, parents=[common], help=text)
    v = sub.add_parser("verify", parents=[common], help="run invariant checks")
    v.add_argument("suite", choices=("rect", "spectral", "onedim", "strips", "halfstrip", "corner",
                                     "boundary", "eigen", "all"))
    e = sub.add_parser("export", parents=[common], help="CSV samples for plotting")
    e.add_argument("kind", choices=("logdet", "roots", "strip", "halfplane"))
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = dict(vars(ns))
    values.pop("command", None)
    values.pop("suite", None)
    values.pop("kind", None)
    cfg_file = values.pop("config", None)
    merged = read_config(cfg_file) if cfg_file else {}
    if "face" in values:
        merged.pop("dihedral", None)
    if "dihedral" in values:
        merged.pop("face", None)
        values["dihedral"] = tuple(values["dihedral"])
    merged.update(values)
    return replace(RunConfig(), **merged)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        needs_boundary = ns.command == "boundary-weight" or (
            ns.command == "verify" and ns.suite in ("boundary", "all"))
        cfg.validate(needs_boundary)
        if ns.command == "verify":
            return cmd_verify(cfg, ns.suite)
        if ns.command == "export":
            return cmd_export(cfg, ns.kind)
        handler = {
            "free-energy": cmd_free_energy,
            "surface-power": cmd_surface_power,
            "halfstrip": cmd_halfstrip,
            "corner": cmd_corner,
            "boundary-weight": cmd_boundary_weight,
        }[ns.command]
        return handler(cfg)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QuadratureNotConverged as exc:
        print(f"error: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except GuillotineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION


if __name__ == "__main__":
    sys.exit(main())
