"""Command-line front end.

Usage:
    sshkink spectrum --W 1 --delta 0.2 --L 200 --window
    sshkink minimize --mu 1 --L 10
    sshkink kink --mu 1 --half-width 100 --out kink.json --csv kink.csv
    sshkink decay --input kink.json --tail 40:90
    sshkink hessian --mu 1 --sizes 40,100,200
    sshkink verify --suite schatten --draws 1000 --seed 7

Exit codes: 0 success, 1 a verification check failed, 2 usage or validation
error, 3 numerical failure, 4 solver did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, serialize, solvers, spectral, verify
from .errors import (DimensionMismatch, GapClosed, InvalidParams, NotConverged,
                     PositivityViolated, SSHError)
from .lattice import Closed, DimerizedParams, Window, build_operator, dimerized_configuration

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    W: Optional[float] = None
    delta: Optional[float] = None
    mu: float = 1.0
    L: Optional[int] = None
    half_width: Optional[int] = None
    window: bool = False
    tail: Optional[str] = None
    side: str = "right"
    seed: int = 0
    out: Optional[str] = None
    csv: Optional[str] = None
    input: Optional[str] = None
    suite: str = "all"
    draws: int = 100
    sizes: Optional[str] = None
    nodes_per_edge: int = 64
    beta: float = 0.5
    max_iters: int = 20000
    tol: float = 1e-10

    def solver_options(self) -> solvers.SolverOptions:
        return solvers.SolverOptions(beta=self.beta, max_iters=self.max_iters,
                                     residual_tol=self.tol)


def _parse_tail(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise InvalidParams(f"--tail expects a:b with integers, got {text!r}")
    return a, b


def _parse_sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise InvalidParams(f"--sizes expects comma-separated integers, got {text!r}")


def _write(cfg: RunConfig, document: dict, warnings=()) -> None:
    document = {"config": asdict(cfg), "warnings": list(warnings), **document}
    text = serialize.dumps(document)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(path: Optional[str], header, rows) -> None:
    if path:
        Path(path).write_text(serialize.csv_text(header, rows), encoding="utf-8")


def _require(value, flag):
    if value is None:
        raise InvalidParams(f"{flag} is required for this command")
    return value


def cmd_spectrum(cfg: RunConfig) -> int:
    params = DimerizedParams(_require(cfg.W, "--W"), _require(cfg.delta, "--delta"))
    L = _require(cfg.L, "--L")
    topo = Window(0, L) if cfg.window else Closed(L)
    config = dimerized_configuration(params, +1, topo)
    spec = spectral.eigendecompose(build_operator(config))
    warnings = []
    try:
        gap = spectral.spectral_gap(spec)
        g, zero = gap.g, gap.zero_mode_present
    except GapClosed as exc:
        g, zero = 0.0, True
        warnings.append(f"GapClosed: {exc}")
    if params.delta == 0:
        warnings.append("GapClosed: delta = 0 closes the gap of the infinite chain; "
                        "the reported gap is a finite-size effect")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    _write(cfg, {"eigenvalues": spec.eigenvalues, "gap": g, "zero_mode": zero,
                 "band_edges": list(spectral.band_edges(params))}, warnings)
    _write_csv(cfg.csv, ["k", "eigenvalue"], enumerate(spec.eigenvalues))
    return EXIT_OK


def _critical_point_doc(cp: solvers.CriticalPoint) -> dict:
    return {"critical_point": cp}


def _solve(cfg: RunConfig, fn) -> tuple[int, Optional[solvers.CriticalPoint]]:
    try:
        cp = fn()
        code = EXIT_OK
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        cp, code = exc.result, EXIT_NOT_CONVERGED
    except PositivityViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        cp, code = exc.result, EXIT_NUMERIC
    return code, cp


def cmd_minimize(cfg: RunConfig) -> int:
    L = _require(cfg.L, "--L")
    code, cp = _solve(cfg, lambda: solvers.minimize_closed(L, cfg.mu, cfg.solver_options()))
    if cp is not None:
        _write(cfg, _critical_point_doc(cp))
        _write_csv(cfg.csv, ["n", "t_n"], zip(cp.config.bond_index, cp.config.values))
    return code


def _tail_params(cfg: RunConfig) -> Optional[DimerizedParams]:
    if cfg.W is None and cfg.delta is None:
        return None
    return DimerizedParams(_require(cfg.W, "--W"), _require(cfg.delta, "--delta"))


def cmd_kink(cfg: RunConfig) -> int:
    N = _require(cfg.half_width, "--half-width")
    params = _tail_params(cfg) or solvers.solve_periodic_dimerized(solvers.TAIL_REFERENCE_L, cfg.mu)
    code, cp = _solve(cfg, lambda: solvers.solve_kink(N, cfg.mu, cfg.solver_options(), params))
    if cp is not None:
        _write(cfg, {"critical_point": cp, "tail_params": params})
        u = analysis.deviation(cp.config, params)
        _write_csv(cfg.csv, ["n", "t_n", "u_n"], zip(cp.config.bond_index, cp.config.values, u))
    return code


def cmd_decay(cfg: RunConfig) -> int:
    path = _require(cfg.input, "--input")
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        config = serialize.config_from_dict(doc["critical_point"]["config"])
        tp = doc["tail_params"]
        params = DimerizedParams(tp["W"], tp["delta"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InvalidParams(f"cannot read kink document {path}: {exc}")
    tail = _parse_tail(_require(cfg.tail, "--tail"))
    if cfg.side == "right":
        u, index = analysis.deviation(config, params, +1), config.bond_index
    else:
        # mirror the left half so distance from the core increases with the index
        u, index = analysis.deviation(config, params, -1), -config.bond_index - 1
    fit = analysis.fit_decay(u, tail, index)
    _write(cfg, {"fit": fit})
    keep = (index >= min(tail)) & (index <= max(tail)) & (np.abs(u) > analysis.NOISE_FLOOR)
    _write_csv(cfg.csv, ["n", "log_abs_u"], zip(index[keep], np.log(np.abs(u[keep]))))
    return EXIT_OK


def cmd_hessian(cfg: RunConfig) -> int:
    sizes = _parse_sizes(cfg.sizes or "40,100,200")
    results = analysis.coercivity_scan(cfg.mu, sizes)
    _write(cfg, {"scan": results})
    _write_csv(cfg.csv, ["L", "lambda_min"], [(r.L, r.lambda_min) for r in results])
    return EXIT_OK if all(r.lambda_min > 0 for r in results) else EXIT_CHECK


def cmd_verify(cfg: RunConfig) -> int:
    names = list(verify.SUITES) if cfg.suite == "all" else cfg.suite.split(",")
    unknown = [n for n in names if n not in verify.SUITES]
    if unknown:
        raise InvalidParams(f"unknown suite(s) {unknown}; choose from {list(verify.SUITES)}")
    results = verify.run_suites(names, cfg.seed, cfg.draws)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.suite}/{r.name}", file=sys.stderr)
    _write(cfg, {"seed": cfg.seed, "results": results,
                 "passed": all(r.passed for r in results)})
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "minimize": cmd_minimize,
    "kink": cmd_kink,
    "decay": cmd_decay,
    "hessian": cmd_hessian,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--W", type=float, help="mean hopping amplitude")
    common.add_argument("--delta", type=float, help="dimerization amplitude")
    common.add_argument("--mu", type=float, default=1.0, help="elastic stiffness")
    common.add_argument("--L", type=int, help="number of sites")
    common.add_argument("--half-width", type=int, help="kink half width N")
    common.add_argument("--window", action="store_true", help="open window instead of a ring")
    common.add_argument("--tail", help="index range a:b for decay fits")
    common.add_argument("--side", choices=("right", "left"), default="right")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="JSON output path (default stdout)")
    common.add_argument("--csv", help="CSV output path for series data")
    common.add_argument("--input", help="kink JSON produced by the kink command")
    common.add_argument("--suite", default="all", help="verification suite(s), comma separated")
    common.add_argument("--draws", type=int, default=100)
    common.add_argument("--sizes", help="comma-separated ring sizes for the Hessian scan")
    common.add_argument("--nodes-per-edge", type=int, default=64)
    common.add_argument("--beta", type=float, default=0.5, help="fixed-point damping")
    common.add_argument("--max-iters", type=int, default=20000)
    common.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")

    parser = argparse.ArgumentParser(prog="sshkink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__doc__)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(**vars(ns))
    try:
        return COMMANDS[cfg.command](cfg)
    except (InvalidParams, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SSHError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
