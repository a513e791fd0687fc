"""Command line interface.

Subcommands: ``solve`` (one h), ``sweep`` (h list against the limit),
``limit`` (limit block only), ``verify`` (acceptance suite).  Exit codes:
0 success, 1 error or failed verification, 2 degenerate configuration
(no occupied state, the solution is trivially zero).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ConditionViolated, SPWellError
from .harness import DECAY_HEADER, DEFAULT_SWEEP, emit, run_single, run_sweep
from .limit import compute_limit
from .model import SystemParams, build_grid, load_params

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGENERATE = 2


def _params(args) -> SystemParams:
    p = load_params(args.config) if args.config else SystemParams()
    if getattr(args, "h", None) is not None:
        p = replace(p, h=args.h)
    return p


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _cmd_solve(args) -> int:
    p = _params(args)
    out = Path(args.out) if args.out else None
    trace = out / "trace.csv" if (out and args.trace) else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    try:
        result = run_single(p, trace_path=trace)
    except ConditionViolated as exc:
        print(f"degenerate configuration: {exc}")
        print("solution is trivial: V = 0, no occupied states")
        return EXIT_DEGENERATE
    sol = result.solution
    print(f"h = {p.h:g}, grid n = {sol.V.grid.n}, dx = {sol.V.grid.dx:g}")
    print(f"converged in {sol.iterations} iterations, residual {sol.residual:.3e}")
    print(f"J = {sol.j_history[-1]:.12g}, occupied states: {sol.spectrum.count}")
    for i, lam in enumerate(sol.spectrum.values, start=1):
        print(f"  eps_{i} = {lam:.12g}")
    for i, rep in enumerate(result.decay, start=1):
        if rep.applicable:
            print(
                f"  decay {i}: fitted_rate*h = {rep.fitted_rate * p.h:.6g}, "
                f"weighted norm = {rep.weighted_norm:.6g}"
            )
    if out:
        _write_rows(
            out / "solution.csv",
            ["x", "V", "density"],
            [
                [repr(float(x)), repr(float(v)), repr(float(d))]
                for x, v, d in zip(sol.V.x, sol.V.values, sol.density.values)
            ],
        )
        _write_rows(
            out / "decay.csv",
            DECAY_HEADER,
            [
                [repr(float(p.h)), i, repr(rep.fitted_rate * p.h),
                 repr((1.0 - p.delta_agmon) * float(np.sqrt(-p.eps_S))),
                 repr(rep.weighted_norm)]
                for i, rep in enumerate(result.decay, start=1)
                if rep.applicable
            ],
        )
        from . import plots

        plots.plot_single(result, out)
        print(f"wrote {out}/solution.csv, {out}/decay.csv, {out}/potential.svg")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    p = _params(args)
    if args.h_list:
        try:
            h_list = tuple(float(tok) for tok in args.h_list.split(","))
        except ValueError:
            print(f"bad --h-list: {args.h_list!r}", file=sys.stderr)
            return EXIT_ERROR
    else:
        h_list = DEFAULT_SWEEP
    try:
        report = run_sweep(p, h_list)
    except ConditionViolated as exc:
        print(f"degenerate configuration: {exc}")
        return EXIT_DEGENERATE
    lim = report.limit
    print(
        f"limit: theta = {lim.theta:.12g}, N = {lim.reference.N}, N1 = {lim.N1}, "
        f"mu weight = {lim.mu.mass():.12g}"
    )
    for r in report.rows:
        if r.flag:
            print(f"h = {r.h:g}: FAILED ({r.flag})")
        else:
            print(
                f"h = {r.h:g}: n = {r.n_grid}, occupied = {r.count_occupied}, "
                f"sup_err = {r.sup_err:.6g}, holder_err = {r.holder_err:.6g}, "
                f"mass = {r.mass:.9g}"
            )
    paths = emit(report, args.out, include_timing=args.timing)
    print("wrote " + ", ".join(str(q) for q in paths))
    return EXIT_ERROR if any(r.flag for r in report.rows) else EXIT_OK


def _cmd_limit(args) -> int:
    p = _params(args)
    try:
        lim = compute_limit(p)
    except ConditionViolated as exc:
        print(f"degenerate configuration: {exc}")
        return EXIT_DEGENERATE
    rs = lim.reference
    print(f"theta = {lim.theta:.15g}")
    print(f"N = {rs.N}, N1 = {lim.N1}")
    for i in range(1, rs.N + 1):
        print(f"  e_{i} = {rs.e(i):.15g}")
    print(f"mu weight = {lim.mu.mass():.15g} at x0 = {p.x0:g}")
    print(f"(reference truncation R = {rs.radius:g}, grid {rs.dx:g})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        g = build_grid(p)
        v0 = lim.V0.sample(g)
        _write_rows(
            out / "v0.csv",
            ["x", "V0"],
            [[repr(float(x)), repr(float(v))] for x, v in zip(v0.x, v0.values)],
        )
        print(f"wrote {out}/v0.csv")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .acceptance import run_acceptance

    p = load_params(args.config) if args.config else SystemParams()
    results = run_acceptance(p)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_ERROR if failed else EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spwell",
        description="1D Schrodinger-Poisson solver with squeezing quantum well",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp_solve = sub.add_parser("solve", help="solve one configuration")
    sp_solve.add_argument("--config", help="key = value configuration file")
    sp_solve.add_argument("--h", type=float, help="override the well radius h")
    sp_solve.add_argument("--out", help="directory for CSV output")
    sp_solve.add_argument("--trace", action="store_true", help="write SCF iteration trace")
    sp_solve.set_defaults(fn=_cmd_solve)

    sp_sweep = sub.add_parser("sweep", help="h sweep against the limit")
    sp_sweep.add_argument("--config", help="key = value configuration file")
    sp_sweep.add_argument("--h-list", help="comma separated decreasing h values")
    sp_sweep.add_argument("--out", default="out", help="output directory (default: out)")
    sp_sweep.add_argument(
        "--timing",
        action="store_true",
        help="record wall-clock runtime_ms in sweep.csv (breaks byte reproducibility)",
    )
    sp_sweep.set_defaults(fn=_cmd_sweep)

    sp_limit = sub.add_parser("limit", help="compute the h -> 0 limit block")
    sp_limit.add_argument("--config", help="key = value configuration file")
    sp_limit.add_argument("--out", help="directory for V0 samples CSV")
    sp_limit.set_defaults(fn=_cmd_limit)

    sp_verify = sub.add_parser("verify", help="run the acceptance suite")
    sp_verify.add_argument("--config", help="key = value configuration file")
    sp_verify.set_defaults(fn=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SPWellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
