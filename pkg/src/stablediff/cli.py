"""Command-line front end.

Exit codes: 0 success, 2 invalid input or arguments, 3 a solver did not reach
its discrepancy target (the best iterate is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .closedform import FirstMethodConfig
from .dsm import DsmConfig
from .errors import StableDiffError
from .methods import METHODS, differentiate
from .signal import SampledSignal, l2_norm, make_grid

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3

EXPERIMENTS = ("fig1", "fig12", "table1", "fig2")

log = logging.getLogger("stablediff")


class InputError(Exception):
    pass


def read_signal_csv(stream) -> SampledSignal:
    """Parse a ``t,f`` CSV on a uniform grid covering [0, 1]."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("line 1: empty input") from None
    if [h.strip() for h in header] != ["t", "f"]:
        raise InputError(f"line 1: expected header 't,f', got {','.join(header)!r}")
    ts, fs = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise InputError(f"line {lineno}: expected 2 columns, got {len(row)}")
        try:
            ts.append(float(row[0]))
            fs.append(float(row[1]))
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric value in {row!r}") from None
        if not (np.isfinite(ts[-1]) and np.isfinite(fs[-1])):
            raise InputError(f"line {lineno}: non-finite value")
    if len(ts) < 3:
        raise InputError(f"need at least 3 samples, got {len(ts)}")
    grid = make_grid(len(ts))
    dev = np.abs(np.asarray(ts) - grid.nodes)
    if dev.max() > 1e-9:
        bad = int(np.argmax(dev))
        raise InputError(
            f"line {bad + 2}: t={ts[bad]!r} is off the uniform grid on [0, 1] "
            f"(expected {grid.nodes[bad]!r})")
    return SampledSignal(grid, fs)


def write_signal_csv(stream, u: SampledSignal):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "u"])
    for t, v in zip(u.nodes, u.values):
        w.writerow([format(t, ".17g"), format(v, ".17g")])


def _first_config(args) -> FirstMethodConfig:
    if args.alpha is not None and (args.k is not None or args.c is not None):
        raise InputError("--alpha cannot be combined with --k/--c")
    return FirstMethodConfig(alpha=args.alpha,
                             k=0.5 if args.k is None else args.k,
                             c=1.0 if args.c is None else args.c)


def _dsm_config(args) -> DsmConfig:
    return DsmConfig(q=args.q)


def cmd_diff(args) -> int:
    if args.delta is not None and args.delta_rel is not None:
        raise InputError("--delta and --delta-rel are mutually exclusive")
    if args.input in (None, "-"):
        f = read_signal_csv(sys.stdin)
    else:
        with open(args.input, newline="") as fh:
            f = read_signal_csv(fh)
    delta = args.delta
    if args.delta_rel is not None:
        delta = args.delta_rel * l2_norm(f)
    first = _first_config(args)
    if args.method != "first" and delta is None:
        raise InputError(f"--method {args.method} requires --delta or --delta-rel")
    if args.method == "first" and first.alpha is None and delta is None:
        raise InputError("--method first requires --alpha, --delta or --delta-rel")
    est = differentiate(f, args.method, delta, first=first, dsm_cfg=_dsm_config(args))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_signal_csv(fh, est.u)
    else:
        buf = io.StringIO()
        write_signal_csv(buf, est.u)
        sys.stdout.write(buf.getvalue())
    if not est.converged:
        print(f"warning: {args.method} did not reach the discrepancy band; "
              "wrote the closest iterate", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _merge_table1(reports):
    merged = experiments.ExperimentReport(
        "table1", {"cases": "1,2", **{k: v for k, v in reports[0].params.items() if k != "case"}},
        reports[0].grid)
    for rep in reports:
        case = rep.params["case"]
        merged.metrics.extend({"case": case, **row} for row in rep.metrics)
        merged.curves.update({f"{k}_case{case}": v for k, v in rep.curves.items()})
    return merged


def cmd_experiment(args) -> int:
    name = args.name
    if name in ("fig1", "fig12"):
        if args.delta is not None and args.delta < 0:
            raise InputError("--delta must be >= 0")
        run = experiments.run_fig1 if name == "fig1" else experiments.run_fig12
        report = run(0.02 if args.delta is None else args.delta, args.n or 100,
                     first=_first_config(args), dsm_cfg=_dsm_config(args))
        converged = all(row["converged"] for row in report.metrics)
    elif name == "table1":
        delta_rel = 0.01 if args.delta_rel is None else args.delta_rel
        if delta_rel < 0:
            raise InputError("--delta-rel must be >= 0")
        if args.seeds < 1:
            raise InputError("--seeds must be >= 1")
        n_list = (args.n,) if args.n else experiments.TABLE1_SIZES
        cases = (args.case,) if args.case else (1, 2)
        reports = [experiments.run_table1(c, delta_rel, n_list, args.seeds,
                                          green_rule=args.green_rule, dsm_cfg=_dsm_config(args))
                   for c in cases]
        report = reports[0]
        if len(reports) > 1:
            report = _merge_table1(reports)
        else:
            report.metrics = [{"case": args.case, **row} for row in report.metrics]
        converged = all(row["converged"] == args.seeds for row in report.metrics)
    else:
        delta_rel = 0.02 if args.delta_rel is None else args.delta_rel
        if delta_rel < 0:
            raise InputError("--delta-rel must be >= 0")
        report = experiments.run_fig2(delta_rel, args.n or 100, args.seed,
                                      green_rule=args.green_rule, dsm_cfg=_dsm_config(args))
        converged = all(row["converged"] for row in report.metrics)
    curves, metrics = experiments.write_report(report, args.out)
    print(report.summary())
    print(f"wrote {curves} and {metrics}", file=sys.stderr)
    if not converged:
        print("warning: some solver runs did not reach the discrepancy band", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise InputError("--repeats must be >= 1")
    times = experiments.bench_cpu(args.n or 100, args.repeats,
                                  0.02 if args.delta is None else args.delta, args.alpha)
    print("method,median_seconds")
    for method, t in times.items():
        print(f"{method},{t:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablediff",
                                     description="Stable differentiation of noisy samples.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--alpha", type=float)
        p.add_argument("--k", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--delta-rel", type=float)
        p.add_argument("--q", type=float, default=2.0)
        p.add_argument("--n", type=int)

    p = sub.add_parser("diff", help="differentiate a t,f CSV")
    common(p)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--in", dest="input", help="input CSV (default stdin)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("experiment", help="run a named experiment")
    common(p)
    p.add_argument("name", choices=EXPERIMENTS)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--case", type=int, choices=(1, 2))
    p.add_argument("--green-rule", choices=("linear", "trapezoid"), default="linear")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="time the three methods on the fig1 problem")
    common(p)
    p.add_argument("--repeats", type=int, default=20)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, StableDiffError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
