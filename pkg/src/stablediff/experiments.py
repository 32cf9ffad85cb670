"""Reproducible numerical experiments.

* ``fig1`` / ``fig12``: first derivatives of ``sin(pi t)`` and
  ``sin(2 pi t - pi/2)`` under ``delta cos(10 pi t)`` noise, all three methods.
* ``table1``: second derivatives through the Green's-function operator, DSM
  versus VR under scaled Gaussian noise, averaged over seeds.
* ``fig2``: the ``table1`` problems at one grid size, emitted as curves.
* :func:`bench_cpu`: wall times of the three methods on the fig1 problem.

Every run is deterministic given its parameters and seeds; only wall times
vary between runs.
"""

from __future__ import annotations

import csv
import logging
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .closedform import FirstMethodConfig
from .dsm import DsmConfig, dsm_solve
from .errors import InvalidArgumentError, NoConvergenceError
from .methods import differentiate
from .operators import condition_number, green_matrix
from .signal import (
    Grid,
    SampledSignal,
    add_scaled_gaussian_noise,
    l2_norm,
    make_grid,
    rel_error,
    weighted_norm,
)
from .vr import vr_discrepancy_search

logger = logging.getLogger(__name__)

INTERIOR = (0.1, 0.9)
TABLE1_SIZES = (20, 40, 60, 80, 100)
# noise amplitude assumed by the parameter choices when a run is noise-free
NOISE_FLOOR = 1e-3


@dataclass(eq=False)
class ExperimentReport:
    """Curves on one grid plus one metrics row per method (or per table cell)."""

    id: str
    params: dict
    grid: Grid
    curves: dict = field(default_factory=dict)
    metrics: list = field(default_factory=list)
    cells: list = field(default_factory=list)

    def curve(self, name: str) -> SampledSignal:
        return SampledSignal(self.grid, self.curves[name])

    def metric(self, method: str, key: str):
        for row in self.metrics:
            if row.get("method") == method:
                return row[key]
        raise KeyError(method)

    def summary(self) -> str:
        if not self.metrics:
            return f"{self.id}: no metrics"
        keys = list(self.metrics[0])
        lines = [f"# {self.id}  " + "  ".join(f"{k}={v}" for k, v in self.params.items()),
                 "  ".join(f"{k:>14}" for k in keys)]
        for row in self.metrics:
            lines.append("  ".join(f"{_fmt_cell(row[k]):>14}" for k in keys))
        return "\n".join(lines)


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def interior_rel_error(u: SampledSignal, y: SampledSignal,
                       lo: float = INTERIOR[0], hi: float = INTERIOR[1]) -> float:
    """Relative error over the nodes in ``[lo, hi]`` with trapezoid weights."""
    x = y.nodes
    mask = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    w = y.grid.weights[mask]
    return weighted_norm((u.values - y.values)[mask], w) / weighted_norm(y.values[mask], w)


# -- first derivatives ----------------------------------------------------------

FIRST_DERIVATIVE_PROBLEMS = {
    "fig1": (lambda t: np.sin(np.pi * t), lambda t: np.pi * np.cos(np.pi * t)),
    "fig12": (lambda t: np.sin(2 * np.pi * t - 0.5 * np.pi),
              lambda t: 2 * np.pi * np.cos(2 * np.pi * t - 0.5 * np.pi)),
}


def _run_first_derivative(name: str, delta: float, n: int,
                          first: Optional[FirstMethodConfig],
                          dsm_cfg: Optional[DsmConfig],
                          noise_floor: float) -> ExperimentReport:
    if not delta >= 0:
        raise InvalidArgumentError(f"noise amplitude must be >= 0, got {delta!r}")
    fn, dfn = FIRST_DERIVATIVE_PROBLEMS[name]
    grid = make_grid(n)
    f = SampledSignal.from_function(grid, fn)
    exact = SampledSignal.from_function(grid, dfn)
    cosine = np.cos(10.0 * np.pi * grid.nodes)
    f_delta = f.with_values(f.values + delta * cosine)
    delta_eff = max(delta, noise_floor)
    # DSM/VR compare residuals against the norm of the injected noise
    delta_norm = weighted_norm(delta_eff * cosine, grid.weights)
    first = first or FirstMethodConfig()

    report = ExperimentReport(name, {
        "n": n, "delta_amplitude": delta, "delta_effective": delta_eff,
        "delta_norm": delta_norm, "k": first.k, "c": first.c, "alpha": first.alpha,
    }, grid)
    report.curves["u_exact"] = exact.values
    for method in ("first", "dsm", "vr"):
        est = differentiate(f_delta, method, delta_eff if method == "first" else delta_norm,
                            first=first, dsm_cfg=dsm_cfg)
        report.curves[f"u_{method}"] = est.u.values
        param = est.params.get("alpha", est.params.get("a0_upper", est.params.get("alpha_upper")))
        report.metrics.append({
            "method": method,
            "rel_error": rel_error(est.u, exact),
            "rel_error_interior": interior_rel_error(est.u, exact),
            "n_linsolves": est.n_linsolves,
            "converged": est.converged,
            "parameter": float(param) if param is not None else float("nan"),
            "wall_time": est.elapsed,
        })
    return report


def run_fig1(delta: float = 0.02, n: int = 100, first: Optional[FirstMethodConfig] = None,
             dsm_cfg: Optional[DsmConfig] = None,
             noise_floor: float = NOISE_FLOOR) -> ExperimentReport:
    """``f = sin(pi t) + delta cos(10 pi t)``; exact derivative ``pi cos(pi t)``.

    The first method receives the amplitude ``delta``, DSM and VR receive the
    norm of the injected noise. A noise-free run (``delta = 0``) uses
    ``noise_floor`` as the amplitude for these parameter choices.
    """
    return _run_first_derivative("fig1", delta, n, first, dsm_cfg, noise_floor)


def run_fig12(delta: float = 0.02, n: int = 100, first: Optional[FirstMethodConfig] = None,
              dsm_cfg: Optional[DsmConfig] = None,
              noise_floor: float = NOISE_FLOOR) -> ExperimentReport:
    """As :func:`run_fig1` for ``f = sin(2 pi t - pi/2)``, where ``f'(0) = f'(1) = 0``."""
    return _run_first_derivative("fig12", delta, n, first, dsm_cfg, noise_floor)


# -- second derivatives ---------------------------------------------------------

def case_solution(case: int) -> Callable[[np.ndarray], np.ndarray]:
    """Exact second derivative ``u`` for the Green's-function test problems."""
    if case == 1:
        return lambda s: np.asarray(s, dtype=float)
    if case == 2:
        return lambda s: np.sin(2 * np.pi * np.asarray(s, dtype=float))
    raise InvalidArgumentError(f"case must be 1 or 2, got {case!r}")


def case_rhs(case: int) -> Callable[[np.ndarray], np.ndarray]:
    """``f(s) = int_0^1 K(s, t) u(t) dt`` for the case solution, in closed form.

    Case 2 gives ``-sin(2 pi s) / (4 pi^2)``: ``f'' = u`` with
    ``f(0) = f(1) = 0`` leaves no room for an affine term.
    """
    if case == 1:
        return lambda s: (np.asarray(s, dtype=float) ** 3 - s) / 6.0
    if case == 2:
        return lambda s: -np.sin(2 * np.pi * np.asarray(s, dtype=float)) / (4 * np.pi ** 2)
    raise InvalidArgumentError(f"case must be 1 or 2, got {case!r}")


def case2_rhs_as_printed(s):
    """The commonly quoted case-2 pair ``sin(2 pi s)/(4 pi^2) + s - 1``; kept
    only for comparison, it is not the image of ``sin(2 pi s)``."""
    s = np.asarray(s, dtype=float)
    return np.sin(2 * np.pi * s) / (4 * np.pi ** 2) + s - 1.0


@dataclass(frozen=True)
class Table1Cell:
    case: int
    n: int
    seed: int
    delta: float
    dsm_linsolves: int
    dsm_error: float
    dsm_converged: bool
    vr_linsolves: int
    vr_error: float
    vr_converged: bool


def _green_problem(case: int, n: int, rule: str):
    grid = make_grid(n)
    A = green_matrix(grid, rule)
    b = SampledSignal.from_function(grid, case_rhs(case))
    u = SampledSignal.from_function(grid, case_solution(case))
    return A, b, u


def _solve_green(A, b_delta, delta, dsm_cfg):
    dsm = dsm_solve(A, b_delta, delta, cfg=dsm_cfg)
    try:
        vr = vr_discrepancy_search(A, b_delta, delta)
        vr_ok = True
    except NoConvergenceError as exc:
        vr, vr_ok = exc.best, False
    return dsm, vr, vr_ok


def table1_cell(case: int, n: int, seed: int, delta_rel: float = 0.01,
                green_rule: str = "linear", dsm_cfg: Optional[DsmConfig] = None,
                noise_floor: float = 1e-6) -> Table1Cell:
    """One (case, n, seed) run; independent of any other cell."""
    A, b, u = _green_problem(case, n, green_rule)
    b_delta, delta = add_scaled_gaussian_noise(b, delta_rel, seed)
    delta = max(delta, noise_floor * l2_norm(b))
    dsm, vr, vr_ok = _solve_green(A, b_delta, delta, dsm_cfg)
    return Table1Cell(case, n, seed, delta, dsm.n_linsolves, rel_error(dsm.u, u), dsm.converged,
                      vr.n_solves, rel_error(vr.u, u), vr_ok)


def run_table1(case: int, delta_rel: float = 0.01, n_list: Sequence[int] = TABLE1_SIZES,
               n_seeds: int = 10, seeds: Optional[Sequence[int]] = None,
               green_rule: str = "linear", dsm_cfg: Optional[DsmConfig] = None,
               noise_floor: float = 1e-6) -> ExperimentReport:
    """Seed-averaged DSM/VR linear-solve counts and relative errors per grid size.

    Noise for seed ``s`` is drawn from a generator seeded with ``s`` alone, so
    each cell is reproducible on its own. ``noise_floor`` (relative to
    ``||b||``) is the noise level used when ``delta_rel`` is zero.
    """
    if not delta_rel >= 0:
        raise InvalidArgumentError("relative noise level must be >= 0")
    seeds = list(range(n_seeds)) if seeds is None else list(seeds)
    if not seeds:
        raise InvalidArgumentError("at least one seed is required")
    report = ExperimentReport("table1", {
        "case": case, "delta_rel": delta_rel, "seeds": len(seeds),
        "green_rule": green_rule,
    }, make_grid(max(n_list)))
    cells = []
    for n in n_list:
        row_cells = [table1_cell(case, n, s, delta_rel, green_rule, dsm_cfg, noise_floor)
                     for s in seeds]
        cells.extend(row_cells)
        A = green_matrix(make_grid(n), green_rule)
        report.metrics.append({
            "n": n,
            "dsm_linsol": float(np.mean([c.dsm_linsolves for c in row_cells])),
            "dsm_linsol_max": max(c.dsm_linsolves for c in row_cells),
            "dsm_rel_error": float(np.mean([c.dsm_error for c in row_cells])),
            "vr_linsol": float(np.mean([c.vr_linsolves for c in row_cells])),
            "vr_linsol_max": max(c.vr_linsolves for c in row_cells),
            "vr_rel_error": float(np.mean([c.vr_error for c in row_cells])),
            "converged": sum(c.dsm_converged and c.vr_converged for c in row_cells),
            "condition": condition_number(A),
        })
    report.cells = cells

    # curves: first seed at the largest grid
    n_max = max(n_list)
    A, b, u = _green_problem(case, n_max, green_rule)
    b_delta, delta = add_scaled_gaussian_noise(b, delta_rel, seeds[0])
    delta = max(delta, noise_floor * l2_norm(b))
    dsm, vr, _ = _solve_green(A, b_delta, delta, dsm_cfg)
    report.curves.update(u_exact=u.values, u_dsm=dsm.u.values, u_vr=vr.u.values)
    return report


def run_fig2(delta_rel: float = 0.02, n: int = 100, seed: int = 0,
             green_rule: str = "linear", dsm_cfg: Optional[DsmConfig] = None) -> ExperimentReport:
    """Both Green's-function cases at one size; curves suffixed ``_case1``/``_case2``."""
    grid = make_grid(n)
    report = ExperimentReport("fig2", {"n": n, "delta_rel": delta_rel, "seed": seed,
                                       "green_rule": green_rule}, grid)
    for case in (1, 2):
        A, b, u = _green_problem(case, n, green_rule)
        b_delta, delta = add_scaled_gaussian_noise(b, delta_rel, seed)
        if delta == 0:
            delta = 1e-6 * l2_norm(b)
        dsm, vr, vr_ok = _solve_green(A, b_delta, delta, dsm_cfg)
        report.curves[f"u_exact_case{case}"] = u.values
        report.curves[f"u_dsm_case{case}"] = dsm.u.values
        report.curves[f"u_vr_case{case}"] = vr.u.values
        for method, sol, nsol, ok in (("dsm", dsm.u, dsm.n_linsolves, dsm.converged),
                                      ("vr", vr.u, vr.n_solves, vr_ok)):
            report.metrics.append({
                "method": f"{method}_case{case}",
                "rel_error": rel_error(sol, u),
                "n_linsolves": nsol,
                "converged": ok,
                "u_first": float(sol.values[0]),
                "u_last": float(sol.values[-1]),
            })
    return report


def bench_cpu(n: int = 100, repeats: int = 20, delta: float = 0.02,
              alpha: Optional[float] = None) -> dict:
    """Median wall time per method on the fig1 problem.

    The first method gets ``alpha`` as input (default ``sqrt(delta)``); DSM
    and VR include their parameter searches.
    """
    if repeats < 1:
        raise InvalidArgumentError("repeats must be >= 1")
    grid = make_grid(n)
    cosine = np.cos(10.0 * np.pi * grid.nodes)
    f_delta = SampledSignal(grid, np.sin(np.pi * grid.nodes) + delta * cosine)
    delta_norm = weighted_norm(delta * cosine, grid.weights)
    first = FirstMethodConfig(alpha=alpha if alpha is not None else max(delta, NOISE_FLOOR) ** 0.5)
    times = {}
    for method in ("first", "dsm", "vr"):
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            differentiate(f_delta, method, delta_norm, first=first)
            samples.append(time.perf_counter() - start)
        times[method] = statistics.median(samples)
    return times


# -- CSV ------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_curves_csv(path, report: ExperimentReport) -> Path:
    path = Path(path)
    names = list(report.curves)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *names])
        for i, t in enumerate(report.grid.nodes):
            w.writerow([_fmt(t), *(_fmt(report.curves[k][i]) for k in names)])
    return path


def write_metrics_csv(path, report: ExperimentReport) -> Path:
    path = Path(path)
    keys = list(report.metrics[0]) if report.metrics else []
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for row in report.metrics:
            w.writerow([_fmt(row[k]) for k in keys])
    return path


def read_curves_csv(path) -> dict:
    """Read a curves file back into ``{column: array}``."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body])
    return {name: data[:, j] for j, name in enumerate(header)}


def write_report(report: ExperimentReport, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return (write_curves_csv(out / f"{report.id}_curves.csv", report),
            write_metrics_csv(out / f"{report.id}_metrics.csv", report))
