"""One entry point that differentiates a sampled signal with any method.

The DSM and VR solvers work on ``A u = f - f(0)`` with the trapezoid Volterra
matrix. Like the closed form, each uses the data on ``[0, x]`` only, so the
result is kept on ``x >= 1/2`` and the lower half comes from the reflected
signal ``f(1 - t)`` with the sign flipped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .closedform import FirstMethodConfig, differentiate_first_method
from .dsm import DsmConfig, dsm_solve
from .errors import InvalidArgumentError, NoConvergenceError
from .operators import DenseOperator, volterra_matrix
from .signal import SampledSignal, l2_norm
from .vr import VrLimits, vr_discrepancy_search

METHODS = ("first", "dsm", "vr")


@dataclass(frozen=True, eq=False)
class DerivativeEstimate:
    u: SampledSignal
    method: str
    n_linsolves: int = 0
    converged: bool = True
    params: dict = field(default_factory=dict)
    elapsed: float = 0.0


def _solve_half(method, A, rhs, delta, dsm_cfg, vr_limits):
    """Return ``(u, n_solves, converged, parameter)`` for one Volterra problem."""
    if l2_norm(rhs) <= delta:
        # u = 0 already fits the data to within the noise
        return np.zeros(rhs.grid.n), 0, True, None
    if method == "dsm":
        try:
            res = dsm_solve(A, rhs, delta, cfg=dsm_cfg)
        except NoConvergenceError as exc:
            a, u, *_ = exc.best
            return u.values, dsm_cfg.max_a0_trials, False, a
        return res.u.values, res.n_linsolves, res.converged, res.a0
    try:
        res = vr_discrepancy_search(A, rhs, delta, vr_limits)
        converged = True
    except NoConvergenceError as exc:
        res, converged = exc.best, False
    return res.u.values, res.n_solves, converged, res.alpha


def regularized_volterra(f: SampledSignal, delta: float, method: str,
                         dsm_cfg: Optional[DsmConfig] = None,
                         vr_limits: Optional[VrLimits] = None,
                         A: Optional[DenseOperator] = None) -> DerivativeEstimate:
    """DSM or VR derivative of ``f`` with the midpoint reflection."""
    if method not in ("dsm", "vr"):
        raise InvalidArgumentError(f"method must be 'dsm' or 'vr', got {method!r}")
    if not delta > 0:
        raise InvalidArgumentError(f"{method} needs a positive noise level, got {delta!r}")
    dsm_cfg = dsm_cfg or DsmConfig()
    A = A or volterra_matrix(f.grid)
    n = f.grid.n
    upper_rhs = f.with_values(f.values - f.values[0])
    g = f.values[::-1]
    lower_rhs = f.with_values(g - g[0])
    up, n_up, ok_up, p_up = _solve_half(method, A, upper_rhs, delta, dsm_cfg, vr_limits)
    lo, n_lo, ok_lo, p_lo = _solve_half(method, A, lower_rhs, delta, dsm_cfg, vr_limits)
    lower = 2 * np.arange(n) < n - 1
    u = np.where(lower, -lo[::-1], up)
    key = "a0" if method == "dsm" else "alpha"
    return DerivativeEstimate(f.with_values(u), method, n_up + n_lo, ok_up and ok_lo,
                              {key + "_upper": p_up, key + "_lower": p_lo, "delta": delta})


def differentiate(f: SampledSignal, method: str, delta: Optional[float] = None,
                  first: Optional[FirstMethodConfig] = None,
                  dsm_cfg: Optional[DsmConfig] = None,
                  vr_limits: Optional[VrLimits] = None) -> DerivativeEstimate:
    """Differentiate ``f`` with ``method`` in ``{"first", "dsm", "vr"}``.

    ``delta`` is the noise level: it feeds the a-priori rule of the first
    method (unless ``first.alpha`` is set) and the discrepancy principle of
    DSM and VR. The estimate records its wall time in ``elapsed``.
    """
    if method not in METHODS:
        raise InvalidArgumentError(f"unknown method {method!r}; choose from {METHODS}")
    start = time.perf_counter()
    if method == "first":
        first = first or FirstMethodConfig()
        alpha = first.resolve(delta)
        est = DerivativeEstimate(differentiate_first_method(f, FirstMethodConfig(alpha=alpha)),
                                 method, params={"alpha": alpha, "delta": delta})
    else:
        if delta is None:
            raise InvalidArgumentError(f"{method} needs a noise level")
        est = regularized_volterra(f, delta, method, dsm_cfg, vr_limits)
    elapsed = time.perf_counter() - start
    return DerivativeEstimate(est.u, est.method, est.n_linsolves, est.converged,
                              est.params, elapsed)
