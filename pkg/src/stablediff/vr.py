"""Variational (Tikhonov) regularization baseline.

Minimizes ``||Au - f||^2 + alpha ||u||^2`` through the normal equations and
picks ``alpha`` by the discrepancy principle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, NoConvergenceError
from .operators import DenseOperator, normal_equations, op_norm, solve_shifted_spd
from .signal import SampledSignal, l2_norm, weighted_norm

logger = logging.getLogger(__name__)

STOP_LOW = 0.9
STOP_HIGH = 1.001


@dataclass(frozen=True, eq=False)
class VrResult:
    u: SampledSignal
    alpha: float
    n_solves: int
    discrepancy: float


@dataclass(frozen=True)
class VrLimits:
    """Search limits: bracket expansion factor, solve cap, and the smallest
    admissible ``alpha`` relative to ``||A||^2``."""

    max_solves: int = 60
    expand: float = 10.0
    min_rel_alpha: float = 1e-14
    stop_low: float = STOP_LOW
    stop_high: float = STOP_HIGH


def vr_solve(A: DenseOperator, f_delta: SampledSignal, alpha: float) -> SampledSignal:
    """Minimizer of the Tikhonov functional: ``(A^T A + alpha I) u = A^T f``."""
    T, atf = normal_equations(A, f_delta)
    return f_delta.with_values(solve_shifted_spd(T, alpha, atf))


def vr_discrepancy_search(A: DenseOperator, f_delta: SampledSignal, delta: float,
                          limits: Optional[VrLimits] = None) -> VrResult:
    """Tikhonov solution whose residual lies in ``[0.9 delta, 1.001 delta]``.

    The residual ``phi(alpha) = ||A u_alpha - f||`` is nondecreasing in
    ``alpha``. Starting from ``alpha_0 = ||A||^2 delta / ||f||`` the search
    expands by factors of ``limits.expand`` until the band is bracketed, then
    bisects in ``log(alpha)``.

    Raises
    ------
    NoConvergenceError
        If the band is not reached within ``limits.max_solves`` solves or
        ``alpha`` hits its floor. ``exc.best`` is the iterate whose residual is
        closest to the band.
    """
    limits = limits or VrLimits()
    fnorm = l2_norm(f_delta)
    if not delta > 0:
        raise InvalidArgumentError("noise level must be positive")
    if not delta < fnorm:
        raise InvalidArgumentError(
            f"noise level {delta:g} is not below the data norm {fnorm:g}; u = 0 already fits")

    T, atf = normal_equations(A, f_delta)
    anorm2 = op_norm(A) ** 2
    alpha_min = limits.min_rel_alpha * anorm2
    w = f_delta.grid.weights
    lo_band, hi_band = limits.stop_low * delta, limits.stop_high * delta
    best = None
    n_solves = 0

    def evaluate(alpha):
        nonlocal n_solves, best
        u = solve_shifted_spd(T, alpha, atf)
        n_solves += 1
        phi = weighted_norm(A.matrix @ u - f_delta.values, w)
        res = VrResult(f_delta.with_values(u), alpha, n_solves, phi)
        gap = abs(math.log(phi / delta)) if phi > 0 else math.inf
        if best is None or gap < best[0]:
            best = (gap, res)
        return phi, res

    def fail(msg):
        b = best[1]
        raise NoConvergenceError(msg, VrResult(b.u, b.alpha, n_solves, b.discrepancy))

    alpha = anorm2 * delta / fnorm
    lo = hi = None  # alphas with phi below / above the band
    while True:
        phi, res = evaluate(alpha)
        if lo_band <= phi <= hi_band:
            return res
        if phi > hi_band:
            hi = alpha
        else:
            lo = alpha
        if lo is not None and hi is not None:
            break
        if n_solves >= limits.max_solves:
            fail("discrepancy band not bracketed within the solve cap")
        if hi is not None:
            alpha = alpha / limits.expand
            if alpha < alpha_min:
                fail(f"alpha fell below {alpha_min:g}; band unattainable")
        else:
            alpha = alpha * limits.expand

    while n_solves < limits.max_solves:
        alpha = math.sqrt(lo * hi)
        phi, res = evaluate(alpha)
        if lo_band <= phi <= hi_band:
            return res
        if phi > hi_band:
            hi = alpha
        else:
            lo = alpha
    fail(f"bisection exhausted {limits.max_solves} solves")
