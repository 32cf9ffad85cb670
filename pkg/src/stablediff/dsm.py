"""Dynamical systems method (DSM) for ``Au = f`` with noisy ``f``.

The continuous flow ``u' = -u + (T + a(t))^{-1} A^T f`` with ``T = A^T A`` is
followed with geometric time steps::

    u_{n+1} = exp(-h_n) u_n + (1 - exp(-h_n)) (T + a_n I)^{-1} A^T f,
    h_n = q**n,  t_{n+1} = t_n + h_n,  a_n = a_0 / (1 + t_n),

and stopped by the discrepancy principle
``0.9 delta <= ||A u_n - f|| <= 1.001 delta``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, NoConvergenceError
from .operators import DenseOperator, normal_equations, op_norm, solve_shifted_spd
from .signal import SampledSignal, weighted_norm

logger = logging.getLogger(__name__)


class StopReason(enum.Enum):
    DISCREPANCY_BAND = "discrepancy-band"
    ITERATION_CAP = "iteration-cap"


@dataclass(frozen=True)
class DsmConfig:
    """Schedule and stopping parameters.

    ``refine_steps`` bisects the last time step when an update jumps over the
    stopping band; the shift ``a_n`` depends only on ``t_n`` so this costs no
    extra linear solves. With it disabled the plain geometric schedule runs to
    ``max_iters``.
    """

    q: float = 2.0
    stop_low: float = 0.9
    stop_high: float = 1.001
    max_iters: int = 50
    max_a0_trials: int = 50
    refine_steps: bool = True
    max_refinements: int = 60
    min_rel_shift: float = 1e-14

    def __post_init__(self):
        if not 1.0 <= self.q <= 2.0:
            raise InvalidArgumentError(f"step ratio q must lie in [1, 2], got {self.q!r}")
        if not 0.0 < self.stop_low < 1.0 < self.stop_high:
            raise InvalidArgumentError("stopping band must satisfy 0 < low < 1 < high")
        if self.max_iters < 0 or self.max_a0_trials < 1:
            raise InvalidArgumentError("iteration caps must be positive")


@dataclass(frozen=True, eq=False)
class DsmStep:
    t: float
    h: float
    a: float
    u: np.ndarray
    discrepancy: float


@dataclass(frozen=True, eq=False)
class DsmResult:
    u: SampledSignal
    a0: float
    n_linsolves: int
    n_iters: int
    stop_reason: StopReason
    discrepancy: float
    a0_trials: int = 0
    history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.stop_reason is StopReason.DISCREPANCY_BAND


def dsm_schedule(a0: float, q: float, n_steps: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Times ``t_n``, steps ``h_n = q**n`` and shifts ``a_n = a0 / (1 + t_n)``."""
    h = q ** np.arange(n_steps, dtype=float)
    t = np.concatenate(([0.0], np.cumsum(h)[:-1])) if n_steps else np.zeros(0)
    return t, h, a0 / (1.0 + t)


def next_a0(a: float, c: float) -> Optional[float]:
    """One update of the ``a_0`` search given ``c = ||A u_a - f|| / delta``.

    Returns ``None`` when ``1 < c < 2`` (accepted).
    """
    if c > 3.0:
        return a / (2.0 * (c - 1.0))
    if c >= 2.0:
        return a / 3.0
    if c <= 1.0:
        return 3.0 * a
    return None


class _System:
    """Normal equations of one problem plus solve counting."""

    def __init__(self, A: DenseOperator, f_delta: SampledSignal):
        self.A = A
        self.f = f_delta
        self.T, self.atf = normal_equations(A, f_delta)
        self.w = f_delta.grid.weights
        self.n_solves = 0

    def tikhonov(self, a: float) -> np.ndarray:
        self.n_solves += 1
        return solve_shifted_spd(self.T, a, self.atf)

    def residual(self, u: np.ndarray) -> np.ndarray:
        return self.A.matrix @ u - self.f.values

    def discrepancy(self, u: np.ndarray) -> float:
        return weighted_norm(self.residual(u), self.w)


def _check_inputs(delta, f_norm):
    if not delta > 0:
        raise InvalidArgumentError(f"noise level must be positive, got {delta!r}")
    if not f_norm > 0:
        raise InvalidArgumentError(f"data norm must be positive, got {f_norm!r}")


def _find_a0(sys: _System, delta: float, f_norm: float, cfg: DsmConfig):
    a = op_norm(sys.A) ** 2 * (delta / f_norm) / 3.0
    lo = hi = None  # largest a with c <= 1, smallest a with c >= 2
    best = None
    for trial in range(1, cfg.max_a0_trials + 1):
        u = sys.tikhonov(a)
        c = sys.discrepancy(u) / delta
        if best is None or abs(math.log(c / 1.5)) < best[0]:
            best = (abs(math.log(c / 1.5)), a, u)
        proposal = next_a0(a, c)
        if proposal is None:
            return a, u, trial
        if c <= 1.0:
            lo = a if lo is None else max(lo, a)
        else:
            hi = a if hi is None else min(hi, a)
        # the ratio rules can cycle between c < 1 and c > 2; bisect instead
        if lo is not None and hi is not None and not lo < proposal < hi:
            proposal = math.sqrt(lo * hi)
        a = proposal
    raise NoConvergenceError(
        f"no a0 with delta < ||A u - f|| < 2 delta after {cfg.max_a0_trials} trials",
        best=(best[1], sys.f.with_values(best[2]), lo, hi))


def find_a0(A: DenseOperator, f_delta: SampledSignal, delta: float, f_norm: float,
            cfg: Optional[DsmConfig] = None) -> tuple[float, SampledSignal, int]:
    """Search for ``a_0`` with ``delta < ||A u_{a_0} - f|| < 2 delta``.

    ``u_a = (T + a I)^{-1} A^T f``. The first guess is
    ``||A||^2 delta / (3 f_norm)``; with ``c = ||A u_a - f|| / delta`` the next
    guess is ``a / (2 (c - 1))`` for ``c > 3``, ``a / 3`` for ``2 <= c <= 3``
    and ``3 a`` for ``c <= 1``.

    Returns
    -------
    a0, u_a0, trials
        The accepted shift, its Tikhonov solution and the number of solves.
    """
    cfg = cfg or DsmConfig()
    _check_inputs(delta, f_norm)
    a0, u, trials = _find_a0(_System(A, f_delta), delta, f_norm, cfg)
    return a0, f_delta.with_values(u), trials


def _refine_step(sys, u_prev, w, h, delta, cfg):
    """Bisect the step size in (0, h) until the mixed iterate enters the band."""
    r_prev, r_w = sys.residual(u_prev), sys.residual(w)
    lo, hi = 0.0, h
    for _ in range(cfg.max_refinements):
        mid = 0.5 * (lo + hi)
        theta = math.exp(-mid)
        disc = weighted_norm(theta * r_prev + (1.0 - theta) * r_w, sys.w)
        if cfg.stop_low * delta <= disc <= cfg.stop_high * delta:
            return mid, theta * u_prev + (1.0 - theta) * w, disc
        if disc > cfg.stop_high * delta:
            lo = mid
        else:
            hi = mid
    return None


def dsm_solve(A: DenseOperator, f_delta: SampledSignal, delta: float,
              f_norm: Optional[float] = None, cfg: Optional[DsmConfig] = None,
              record: bool = False) -> DsmResult:
    """Run the DSM iteration from ``u_0 = u_{a_0}`` until the stopping band.

    Parameters
    ----------
    A : DenseOperator
    f_delta : SampledSignal
        Noisy right-hand side.
    delta : float
        Noise level ``||f_delta - f||`` in the module norm.
    f_norm : float, optional
        Norm used for ``delta_rel = delta / f_norm`` in the first ``a_0``
        guess. Defaults to ``||f_delta||``.
    cfg : DsmConfig, optional
    record : bool
        Keep every iterate in ``result.history``.

    Returns
    -------
    DsmResult
        ``n_linsolves`` counts every shifted solve, including the ``a_0``
        search. If the band is never met the iterate whose residual is closest
        to it is returned with ``stop_reason = ITERATION_CAP``.
    """
    cfg = cfg or DsmConfig()
    sys = _System(A, f_delta)
    if f_norm is None:
        f_norm = weighted_norm(f_delta.values, sys.w)
    _check_inputs(delta, f_norm)
    a0, u, trials = _find_a0(sys, delta, f_norm, cfg)
    lo_band, hi_band = cfg.stop_low * delta, cfg.stop_high * delta
    min_shift = cfg.min_rel_shift * float(np.linalg.norm(sys.T, 2))

    disc = sys.discrepancy(u)
    history = [DsmStep(0.0, 0.0, a0, u, disc)] if record else []
    best = (abs(math.log(disc / delta)), u, disc)

    def result(u, disc, n_iters, reason):
        return DsmResult(f_delta.with_values(u), a0, sys.n_solves, n_iters, reason,
                         disc, trials, history)

    if lo_band <= disc <= hi_band:
        return result(u, disc, 0, StopReason.DISCREPANCY_BAND)

    cached = {a0: u}  # u_{a0} doubles as the first stationary solution
    t = 0.0
    for n in range(cfg.max_iters):
        a_n = a0 / (1.0 + t)
        if a_n < min_shift:
            logger.info("DSM shift %.3g below resolution; stopping at step %d", a_n, n)
            break
        h = cfg.q ** n
        w = cached.pop(a_n) if a_n in cached else sys.tikhonov(a_n)
        theta = math.exp(-h)
        u_next = theta * u + (1.0 - theta) * w
        disc_next = sys.discrepancy(u_next)
        if disc_next < lo_band and cfg.refine_steps and disc > hi_band:
            refined = _refine_step(sys, u, w, h, delta, cfg)
            if refined is not None:
                h, u_next, disc_next = refined
        t += h
        u = u_next
        disc = disc_next
        if record:
            history.append(DsmStep(t, h, a_n, u, disc))
        if lo_band <= disc <= hi_band:
            return result(u, disc, n + 1, StopReason.DISCREPANCY_BAND)
        gap = abs(math.log(disc / delta)) if disc > 0 else math.inf
        if gap < best[0]:
            best = (gap, u, disc)
    else:
        n = cfg.max_iters
    logger.warning("DSM did not reach the discrepancy band; returning closest iterate")
    return result(best[1], best[2], n, StopReason.ITERATION_CAP)
