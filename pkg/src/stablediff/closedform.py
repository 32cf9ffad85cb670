"""Closed-form solution of the regularized Volterra equation.

For ``alpha > 0`` the equation ``alpha u + int_0^x u = f`` has the solution

    u(x) = f(x) / alpha - (1 / alpha^2) int_0^x exp((s - x) / alpha) f(s) ds,

so differentiation reduces to one weighted running integral. No linear
system is solved and the parameter is chosen a priori as ``delta^k / c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidArgumentError
from .signal import SampledSignal


@dataclass(frozen=True)
class FirstMethodConfig:
    """Regularization parameter, given directly or via ``alpha = delta**k / c``."""

    alpha: Optional[float] = None
    k: float = 0.5
    c: float = 1.0

    def __post_init__(self):
        if self.alpha is not None:
            if not self.alpha > 0:
                raise InvalidArgumentError("alpha must be positive")
        else:
            _check_rule(self.k, self.c)

    def resolve(self, delta: Optional[float]) -> float:
        if self.alpha is not None:
            return self.alpha
        if delta is None:
            raise InvalidArgumentError("a noise level is required when alpha is not given")
        return alpha_apriori(delta, self.k, self.c)


def _check_rule(k, c):
    if not 0 < k < 1:
        raise InvalidArgumentError(f"exponent k must lie in (0, 1), got {k!r}")
    if not c > 0:
        raise InvalidArgumentError(f"scale c must be positive, got {c!r}")


def alpha_apriori(delta: float, k: float = 0.5, c: float = 1.0) -> float:
    """A-priori parameter ``delta**k / c`` with ``k`` in (0, 1).

    Both ``alpha -> 0`` and ``delta / alpha -> 0`` as ``delta -> 0``.
    """
    if not delta > 0:
        raise InvalidArgumentError(f"noise level must be positive, got {delta!r}")
    _check_rule(k, c)
    return delta ** k / c


def halfline_solution(f: SampledSignal, alpha: float) -> SampledSignal:
    """Evaluate the closed-form regularized derivative on the whole grid.

    The running integral ``J_i = int_0^{x_i} exp((s - x_i)/alpha) f(s) ds`` is
    accumulated by the trapezoid recurrence

        J_0 = 0,  J_i = r J_{i-1} + (h/2) (r f_{i-1} + f_i),  r = exp(-h/alpha),

    which only ever multiplies by ``r <= 1`` and therefore cannot overflow.
    """
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha!r}")
    h = f.grid.h
    r = np.exp(-h / alpha)
    fv = f.values
    # lfilter runs the recurrence with J_0 = (h/2) f_0; remove that seed
    j = lfilter([0.5 * h, 0.5 * h * r], [1.0, -r], fv)
    j -= 0.5 * h * fv[0] * r ** np.arange(f.grid.n)
    return f.with_values(fv / alpha - j / alpha ** 2)


def differentiate_first_method(f: SampledSignal, config: FirstMethodConfig,
                               delta: Optional[float] = None) -> SampledSignal:
    """Regularized derivative of ``f`` with the midpoint reflection.

    The closed form only sees data to the left of ``x``, so it is used on
    ``x >= 1/2``. On ``x < 1/2`` it is applied to ``g(t) = f(1 - t)`` and the
    result negated (``g'(t) = -f'(1 - t)``). The two halves may jump at 1/2.
    """
    alpha = config.resolve(delta)
    upper = halfline_solution(f, alpha).values
    reflected = halfline_solution(f.with_values(f.values[::-1]), alpha).values[::-1]
    n = f.grid.n
    lower = 2 * np.arange(n) < n - 1
    return f.with_values(np.where(lower, -reflected, upper))
