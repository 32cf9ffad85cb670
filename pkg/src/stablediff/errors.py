"""Exception hierarchy shared by all solvers."""

from __future__ import annotations

from typing import Any


class StableDiffError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgumentError(StableDiffError, ValueError):
    """A precondition on an argument was violated."""


class DegenerateInputError(StableDiffError, ValueError):
    """Input data is degenerate (e.g. a zero reference norm)."""


class NumericalFailureError(StableDiffError, ArithmeticError):
    """A numerical kernel failed (factorization breakdown, no convergence of power iteration)."""


class NoConvergenceError(StableDiffError):
    """A parameter search could not meet its target.

    The best iterate found so far is attached as ``best`` so callers can still
    use it.
    """

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best
