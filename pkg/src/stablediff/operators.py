"""Discretized integral operators and the dense linear algebra around them.

Two operators are assembled on a :class:`~stablediff.signal.Grid`:

* the Volterra integration operator ``(Au)(x) = int_0^x u(s) ds``, by the
  composite trapezoid rule;
* the Green's-function operator of ``w'' = u`` with ``w(0) = w(1) = 0``,
  ``(Au)(s) = int_0^1 K(s, t) u(t) dt``, by nodal collocation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, NumericalFailureError
from .signal import Grid, SampledSignal


class OperatorKind(enum.Enum):
    VOLTERRA_TRAPEZOID = "volterra-trapezoid"
    GREEN_KERNEL = "green-kernel"


GREEN_RULES = ("trapezoid", "linear")


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """An ``n x n`` matrix acting on signals of one grid.

    For Green operators ``matrix = K @ quadrature`` where ``K[i, j] =
    K(x_i, x_j)`` and ``quadrature`` is the weight matrix of the collocation
    rule (diagonal for the trapezoid rule).
    """

    grid: Grid
    matrix: np.ndarray
    kind: OperatorKind
    rule: str = "trapezoid"
    quadrature: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.grid.n, self.grid.n):
            raise InvalidArgumentError(f"matrix shape {m.shape} does not match grid")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.grid.n

    def __call__(self, u: Union[SampledSignal, np.ndarray]):
        if isinstance(u, SampledSignal):
            return u.with_values(self.matrix @ u.values)
        return self.matrix @ np.asarray(u, dtype=float)

    def interior(self) -> np.ndarray:
        """Matrix with the first and last rows and columns removed."""
        return self.matrix[1:-1, 1:-1]


def volterra_matrix(grid: Grid) -> DenseOperator:
    """Trapezoid discretization of ``u -> int_0^x u``.

    Row ``i`` holds ``h/2, h, ..., h, h/2`` in columns ``0..i``; row 0 is zero.
    """
    n, h = grid.n, grid.h
    m = np.tril(np.full((n, n), h))
    m[:, 0] = 0.5 * h
    m[np.arange(n), np.arange(n)] = 0.5 * h
    m[0, 0] = 0.0
    return DenseOperator(grid, m, OperatorKind.VOLTERRA_TRAPEZOID)


def green_kernel(s, t):
    """Green's function ``K(s, t)`` of ``w'' = u`` with zero boundary values.

    ``s * (t - 1)`` for ``s < t`` and ``t * (s - 1)`` otherwise. Accepts scalars
    or broadcastable arrays in [0, 1].
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any((s < 0) | (s > 1) | (t < 0) | (t > 1)) or np.any(np.isnan(s)) or np.any(np.isnan(t)):
        raise InvalidArgumentError("Green kernel arguments must lie in [0, 1]")
    k = np.where(s < t, s * (t - 1.0), t * (s - 1.0))
    return float(k) if k.ndim == 0 else k


def _linear_mass(grid: Grid) -> np.ndarray:
    # P1 mass matrix on interior hat functions; endpoint columns stay zero
    n, h = grid.n, grid.h
    w = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    w[idx, idx] = 4.0 * h / 6.0
    w[idx[:-1], idx[:-1] + 1] = h / 6.0
    w[idx[1:], idx[1:] - 1] = h / 6.0
    # hats at x_1 and x_{n-2} also overlap the endpoint cells
    w[0, 1] = w[n - 1, n - 2] = h / 6.0
    return w


def green_matrix(grid: Grid, rule: str = "trapezoid") -> DenseOperator:
    """Collocation of ``u -> int_0^1 K(x_i, t) u(t) dt`` at the grid nodes.

    Parameters
    ----------
    grid : Grid
    rule : {"trapezoid", "linear"}
        ``"trapezoid"``: ``M[i, j] = w_j K(x_i, x_j)`` with composite trapezoid
        weights. ``"linear"``: exact integration of ``K(x_i, .)`` against the
        piecewise-linear interpolant of ``u`` built from interior hat
        functions; the interior block reproduces the conditioning of a
        Galerkin discretization.

    Notes
    -----
    Both rules leave the rows and columns of the two boundary nodes at zero,
    so any Tikhonov-type solution vanishes there.
    """
    if rule not in GREEN_RULES:
        raise InvalidArgumentError(f"unknown Green collocation rule {rule!r}")
    x = grid.nodes
    k = green_kernel(x[:, None], x[None, :])
    if rule == "trapezoid":
        quad = np.diag(grid.weights)
    else:
        quad = _linear_mass(grid)
    m = k @ quad
    m[0, :] = m[-1, :] = 0.0
    m[:, 0] = m[:, -1] = 0.0
    return DenseOperator(grid, m, OperatorKind.GREEN_KERNEL, rule, quad)


def adjoint(op: Union[DenseOperator, np.ndarray]) -> np.ndarray:
    """Discrete adjoint under the Euclidean pairing, i.e. the transpose."""
    m = op.matrix if isinstance(op, DenseOperator) else np.asarray(op)
    return m.T


def _as_matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, DenseOperator) else np.asarray(op, dtype=float)


def op_norm(op: Union[DenseOperator, np.ndarray], rtol: float = 1e-8,
            max_iter: int = 100_000) -> float:
    """Largest singular value by power iteration on ``A^T A``.

    Starts from the normalized all-ones vector so the result is reproducible.
    """
    a = _as_matrix(op)
    x = np.ones(a.shape[1]) / np.sqrt(a.shape[1])
    lam_old = None
    for _ in range(max_iter):
        y = a.T @ (a @ x)
        ynorm = np.linalg.norm(y)
        if ynorm == 0.0:
            # start vector in the null space; zero matrix or unlucky start
            if not np.any(a):
                return 0.0
            raise NumericalFailureError("power iteration start vector lies in the null space")
        lam = float(x @ y)
        x = y / ynorm
        if lam_old is not None and abs(lam - lam_old) <= rtol * lam:
            # one more Rayleigh quotient on the updated vector
            return float(np.linalg.norm(a @ x))
        lam_old = lam
    raise NumericalFailureError(f"power iteration did not converge in {max_iter} steps")


def condition_number(op: Union[DenseOperator, np.ndarray]) -> float:
    """Spectral condition number ``sigma_max / sigma_min``.

    Green operators are measured on their interior block, since the boundary
    rows are identically zero. Returns ``inf`` for numerically singular input.
    """
    if isinstance(op, DenseOperator) and op.kind is OperatorKind.GREEN_KERNEL:
        a = op.interior()
    else:
        a = _as_matrix(op)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return float("inf")
    if s[-1] <= s[0] * max(a.shape) * np.finfo(float).eps:
        return float("inf")
    return float(s[0] / s[-1])


def normal_equations(op: Union[DenseOperator, np.ndarray], rhs) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(A^T A, A^T f)`` with ``A^T A`` symmetrized exactly."""
    a = _as_matrix(op)
    f = rhs.values if isinstance(rhs, SampledSignal) else np.asarray(rhs, dtype=float)
    t = a.T @ a
    t = 0.5 * (t + t.T)
    return t, a.T @ f


def solve_shifted_spd(T: np.ndarray, a: float, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(T + a I) x = rhs`` by Cholesky factorization.

    ``T`` must be symmetric positive semidefinite and ``a > 0``.
    """
    if not a > 0:
        raise InvalidArgumentError(f"shift must be positive, got {a!r}")
    T = np.asarray(T, dtype=float)
    shifted = T + a * np.eye(T.shape[0])
    try:
        factor = scipy.linalg.cho_factor(shifted, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"Cholesky factorization failed for shift {a:g}") from exc
    return scipy.linalg.cho_solve(factor, np.asarray(rhs, dtype=float), check_finite=False)
