"""Uniform grids on [0, 1], sampled signals, noise models and error metrics.

All norms in the package are the trapezoid-weighted discrete L2 norm, so a
signal behaves like a function on [0, 1] regardless of the node count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_i = i * h`` on [0, 1] including both endpoints."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise InvalidArgumentError(f"grid needs n >= 3 nodes, got {self.n!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights ``(h/2, h, ..., h, h/2)``."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        w.flags.writeable = False
        return w


def make_grid(n: int) -> Grid:
    """Return the uniform ``n``-node grid on [0, 1]; ``n`` must be at least 3."""
    return Grid(n)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Values of a function at the nodes of a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InvalidArgumentError(
                f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("signal values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "SampledSignal":
        return cls(grid, np.broadcast_to(fn(grid.nodes), (grid.n,)))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "SampledSignal":
        return SampledSignal(self.grid, values)

    def __len__(self):
        return self.grid.n


@dataclass(frozen=True)
class DeterministicCosine:
    """Additive noise ``delta * cos(10 pi x)`` with amplitude ``delta``."""

    delta: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise InvalidArgumentError("noise amplitude must be >= 0")


@dataclass(frozen=True)
class ScaledGaussian:
    """Seeded standard-normal noise rescaled to ``delta_rel`` times the signal norm."""

    delta_rel: float
    seed: int = 0

    def __post_init__(self):
        if not self.delta_rel >= 0:
            raise InvalidArgumentError("relative noise level must be >= 0")


NoiseSpec = Union[DeterministicCosine, ScaledGaussian]


def weighted_norm(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.dot(weights, np.square(values))))


def l2_norm(v: SampledSignal) -> float:
    """Trapezoid-weighted discrete L2 norm, ``sqrt(sum_i w_i v_i^2)``."""
    return weighted_norm(v.values, v.grid.weights)


def _check_same_grid(a: SampledSignal, b: SampledSignal):
    if a.grid != b.grid:
        raise InvalidArgumentError("signals live on different grids")


def rel_error(u: SampledSignal, y: SampledSignal) -> float:
    """Relative error ``||u - y|| / ||y||`` in the module norm."""
    _check_same_grid(u, y)
    ref = l2_norm(y)
    if ref == 0.0:
        raise DegenerateInputError("reference signal has zero norm")
    return weighted_norm(u.values - y.values, y.grid.weights) / ref


def add_cosine_noise(f: SampledSignal, delta: float) -> SampledSignal:
    """Return ``f + delta * cos(10 pi x)``."""
    if not delta >= 0:
        raise InvalidArgumentError("noise amplitude must be >= 0")
    return f.with_values(f.values + delta * np.cos(10.0 * np.pi * f.nodes))


def add_scaled_gaussian_noise(b: SampledSignal, delta_rel: float,
                              seed: int) -> tuple[SampledSignal, float]:
    """Add Gaussian noise scaled so that ``||e|| = delta_rel * ||b||``.

    The raw draw is ``N(0, 1)`` per node from a PCG64 generator seeded with
    ``seed``, which keeps outputs bit-identical across platforms.

    Returns
    -------
    noisy : SampledSignal
        ``b + e``.
    delta_abs : float
        ``||e||``, the absolute noise level in the module norm.
    """
    if not delta_rel >= 0:
        raise InvalidArgumentError("relative noise level must be >= 0")
    if delta_rel == 0:
        return b, 0.0
    bnorm = l2_norm(b)
    if bnorm == 0.0:
        raise DegenerateInputError("cannot scale noise relative to a zero signal")
    e = np.random.default_rng(seed).standard_normal(b.grid.n)
    e *= delta_rel * bnorm / weighted_norm(e, b.grid.weights)
    return b.with_values(b.values + e), weighted_norm(e, b.grid.weights)


def apply_noise(f: SampledSignal, spec: NoiseSpec) -> tuple[SampledSignal, float]:
    """Apply a noise model; returns the noisy signal and the norm of the added noise."""
    if isinstance(spec, DeterministicCosine):
        noisy = add_cosine_noise(f, spec.delta)
        return noisy, weighted_norm(noisy.values - f.values, f.grid.weights)
    if isinstance(spec, ScaledGaussian):
        return add_scaled_gaussian_noise(f, spec.delta_rel, spec.seed)
    raise InvalidArgumentError(f"unknown noise spec {spec!r}")
