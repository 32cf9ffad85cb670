import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from stablediff import (
    FirstMethodConfig,
    InvalidArgumentError,
    SampledSignal,
    alpha_apriori,
    differentiate_first_method,
    halfline_solution,
    make_grid,
)
from stablediff.experiments import interior_rel_error


def regularized_oracle(fn, alpha, x):
    """Continuous regularized derivative by adaptive quadrature, with reflection."""
    out = []
    for xi in x:
        sign, g, y = (1.0, fn, xi) if 2 * xi >= 1 else (-1.0, lambda t: fn(1 - t), 1 - xi)
        j, _ = quad(lambda s: np.exp((s - y) / alpha) * g(s), 0, y, limit=400, epsabs=1e-14)
        out.append(sign * (g(y) / alpha - j / alpha ** 2))
    return np.array(out)


def test_alpha_apriori_values():
    assert alpha_apriori(0.01, 0.5, 1.0) == pytest.approx(0.1)
    a = alpha_apriori(1e-4, 0.5, 1.0)
    assert a == pytest.approx(0.01)
    assert 1e-4 / a == pytest.approx(0.01)


def test_alpha_apriori_limits():
    deltas = np.logspace(-2, -12, 11)
    alphas = np.array([alpha_apriori(d, 0.7, 2.0) for d in deltas])
    assert np.all(np.diff(alphas) < 0)
    assert np.all(np.diff(deltas / alphas) < 0)


@pytest.mark.parametrize("delta,k,c", [(0.1, 1.0, 1.0), (0.1, 0.0, 1.0), (0.1, 0.5, 0.0),
                                       (0.0, 0.5, 1.0), (-1.0, 0.5, 1.0)])
def test_alpha_apriori_bad(delta, k, c):
    with pytest.raises(InvalidArgumentError):
        alpha_apriori(delta, k, c)


def test_config():
    assert FirstMethodConfig(alpha=0.3).resolve(None) == 0.3
    assert FirstMethodConfig().resolve(0.04) == pytest.approx(0.2)
    with pytest.raises(InvalidArgumentError):
        FirstMethodConfig(alpha=-1.0)
    with pytest.raises(InvalidArgumentError):
        FirstMethodConfig(k=1.5)
    with pytest.raises(InvalidArgumentError):
        FirstMethodConfig().resolve(None)


def test_halfline_zero():
    z = SampledSignal(make_grid(20), np.zeros(20))
    assert not np.any(halfline_solution(z, 0.1).values)


def test_halfline_linear_oracle(sample):
    # f = x: u = 1 - exp(-x / alpha)
    f = sample(1001, lambda x: x)
    u = halfline_solution(f, 0.1)
    assert np.max(np.abs(u.values - (1 - np.exp(-f.nodes / 0.1)))) <= 1e-4


def test_halfline_constant_oracle(sample):
    f = sample(1001, lambda x: np.ones_like(x))
    u = halfline_solution(f, 0.1)
    assert np.max(np.abs(u.values - np.exp(-f.nodes / 0.1) / 0.1)) <= 1e-4


def test_halfline_matches_direct_trapezoid(sample):
    # direct composite trapezoid of the closed form, written out naively
    f = sample(64, lambda x: np.cos(3 * x) + x ** 2)
    alpha = 0.07
    x, h = f.nodes, f.grid.h
    direct = []
    for i in range(64):
        vals = np.exp((x[: i + 1] - x[i]) / alpha) * f.values[: i + 1]
        j = h * (vals.sum() - 0.5 * vals[0] - 0.5 * vals[-1]) if i else 0.0
        direct.append(f.values[i] / alpha - j / alpha ** 2)
    assert np.allclose(halfline_solution(f, alpha).values, direct, rtol=1e-12, atol=1e-10)


def test_halfline_bad_alpha(sample):
    with pytest.raises(InvalidArgumentError):
        halfline_solution(sample(5, np.sin), 0.0)


def test_halfline_overflow_safety(sample):
    f = sample(10_000, lambda x: np.sin(7 * x) + 2)
    u = halfline_solution(f, 1e-6)
    assert np.all(np.isfinite(u.values))
    assert np.all(np.isfinite(differentiate_first_method(f, FirstMethodConfig(alpha=1e-6)).values))


def linear_profile(f, alpha):
    """Regularized derivative of f = x plus the Euler-Maclaurin trapezoid term.

    Each half sees linear data ``g(s) = g0 + g1 s`` at distance ``d`` from its
    origin (the lower half is negated afterwards). The exact regularized value
    is ``g1 (1 - e) + g0 e / alpha`` with ``e = exp(-d / alpha)``; the trapezoid
    rule adds ``-(h^2 / 12) (phi'(d) - phi'(0)) / alpha^2`` where ``phi`` is the
    integrand ``exp((s - d) / alpha) g(s)``.
    """
    x, h = f.nodes, f.grid.h
    upper = x >= 0.5
    d = np.where(upper, x, 1 - x)
    g0 = np.where(upper, 0.0, 1.0)
    g1 = np.where(upper, 1.0, -1.0)
    e = np.exp(-d / alpha)
    exact = g1 * (1 - e) + g0 * e / alpha
    dphi = ((g0 + g1 * d) / alpha + g1) - e * (g0 / alpha + g1)
    return np.where(upper, 1.0, -1.0) * (exact - h ** 2 * dphi / (12 * alpha ** 2))


def test_first_method_linear_profile(sample):
    f = sample(1001, lambda x: x)
    u = differentiate_first_method(f, FirstMethodConfig(alpha=0.01))
    x = f.nodes
    mask = ((x >= 0.1) & (x <= 0.4)) | ((x >= 0.6) & (x <= 0.9))
    assert np.max(np.abs(u.values[mask] - linear_profile(f, 0.01)[mask])) <= 1e-3
    # plain trapezoid error h^2 x / (12 alpha^3) dominates: up to 0.076 at x = 0.9
    assert np.max(np.abs(u.values[mask] - 1)) == pytest.approx(0.0758, abs=1e-3)


@pytest.mark.parametrize("n,alpha", [(201, 0.05), (1001, 0.1), (64, 0.2)])
def test_first_method_reflection_sign(sample, n, alpha):
    # lower half: reflected data, negated; both halves follow the same profile
    f = sample(n, lambda x: x)
    u = differentiate_first_method(f, FirstMethodConfig(alpha=alpha)).values
    assert np.max(np.abs(u - linear_profile(f, alpha))) <= 0.05 * f.grid.h ** 2 / alpha ** 3


def test_first_method_midpoint_owner(sample):
    f = sample(101, lambda x: x ** 2)
    u = differentiate_first_method(f, FirstMethodConfig(alpha=0.05))
    assert u.values[50] == halfline_solution(f, 0.05).values[50]


@pytest.mark.parametrize("n", [100, 101, 400])
def test_first_method_odd_symmetry(sample, n):
    f = sample(n, lambda x: np.sin(np.pi * x))
    u = differentiate_first_method(f, FirstMethodConfig(alpha=0.05)).values
    odd = u + u[::-1]
    if n % 2:
        odd[n // 2] = 0.0  # the midpoint is its own mirror image
    assert np.max(np.abs(odd)) <= 1e-10


@pytest.mark.parametrize("n", [100, 1001])
def test_first_method_vs_quadrature_oracle(n):
    # sin(pi t) + 0.002 cos(10 pi t) with alpha = sqrt(delta); the trapezoid
    # rule deviates from the exact regularized solution by ~h^2 max|f| / (12 alpha^3)
    delta = 0.002
    alpha = delta ** 0.5
    fn = lambda t: np.sin(np.pi * t) + delta * np.cos(10 * np.pi * t)
    g = make_grid(n)
    f = SampledSignal.from_function(g, fn)
    u = differentiate_first_method(f, FirstMethodConfig(), delta)
    oracle = regularized_oracle(fn, alpha, g.nodes)
    bound = g.h ** 2 * np.max(np.abs(f.values)) / (12 * alpha ** 3)
    assert np.max(np.abs(u.values - oracle)) <= 1.05 * bound
    exact = SampledSignal.from_function(g, lambda t: np.pi * np.cos(np.pi * t))
    err = interior_rel_error(u, exact)
    oracle_err = interior_rel_error(SampledSignal(g, oracle), exact)
    # the exact regularized solution is already this far off (bias ~ alpha * pi)
    assert 0.18 < oracle_err < 0.20
    assert abs(err - oracle_err) <= bound / np.pi * 1.5


def test_first_method_converges_in_delta():
    g = make_grid(1001)
    exact = SampledSignal.from_function(g, lambda t: np.pi * np.cos(np.pi * t))
    errs = []
    for delta in (2e-2, 2e-3, 2e-4):
        f = SampledSignal.from_function(g, lambda t: np.sin(np.pi * t) + delta * np.cos(10 * np.pi * t))
        errs.append(interior_rel_error(differentiate_first_method(f, FirstMethodConfig(), delta), exact))
    assert errs[0] >= errs[1] >= errs[2]


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 300), st.integers(0, 2**32 - 1), st.floats(1e-3, 1.0),
       st.floats(-5, 5), st.floats(-5, 5))
def test_first_method_linearity(n, seed, alpha, a, b):
    r = np.random.default_rng(seed)
    g = make_grid(n)
    f1, f2 = SampledSignal(g, r.normal(size=n)), SampledSignal(g, r.normal(size=n))
    cfg = FirstMethodConfig(alpha=alpha)
    lhs = differentiate_first_method(f1.with_values(a * f1.values + b * f2.values), cfg).values
    rhs = a * differentiate_first_method(f1, cfg).values + b * differentiate_first_method(f2, cfg).values
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_first_method_linear_cost(sample):
    def best_time(n):
        f = sample(n, np.sin)
        cfg = FirstMethodConfig(alpha=0.01)
        times = []
        for _ in range(7):
            t0 = time.perf_counter()
            differentiate_first_method(f, cfg)
            times.append(time.perf_counter() - t0)
        return min(times)
    assert best_time(400_000) <= 3.0 * best_time(200_000)
