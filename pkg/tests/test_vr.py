import numpy as np
import pytest

from stablediff import make_grid
from stablediff.errors import InvalidArgumentError, NoConvergenceError
from stablediff.experiments import case_rhs, case_solution
from stablediff.operators import green_matrix, normal_equations, volterra_matrix
from stablediff.signal import SampledSignal, add_scaled_gaussian_noise, l2_norm, rel_error
from stablediff.vr import STOP_HIGH, STOP_LOW, VrLimits, vr_discrepancy_search, vr_solve


def green_case(case, n=100, rule="linear"):
    grid = make_grid(n)
    A = green_matrix(grid, rule)
    b = SampledSignal.from_function(grid, case_rhs(case))
    u = SampledSignal.from_function(grid, case_solution(case))
    return A, b, u


def test_zero_data_gives_zero(sample):
    f = sample(50, np.zeros_like)
    u = vr_solve(volterra_matrix(f.grid), f, 1e-3)
    assert np.all(u.values == 0)


def test_huge_alpha_limit(sample):
    f = sample(80, np.sin)
    A = volterra_matrix(f.grid)
    alpha = 1e12
    u = vr_solve(A, f, alpha)
    _, atf = normal_equations(A, f)
    assert l2_norm(u) <= l2_norm(f.with_values(atf)) / alpha * (1 + 1e-9)
    disc = l2_norm(f.with_values(A(u.values) - f.values))
    assert disc == pytest.approx(l2_norm(f), rel=1e-6)


@pytest.mark.parametrize("alpha,bound", [(1e-10, 1e-2), (1e-8, 1.5e-2)])
def test_near_unregularized_volterra(sample, alpha, bound):
    # the trapezoid matrix has a weakly damped alternating mode; at alpha=1e-8
    # it leaves a 1.2% error, at 1e-10 the solve is within 1%
    f = sample(200, lambda x: x ** 2 / 2)
    u = vr_solve(volterra_matrix(f.grid), f, alpha)
    assert rel_error(u, SampledSignal(f.grid, f.nodes)) <= bound


def test_noise_at_or_above_data_norm_rejected(sample):
    f = sample(40, lambda x: x)
    A = volterra_matrix(f.grid)
    with pytest.raises(InvalidArgumentError):
        vr_discrepancy_search(A, f, l2_norm(f))
    with pytest.raises(InvalidArgumentError):
        vr_discrepancy_search(A, f, 0.0)


def test_discrepancy_monotone_in_alpha(rng):
    A, b, _ = green_case(2, 60)
    b_delta, _ = add_scaled_gaussian_noise(b, 0.01, 3)
    for _ in range(20):
        a1, a2 = np.sort(10.0 ** rng.uniform(-14, 0, size=2))
        phi = [l2_norm(b.with_values(A(vr_solve(A, b_delta, a).values) - b_delta.values))
               for a in (a1, a2)]
        assert phi[0] <= phi[1] * (1 + 1e-10)


@pytest.mark.parametrize("case", [1, 2])
@pytest.mark.parametrize("seed", [0, 7])
def test_search_lands_in_band_and_solves_normal_equations(case, seed):
    A, b, _ = green_case(case)
    b_delta, delta = add_scaled_gaussian_noise(b, 0.01, seed)
    res = vr_discrepancy_search(A, b_delta, delta)
    assert STOP_LOW * delta <= res.discrepancy <= STOP_HIGH * delta
    T, atf = normal_equations(A, b_delta)
    resid = T @ res.u.values + res.alpha * res.u.values - atf
    assert np.linalg.norm(resid) <= 1e-10 * np.linalg.norm(atf)
    assert res.u.values[0] == 0.0 and res.u.values[-1] == 0.0
    assert 1 <= res.n_solves <= 60


def test_case2_average_error_matches_table():
    errs = []
    for seed in range(10):
        A, b, u = green_case(2)
        b_delta, delta = add_scaled_gaussian_noise(b, 0.01, seed)
        errs.append(rel_error(vr_discrepancy_search(A, b_delta, delta).u, u))
    assert 0.0379 / 2 <= np.mean(errs) <= 0.0379 * 2


def test_no_convergence_reports_best(sample):
    f = sample(60, np.sin)
    A = volterra_matrix(f.grid)
    f_delta = f.with_values(f.values + 1e-3 * np.cos(40 * f.nodes))
    with pytest.raises(NoConvergenceError) as info:
        vr_discrepancy_search(A, f_delta, 1e-3, VrLimits(max_solves=1))
    assert info.value.best.n_solves == 1
