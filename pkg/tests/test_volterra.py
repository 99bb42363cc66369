from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import erfc

from fracairy.errors import ConfigError, Instability, NoConvergence, SingularMatrix
from fracairy.fractional_operators import SampledFunction, TimeGrid
from fracairy.volterra import (
    VolterraSystem,
    apply_moments,
    discrete_residual,
    kernel_moments,
    solve_march,
    solve_picard,
)


def _unit_system(n, t_max=1.0, kernel=lambda s: np.ones_like(s), p=0.0):
    grid = TimeGrid(t_max, n)
    return VolterraSystem(SampledFunction.from_callable(grid, np.ones_like), kernel, p)


def test_exponential_benchmark_and_order():
    errs = [abs(solve_march(_unit_system(n)).values[-1] - math.e) for n in (128, 256, 512)]
    assert errs[-1] <= 2e-4
    assert math.log2(errs[0] / errs[1]) >= 1.8
    assert math.log2(errs[1] / errs[2]) >= 1.8


def test_march_and_picard_agree():
    system = _unit_system(256)
    march, picard = solve_march(system), solve_picard(system)
    assert np.max(np.abs(march.values - picard.values)) <= 1e-7
    assert march.residual_norm < 1e-12
    assert 0 < picard.contraction_ratio < 1


def test_abel_kernel():
    # phi = 1 + J^(1/2) phi has phi(t) = E_{1/2}(t^(1/2)) = exp(t) erfc(-t^(1/2))
    kernel = lambda s: s ** (-0.5) / math.gamma(0.5)
    exact = math.e * erfc(-1.0)
    errs = [abs(solve_march(_unit_system(n, kernel=kernel, p=0.5)).values[-1] - exact) for n in (128, 512)]
    assert errs[1] < errs[0] / 2
    assert errs[1] < 1e-3


def test_two_by_two_system_with_lead():
    # phi = (e^t, e^-t) with L = diag(2, 1) and the swap kernel
    grid = TimeGrid(1.0, 256)
    t = grid.nodes
    F = np.stack([2 * np.exp(t) - (1 - np.exp(-t)), np.exp(-t) - (np.exp(t) - 1)], axis=1)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    system = VolterraSystem(
        SampledFunction(grid, F), lambda s: np.broadcast_to(swap, (s.size, 2, 2)), lead=np.diag([2.0, 1.0])
    )
    sol = solve_march(system)
    exact = np.stack([np.exp(t), np.exp(-t)], axis=1)
    assert np.max(np.abs(sol.values - exact)) < 1e-5
    assert np.max(np.abs(solve_picard(system).values - sol.values)) < 1e-9


def test_moments_match_exact_integrals():
    # K(s) = s^(-1/2): A_0 + B_0 = int_0^h s^(-1/2) ds = 2 sqrt(h) and B_0 = (2/3) sqrt(h)
    system = _unit_system(8, kernel=lambda s: s**-0.5, p=0.5)
    A, B = kernel_moments(system)
    h = system.grid.h
    assert B[0, 0, 0] == pytest.approx(2 / 3 * math.sqrt(h), rel=1e-12)
    assert A[0, 0, 0] + B[0, 0, 0] == pytest.approx(2 * math.sqrt(h), rel=1e-12)
    k = 3
    assert A[k, 0, 0] + B[k, 0, 0] == pytest.approx(2 * (math.sqrt((k + 1) * h) - math.sqrt(k * h)), rel=1e-10)


def test_precomputed_moments_are_used():
    base = _unit_system(32)
    A, B = kernel_moments(base)
    system = VolterraSystem(base.forcing, moments=(A, B))
    assert np.allclose(solve_march(system).values, solve_march(base).values, atol=0, rtol=0)
    phi = solve_march(system).values.reshape(-1, 1)
    assert discrete_residual(system, phi) < 1e-12
    assert apply_moments(A, B, np.zeros((33, 1))).shape == (33, 1)


def test_configuration_errors():
    f = SampledFunction.from_callable(TimeGrid(1.0, 8), np.ones_like)
    with pytest.raises(ConfigError):
        VolterraSystem(f)
    with pytest.raises(ConfigError):
        VolterraSystem(f, lambda s: s, singular_exponent=1.0)
    with pytest.raises(ConfigError):
        VolterraSystem(f, moments=(np.zeros((4, 1, 1)), np.zeros((4, 1, 1))))


def test_singular_lead():
    f = SampledFunction(TimeGrid(1.0, 8), np.ones((9, 2)))
    system = VolterraSystem(f, lambda s: np.zeros((s.size, 2, 2)), lead=np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrix):
        solve_march(system)
    with pytest.raises(SingularMatrix):
        solve_picard(system)


def test_instability_guard():
    # the solution grows like exp(30 t)
    system = _unit_system(2000, t_max=10.0, kernel=lambda s: 30 * np.ones_like(s))
    with pytest.raises(Instability):
        solve_march(system)


def test_picard_reports_ratio_on_failure():
    with pytest.raises(NoConvergence) as info:
        solve_picard(_unit_system(64), max_iter=4)
    assert 0 < info.value.ratio < 1
