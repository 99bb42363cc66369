from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracairy.errors import ConfigError, OrderOutOfRange
from fracairy.fractional_operators import (
    FractionalOrder,
    SampledFunction,
    TimeGrid,
    caputo_derivative,
    caputo_l1,
    caputo_power_rule,
    caputo_split,
    causal_convolve,
    l1_weights,
    rl_integral,
)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_order_out_of_range(alpha):
    with pytest.raises(OrderOutOfRange, match="0<alpha<1"):
        FractionalOrder(alpha)


def test_order_exponents():
    a = FractionalOrder(0.6)
    assert (a.third, a.two_thirds, a.one_minus_third, a.rho) == pytest.approx((0.2, 0.4, 0.8, -0.2))


@pytest.mark.parametrize(("t_max", "n"), [(0.0, 10), (1.0, 1), (1.0, 2.5), (float("inf"), 10)])
def test_time_grid_validation(t_max, n):
    with pytest.raises(ConfigError):
        TimeGrid(t_max, n)


def test_sampled_values_are_read_only():
    f = SampledFunction.from_callable(TimeGrid(1.0, 4), lambda t: t)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ConfigError):
        SampledFunction(TimeGrid(1.0, 4), np.zeros(3))


def test_l1_weights_cached_and_frozen():
    w = l1_weights(0.4, 16)
    assert w is l1_weights(0.4, 16)
    assert not w.flags.writeable


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_l1_converges_for_t_squared(alpha):
    errs = []
    for n in (64, 128, 256):
        g = TimeGrid(1.0, n)
        d = caputo_derivative(SampledFunction.from_callable(g, lambda t: t**2), alpha)
        errs.append(abs(d.values[-1] - caputo_power_rule(2.0, alpha, 1.0)))
    # the L1 scheme is of order 2 - alpha for smooth data
    assert math.log2(errs[0] / errs[1]) > 2 - alpha - 0.15
    assert math.log2(errs[1] / errs[2]) > 2 - alpha - 0.15


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_l1_exact_for_linear(alpha):
    g = TimeGrid(2.0, 50)
    d = caputo_l1(3 * g.nodes, g.h, alpha)
    exact = 3 * g.nodes ** (1 - alpha) / math.gamma(2 - alpha)
    assert np.max(np.abs(d - exact)) < 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9])
def test_rl_integral_exact_for_linear(alpha):
    g = TimeGrid(1.5, 40)
    J = rl_integral(SampledFunction.from_callable(g, lambda t: 2 + t), alpha).values
    t = g.nodes
    exact = 2 * t**alpha / math.gamma(1 + alpha) + t ** (1 + alpha) / math.gamma(2 + alpha)
    assert np.max(np.abs(J - exact)) < 1e-13


def test_caputo_of_rl_integral_recovers_function():
    alpha, errs = 0.4, []
    for n in (128, 512):
        g = TimeGrid(1.0, n)
        f = SampledFunction.from_callable(g, lambda t: np.sin(t))
        back = caputo_derivative(rl_integral(f, alpha), alpha).values
        errs.append(np.max(np.abs(back[n // 4 :] - f.values[n // 4 :])))
    assert errs[1] < errs[0] / 2
    assert errs[1] < 2e-3


def test_split_operator_on_singular_function():
    # for f = t^(b-1) the Caputo and Riemann-Liouville derivatives coincide on t > 0 with f(0) read as 0
    # only after the singular history is handled exactly; t^b with b = 1.5 is smooth enough for both
    alpha, b = 0.4, 1.5
    g = TimeGrid(1.0, 256)
    d = caputo_split(lambda t: t**b, g, alpha, 0.25, grading=2.0)
    t = g.nodes
    mask = t > 0.25
    exact = math.gamma(b + 1) / math.gamma(b + 1 - alpha) * t[mask] ** (b - alpha)
    assert np.max(np.abs(d[mask] - exact)) < 1e-4
    assert np.all(np.isnan(d[~mask]))


def test_split_operator_integrable_singularity():
    # f = t^(-1/2): the by-parts history with f(0) = 0 gives the Riemann-Liouville derivative
    alpha, b = 0.3, -0.5
    errs = []
    for n in (128, 256, 512):
        g = TimeGrid(1.0, n)
        d = caputo_split(lambda t: t**b, g, alpha, 0.125, grading=4.0)
        exact = math.gamma(b + 1) / math.gamma(b + 1 - alpha) * g.nodes[-1] ** (b - alpha)
        errs.append(abs(d[-1] - exact))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-4


def test_split_operator_needs_grid_node():
    with pytest.raises(ConfigError):
        caputo_split(lambda t: t, TimeGrid(1.0, 10), 0.5, 0.123)


@settings(max_examples=30, deadline=None)
@given(
    alpha=st.floats(0.05, 0.95),
    a=st.floats(-5, 5),
    b=st.floats(-5, 5),
)
def test_l1_is_linear(alpha, a, b):
    g = TimeGrid(1.0, 32)
    x, y = np.sin(3 * g.nodes), g.nodes**2
    lhs = caputo_l1(a * x + b * y, g.h, alpha)
    rhs = a * caputo_l1(x, g.h, alpha) + b * caputo_l1(y, g.h, alpha)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_causal_convolve_paths_agree():
    rng = np.random.default_rng(0)
    w, x = rng.standard_normal(3000), rng.standard_normal((3000, 2))
    fast = causal_convolve(w, x)
    slow = np.stack([np.convolve(w, x[:, j])[:3000] for j in range(2)], axis=1)
    assert np.allclose(fast, slow, atol=1e-10)
