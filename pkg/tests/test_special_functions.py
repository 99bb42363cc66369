from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import airy, erfc

from fracairy.errors import ConfigError, NonConvergence, SectorViolation
from fracairy.special_functions import (
    MLParams,
    WrightParams,
    f_wright,
    m_wright,
    mittag_leffler,
    series_radius,
    tail_bound_constants,
    wright,
    wright_phi,
    wright_phi_hankel,
    wright_tail_bound,
    wright_with_error,
)

from _oracles import wright_series

OMEGA = cmath.exp(2j * math.pi / 3)

# frozen from the mpmath series in _oracles
WRIGHT_REFERENCE = [
    ((-0.25, 0.5, -2.0), 0.1473954437399173),
    ((-0.3, 0.7, 3.0 * OMEGA), -0.2653647039246216 + 0.3227078555907686j),
    ((-1 / 6, 1.0, 5.0), 33.83930319766475),
    ((-0.3, 0.2, -8.0), 0.00020221682387928821),
    ((-0.25, 1.5, 4.0 * OMEGA), -0.14889565309421451 - 0.13016449970801194j),
    ((-1 / 6, 0.0, -3.0), 0.02922827683425353),
]


@pytest.mark.parametrize(("args", "expected"), WRIGHT_REFERENCE)
def test_wright_phi_matches_reference(args, expected):
    rho, mu, z = args
    res = wright_phi(WrightParams(rho, mu), z)
    assert abs(complex(res.value) - expected) <= 1e-12 * max(1.0, abs(expected))


@pytest.mark.parametrize(("args", "expected"), WRIGHT_REFERENCE[:2])
def test_reference_values_reproduce_from_oracle(args, expected):
    assert abs(wright_series(*args) - expected) <= 1e-15 * max(1.0, abs(expected))


@pytest.mark.parametrize("z", [0.0, -0.5, -1.0, -3.0, 2.5])
def test_half_order_closed_form(z):
    # phi(-1/2, 1/2; -x) = exp(-x^2/4)/sqrt(pi)
    res = wright_phi(WrightParams(-0.5, 0.5), z)
    exact = math.exp(-z * z / 4) / math.sqrt(math.pi)
    assert abs(res.value - exact) <= 1e-12 * max(1.0, exact)
    assert abs(res.value - exact) <= max(res.abs_error_estimate, 1e-15)


@pytest.mark.parametrize("z", [-4.0, -1.0, 0.0, 0.7, 2.0, 5.0])
def test_m_wright_third_is_airy(z):
    # M_{1/3}(z) = 3^{2/3} Ai(z / 3^{1/3})
    ai = airy(z / 3 ** (1 / 3))[0]
    assert m_wright(1 / 3, z).value == pytest.approx(3 ** (2 / 3) * ai, abs=1e-12)


@pytest.mark.parametrize("nu", [0.1, 1 / 6, 0.3, 0.5, 0.8])
@pytest.mark.parametrize("z", [-3.0, -0.2, 0.4, 2.0])
def test_f_equals_nu_z_m(nu, z):
    assert f_wright(nu, z).value == pytest.approx(nu * z * m_wright(nu, z).value, abs=1e-12)


@pytest.mark.parametrize(
    ("rho", "mu", "z"),
    [(-0.25, 0.5, -2.0), (-1 / 6, 2 / 3, 3.0 * OMEGA), (-0.3, 0.9, 1.5 - 0.5j)],
)
def test_series_matches_hankel_loop(rho, mu, z):
    p = WrightParams(rho, mu)
    a = complex(wright_phi(p, z).value)
    b = complex(wright_phi_hankel(p, z).value)
    assert abs(a - b) <= 1e-10


@pytest.mark.parametrize(
    ("rho", "mu", "z"),
    [(-0.1, 0.2, -30.0), (-0.3, 0.5, 40.0 * OMEGA), (-0.25, 1.3, -100.0), (-1 / 6, 0.0, 60.0 * OMEGA)],
)
def test_large_argument_path_against_oracle(rho, mu, z):
    val, err = wright_with_error(rho, mu, np.array([z]))
    ref = wright_series(rho, mu, z)
    assert abs(complex(val[0]) - ref) <= 1e-11
    assert err[0] < 1e-9


def test_vectorized_matches_scalar():
    z = np.array([-5.0, -1.0, 0.0, 1.0, 3.0 * OMEGA, 25.0 * OMEGA])
    vec = wright(-0.2, 0.6, z)
    for zi, vi in zip(z, vec):
        ref = wright_series(-0.2, 0.6, zi)
        assert abs(vi - ref) <= 1e-11 * max(1.0, abs(ref))


@settings(max_examples=40, deadline=None)
@given(
    rho=st.floats(-0.45, -0.05),
    mu=st.floats(1.2, 2.5),
    x=st.floats(-6.0, 6.0),
)
def test_recurrence_in_mu(rho, mu, x):
    # (mu - 1) phi(mu) = phi(mu - 1) - rho z phi(mu + rho)
    lhs = (mu - 1) * wright(rho, mu, x)
    rhs = wright(rho, mu - 1, x) - rho * x * wright(rho, mu + rho, x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_parameter_validation():
    with pytest.raises(ConfigError, match="-1<rho<0"):
        WrightParams(-1.5, 0.5)
    with pytest.raises(ConfigError, match="0<nu<1"):
        m_wright(1.2, 0.3)
    with pytest.raises(ConfigError):
        MLParams(-0.5)


def test_series_cap_raises():
    with pytest.raises(NonConvergence):
        wright_phi(WrightParams(-0.3, 0.5), -3.0, max_terms=5)


def test_series_radius_positive():
    r = series_radius(-0.25, 0.5)
    assert r > 1.0


@pytest.mark.parametrize("argz", [math.pi, 2 * math.pi / 3, -0.9 * math.pi])
def test_tail_bound_dominates(argz):
    p = WrightParams(-0.2, 0.4)
    r = np.linspace(0.5, 40.0, 80)
    z = r * cmath.exp(1j * argz)
    vals, err = wright_with_error(p.rho, 0.4, z)
    bounds = np.array([wright_tail_bound(p, zz) for zz in z])
    assert np.all(np.abs(vals) - err <= bounds)
    C, nu = tail_bound_constants(p, argz)
    assert C > 0 and nu > 0


def test_tail_bound_sector():
    with pytest.raises(SectorViolation):
        wright_tail_bound(WrightParams(-0.2, 0.4), 5.0)


@pytest.mark.parametrize("z", [-2.0, -0.5, 0.0, 0.7, 1.0, 3.0])
def test_mittag_leffler_half(z):
    assert mittag_leffler(MLParams(0.5), z) == pytest.approx(math.exp(z * z) * erfc(-z), rel=1e-12)


@pytest.mark.parametrize("z", [-3.0, 0.0, 1.5, 4.0])
def test_mittag_leffler_exponential(z):
    assert mittag_leffler(MLParams(1.0), z) == pytest.approx(math.exp(z), rel=1e-13)


def test_mittag_leffler_two_parameter():
    # E_{a,a}(z) for a = 1 is exp(z)
    assert mittag_leffler(MLParams(1.0, 1.0), np.array([0.5, 2.0])) == pytest.approx(np.exp([0.5, 2.0]), rel=1e-13)
    # E_{1,2}(z) = (exp(z) - 1)/z
    assert mittag_leffler(MLParams(1.0, 2.0), 2.0) == pytest.approx((math.exp(2.0) - 1) / 2, rel=1e-13)


def test_mittag_leffler_cap_raises():
    with pytest.raises(NonConvergence):
        mittag_leffler(MLParams(0.5), 3.0, max_terms=10)


# frozen from a 3000-term mpmath sum at 60 digits; needs about 900 terms
ML_SMALL_ORDER = 1.120094095007576e46


def test_mittag_leffler_small_order_needs_many_terms():
    assert mittag_leffler(MLParams(0.3, 0.3), 4.0) == pytest.approx(ML_SMALL_ORDER, rel=1e-12)


def test_wright_error_estimate_flags_hard_points():
    # rho near -1 with the loop saddle far out: the value is unreliable and the estimate says so
    nu = 0.9
    z = -2.133 * cmath.exp(0.5j * (1 - nu) * math.pi / 2)
    _, err = wright_with_error(-nu, 1 - nu, np.array([z]))
    assert err[0] > 1e-8


# weights at and above one, and small |rho|, where the loop must enclose the branch point
@pytest.mark.parametrize("rho", [-1 / 60, -0.1, -0.3])
@pytest.mark.parametrize("mu", [1 + 1 / 60, 1.0, 1 - 1 / 60, 2.3])
@pytest.mark.parametrize("z", [-25.0, 25.0 * OMEGA])
def test_large_argument_weights_near_one(rho, mu, z):
    val, err = wright_with_error(rho, mu, np.array([z]))
    ref = wright_series(rho, mu, z)
    assert abs(complex(val[0]) - ref) <= 1e-12
    assert abs(complex(val[0]) - ref) <= err[0] + 1e-15
