from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracairy.errors import DomainError, SingularPoint
from fracairy.fractional_operators import FractionalOrder
from fracairy.kernels import (
    Branch,
    KernelSpec,
    TimeOp,
    convolution_moments,
    decay_cutoff,
    kernel_decay_bound,
    kernel_eval,
    kernel_mass,
    kernel_time_transform,
    kernel_values,
)

from _oracles import kernel as kernel_oracle

# frozen from the mpmath oracle at t = 0.8 with mu = 2 alpha/3:
# (G(-1), G(0.5), G_x(0.5), G_xx(-0.7), V(0.5))
KERNEL_REFERENCE = {
    0.3: (0.048205841050396395, 0.10723959584902962, 0.036789739584018995, 0.014399174186187927, 0.056071056679918525),
    0.5: (0.0792440517821532, 0.1788940500833505, 0.0624903553697422, 0.024039840255693102, 0.09290638409031646),
    0.7: (0.10609583709961119, 0.2465031246777611, 0.08866884503417799, 0.03387758458524623, 0.12618089873095167),
}
CASES = (("G", -1.0, 0), ("G", 0.5, 0), ("G", 0.5, 1), ("G", -0.7, 2), ("V", 0.5, 0))


@pytest.mark.parametrize("alpha", sorted(KERNEL_REFERENCE))
@pytest.mark.parametrize("case", range(5))
def test_kernel_reference(alpha, case):
    branch, x, dx = CASES[case]
    spec = KernelSpec(Branch(branch), FractionalOrder(alpha), 2 * alpha / 3, dx)
    expected = KERNEL_REFERENCE[alpha][case]
    assert kernel_eval(spec, x, 0.8).value == pytest.approx(expected, rel=1e-10, abs=1e-14)


def test_reference_reproduces_from_oracle():
    assert kernel_oracle("G", 0.5, 1 / 3, -1.0, 0.8) == pytest.approx(KERNEL_REFERENCE[0.5][0], rel=1e-14)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("x", [-3.0, -0.2, 0.3, 2.0])
def test_oracle_agreement(alpha, x):
    spec = KernelSpec(Branch.G, alpha, 1 - alpha / 3)
    ref = kernel_oracle("G", alpha, 1 - alpha / 3, x, 0.4)
    assert kernel_eval(spec, x, 0.4).value == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_origin_value():
    # G^mu(0, t) = t^(mu-1) / (3 Gamma(mu))
    spec = KernelSpec(Branch.G, 0.5, 1 / 3)
    assert kernel_eval(spec, 0.0, 1.0).value == pytest.approx(1 / (3 * math.gamma(1 / 3)), rel=1e-14)


def test_continuity_at_origin():
    spec = KernelSpec(Branch.G, 0.6, 0.7)
    v0 = kernel_eval(spec, 0.0, 0.5).value
    for x in (-1e-7, 1e-7):
        assert kernel_eval(spec, x, 0.5).value == pytest.approx(v0, rel=1e-5)


def test_second_derivative_has_no_value_at_origin():
    spec = KernelSpec(Branch.G, 0.5, 1.0, dx_count=2)
    with pytest.raises(DomainError):
        kernel_eval(spec, 0.0, 1.0)


def test_domain_errors():
    spec = KernelSpec(Branch.G, 0.5, 1.0)
    with pytest.raises(DomainError):
        kernel_eval(spec, 0.3, 0.0)
    with pytest.raises(DomainError):
        kernel_values(spec, np.array([0.1]), np.array([-1.0]))
    with pytest.raises(DomainError):
        kernel_eval(KernelSpec(Branch.V, 0.5, 1.0), -0.5, 1.0)
    with pytest.raises(DomainError):
        KernelSpec(Branch.G, 0.5, 1.0, dx_count=-1)
    with pytest.raises(DomainError):
        TimeOp("fourier", 0.5)


def test_extended_v_branch_is_opt_in():
    spec = KernelSpec(Branch.V, 0.5, 1.0, extend=True)
    assert math.isfinite(kernel_eval(spec, -0.5, 1.0).value)


def test_vectorized_matches_pointwise():
    spec = KernelSpec(Branch.V, 0.4, 0.6, dx_count=1)
    x = np.array([0.1, 0.5, 2.0])
    t = np.array([0.3, 1.0])
    grid = kernel_values(spec, x[:, None], t[None, :])
    for i, xi in enumerate(x):
        for j, tj in enumerate(t):
            assert grid[i, j] == pytest.approx(kernel_eval(spec, xi, tj).value, rel=1e-13)


@pytest.mark.parametrize("alpha", [0.3, 0.7])
@pytest.mark.parametrize("mu", [lambda a: 2 * a / 3, lambda a: 1 - a / 3])
def test_mass_matches_quadrature(alpha, mu):
    spec = KernelSpec(Branch.G, alpha, mu(alpha))
    t = 0.6
    f = lambda x: kernel_eval(spec, x, t).value
    lo = -decay_cutoff(spec.alpha, -1) * t ** (alpha / 3)
    hi = decay_cutoff(spec.alpha, 1) * t ** (alpha / 3)
    total = quad(f, lo, 0, limit=200)[0] + quad(f, 0, hi, limit=200)[0]
    assert total == pytest.approx(kernel_mass(spec, t), rel=1e-8)


def test_time_transform_shifts_weight():
    spec = KernelSpec(Branch.G, 0.5, 1.0)
    assert kernel_time_transform(spec, TimeOp("caputo", 0.5)).mu == pytest.approx(0.5)
    assert kernel_time_transform(spec, TimeOp("rl_integral", 0.25)).mu == pytest.approx(1.25)


@pytest.mark.parametrize("branch,x", [("G", -2.0), ("G", 1.5), ("V", 1.0), ("G", -8.0), ("V", 6.0)])
def test_decay_bound_dominates(branch, x):
    spec = KernelSpec(Branch(branch), 0.5, 1 / 3)
    for t in (0.1, 0.5, 1.0):
        assert abs(kernel_eval(spec, x, t).value) <= kernel_decay_bound(spec, x, t)


@pytest.mark.parametrize(("branch", "d"), [("G", -0.4), ("G", 0.05), ("G", 0.7), ("V", 0.05), ("V", 0.7)])
def test_convolution_moments_against_quad(branch, d):
    spec = KernelSpec(Branch(branch), 0.5, 1 / 3)
    h, n = 0.1, 6
    A, B = convolution_moments(spec, d, h, n)
    K = lambda s: kernel_eval(spec, d, s).value if s > 0 else 0.0
    for k in (0, 1, n - 1):
        a = quad(lambda s: K(s) * (1 - (s / h - k)), k * h, (k + 1) * h, limit=200, epsabs=1e-13)[0]
        b = quad(lambda s: K(s) * (s / h - k), k * h, (k + 1) * h, limit=200, epsabs=1e-13)[0]
        assert A[k] == pytest.approx(a, abs=1e-9)
        assert B[k] == pytest.approx(b, abs=1e-9)


def test_origin_moments_of_positive_weight():
    # m > 0 at d = 0: exact moments of c s^(m-1); their sum is the integral c t^m / m
    spec = KernelSpec(Branch.G, 0.6, 0.5)
    h, n = 0.05, 20
    A, B = convolution_moments(spec, 0.0, h, n)
    c = 1 / (3 * math.gamma(0.5))
    assert A.sum() + B.sum() == pytest.approx(c * (n * h) ** 0.5 / 0.5, rel=1e-13)


def test_origin_moments_one_sided_limits():
    # zero effective weight: the mass sits in a layer at s = 0 and jumps by one across x = 0
    spec = KernelSpec(Branch.G, 0.5, 1 / 3, dx_count=2)
    left = convolution_moments(spec, 0.0, 0.1, 4, side=-1)[0][0]
    right = convolution_moments(spec, 0.0, 0.1, 4, side=1)[0][0]
    assert left == pytest.approx(1 / 3)
    assert right == pytest.approx(-2 / 3)


def test_origin_moments_singular_weight():
    spec = KernelSpec(Branch.G, 0.5, 1.0, dx_count=2)
    with pytest.raises(SingularPoint):
        convolution_moments(spec, 0.0, 0.1, 4)
