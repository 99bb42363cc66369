r"""Boundary, initial and volume potentials of the fractional Airy operator.

All potentials are built from the kernels of :mod:`fracairy.kernels` with
weight :math:`\mu = 2\alpha/3` unless stated otherwise:

* boundary potentials
  :math:`w(x, t) = \int_0^t K(x - a, t - \eta)\,\tau(\eta)\,d\eta`,
* the initial potential
  :math:`w_5(x, t) = \int_a^b G(x - \xi, t)\,\tau_5(\xi)\,d\xi`,
* the volume potential
  :math:`w_6(x, t) = \int_0^t \int_a^b G(x - \xi, t - \eta) f(\xi, \eta)\,d\xi\,d\eta`.

Time convolutions use the cell moments of
:func:`~fracairy.kernels.convolution_moments` against piecewise-linear data.
Spatial integrals use the trapezoid rule on a grid aligned with the output
grid (volume potential) or Gauss-Legendre panels in the similarity variable
(initial potential).
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import roots_legendre

from fracairy.errors import (
    ConfigError,
    DomainError,
    GridTooCoarse,
    QuadratureFailure,
    SingularPoint,
    Unsupported,
)
from fracairy.fractional_operators import (
    FractionalOrder,
    SampledFunction,
    TimeGrid,
    as_order,
    causal_convolve,
)
from fracairy.kernels import (
    OMEGA,
    Branch,
    KernelSpec,
    convolution_moments,
    decay_cutoff,
    kernel_profile,
)
from fracairy.special_functions import wright


_GL16_X, _GL16_W = roots_legendre(16)


# {{{ boundary potentials


@dataclass(frozen=True)
class BoundaryPotentialSpec:
    """Time convolution of a kernel anchored at ``anchor`` with a density."""

    branch: Branch
    anchor: float
    dx_count: int
    density: SampledFunction
    alpha: FractionalOrder
    mu: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_order(self.alpha))
        object.__setattr__(self, "branch", Branch(self.branch))
        if self.dx_count not in (0, 1, 2):
            raise ConfigError(f"boundary potentials use dx_count in {{0,1,2}}, got {self.dx_count}")

    @property
    def kernel(self) -> KernelSpec:
        mu = self.alpha.two_thirds if self.mu is None else self.mu
        return KernelSpec(self.branch, self.alpha, mu, self.dx_count)


def moment_convolution(A: np.ndarray, B: np.ndarray, tau: np.ndarray) -> np.ndarray:
    r"""Apply cell moments to nodal data: :math:`w_n = \sum_k A_k \tau_{n-k} + B_k \tau_{n-k-1}`.

    *tau* has time on its first axis; the result has the same shape with
    ``w_0 = 0``.
    """
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    out[1:] = causal_convolve(A, tau[1:]) + causal_convolve(B, tau[:-1])
    return out


def boundary_potential_nodes(spec: BoundaryPotentialSpec, x: float, side: int = 0) -> np.ndarray:
    """Boundary potential at every node of the density's time grid."""
    grid = spec.density.grid
    d = float(x) - spec.anchor
    if d == 0 and spec.kernel.m == 0 and side == 0 and spec.branch is Branch.G:
        raise SingularPoint("x = anchor is a jump point of this potential; use jump_limit")
    A, B = convolution_moments(spec.kernel, d, grid.h, grid.n_steps, side=side)
    return moment_convolution(A, B, spec.density.values)


def _resample(f: SampledFunction, t: float) -> SampledFunction:
    """Linear resampling on a uniform grid whose last node is *t*."""
    n = max(2, int(math.ceil(t / f.grid.h - 1.0e-9)))
    grid = TimeGrid(t, n)
    values = np.interp(grid.nodes, f.grid.nodes, f.values)
    return SampledFunction(grid, values)


def boundary_potential(
    spec: BoundaryPotentialSpec, x: float, t: float, *, tol: float | None = None
) -> float:
    r"""Evaluate :math:`\int_0^t K(x - a, t - \eta)\tau(\eta)\,d\eta`.

    The density is taken piecewise linear on its grid; when *t* is not a
    node the density is resampled on a grid ending at *t*. If *tol* is given
    the result is compared with the one on a grid twice as coarse.

    :raises SingularPoint: for ``x = a`` with two derivatives of ``G``.
    :raises GridTooCoarse: if the coarse-grid difference exceeds *tol*.
    """
    if not t > 0:
        raise DomainError(f"boundary potentials are evaluated at t>0, got {t}")
    if spec.dx_count == 2 and x == spec.anchor and spec.branch is Branch.G:
        raise SingularPoint("x = anchor is a jump point of this potential; use jump_limit")

    g = spec.density.grid
    ratio = t / g.h
    if abs(ratio - round(ratio)) < 1.0e-9 and round(ratio) <= g.n_steps and round(ratio) >= 2:
        n = int(round(ratio))
        density = SampledFunction(TimeGrid(t, n), spec.density.values[: n + 1])
    else:
        density = _resample(spec.density, t)

    local = BoundaryPotentialSpec(spec.branch, spec.anchor, spec.dx_count, density, spec.alpha, spec.mu)
    value = float(boundary_potential_nodes(local, x)[-1])

    if tol is not None:
        n = density.grid.n_steps
        if n >= 4:
            m = n // 2
            coarse = SampledFunction(TimeGrid(t, m), np.interp(
                TimeGrid(t, m).nodes, density.grid.nodes, density.values))
            cspec = BoundaryPotentialSpec(spec.branch, spec.anchor, spec.dx_count, coarse, spec.alpha, spec.mu)
            err = abs(value - float(boundary_potential_nodes(cspec, x)[-1]))
            if err > tol:
                raise GridTooCoarse(f"boundary potential error estimate {err:.3e} exceeds tol={tol:.3e}")

    return value


def jump_limit(spec: BoundaryPotentialSpec, side: str, t: float) -> float:
    r"""One-sided limit at the anchor of a potential with two derivatives.

    ``G`` gives :math:`\tau(t)/3` from the left and :math:`-2\tau(t)/3` from
    the right; ``V`` gives 0 from the right.

    :raises Unsupported: for the left limit of ``V``, which is not defined.
    """
    if spec.dx_count != 2:
        raise ConfigError("jump limits are defined for two x-derivatives")
    if not t > 0:
        raise DomainError(f"jump limits are evaluated at t>0, got {t}")
    tau = float(np.interp(t, spec.density.nodes, spec.density.values))
    if side == "left":
        if spec.branch is Branch.V:
            raise Unsupported("the V kernel has no left limit")
        return tau / 3
    if side == "right":
        return -2 * tau / 3 if spec.branch is Branch.G else 0.0
    raise ConfigError(f"side must be 'left' or 'right', got {side!r}")


# }}}


# {{{ log-moments


class LogMomentBranch(enum.Enum):
    REAL_NEGATIVE = "real_negative"
    ROTATED_RE = "rotated_re"
    ROTATED_IM = "rotated_im"


def _log_moment_integrand(branch: LogMomentBranch, delta: float, u: np.ndarray) -> np.ndarray:
    # phi(-delta, 0; z) / u = -delta (z / u) phi(-delta, 1 - delta; z) has no singularity at u = 0
    if branch is LogMomentBranch.REAL_NEGATIVE:
        return delta * wright(-delta, 1 - delta, -u).real
    val = -delta * OMEGA * wright(-delta, 1 - delta, OMEGA * u)
    return val.real if branch is LogMomentBranch.ROTATED_RE else val.imag


def wright_log_moment(
    branch: LogMomentBranch | str,
    alpha: FractionalOrder | float,
    *,
    tol: float = 1.0e-10,
    max_levels: int = 5,
) -> float:
    r"""Evaluate :math:`\int_0^\infty \phi(-\alpha/3, 0; z(u))\,du/u` along a ray.

    ``real_negative`` uses :math:`z = -u`, ``rotated_re`` and ``rotated_im``
    the real and imaginary parts on :math:`z = e^{2\pi i/3} u`. The integral
    is truncated where the Wright function has decayed below
    :math:`e^{-40}` and computed with 16-point Gauss-Legendre panels whose
    width is halved until two levels agree to *tol*.

    :raises QuadratureFailure: if *max_levels* halvings do not reach *tol*.
    """
    branch = LogMomentBranch(branch)
    alpha = as_order(alpha)
    side = -1 if branch is LogMomentBranch.REAL_NEGATIVE else 1
    umax = decay_cutoff(alpha, side)

    def integrate(width: float) -> float:
        npan = max(1, int(math.ceil(umax / width)))
        e = np.linspace(0.0, umax, npan + 1)
        a, b = e[:-1, None], e[1:, None]
        u = 0.5 * (a + b) + 0.5 * (b - a) * _GL16_X[None, :]
        w = 0.5 * (b - a) * _GL16_W[None, :]
        f = _log_moment_integrand(branch, alpha.third, u.ravel()).reshape(u.shape)
        return float(np.sum(f * w))

    width = 2.0
    prev = integrate(width)
    for _ in range(max_levels):
        width /= 2
        cur = integrate(width)
        diff = abs(cur - prev)
        if diff <= tol:
            return cur
        prev = cur
    raise QuadratureFailure(f"log-moment quadrature stalled at difference {diff:.3e}")


# }}}


# {{{ initial potential


def _as_space_function(density) -> Callable[[np.ndarray], np.ndarray]:
    if callable(density):
        return density
    xi, values = (np.asarray(v, dtype=float) for v in density)
    return lambda x: np.interp(x, xi, values)


@dataclass(frozen=True)
class InitialPotentialSpec:
    """Spatial convolution of ``G`` with a density supported on ``[a, b]``.

    *density* is a vectorized callable or a pair ``(xi, values)`` that is
    interpolated linearly.
    """

    a: float
    b: float
    density: object
    alpha: FractionalOrder
    mu: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_order(self.alpha))
        if not self.a < self.b:
            raise ConfigError(f"initial density support needs a<b, got [{self.a}, {self.b}]")

    @property
    def kernel(self) -> KernelSpec:
        mu = self.alpha.two_thirds if self.mu is None else self.mu
        return KernelSpec(Branch.G, self.alpha, mu)


def _panels(lo: float, hi: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    if hi <= lo:
        return np.empty(0), np.empty(0)
    npan = max(1, int(math.ceil((hi - lo) / width)))
    e = np.linspace(lo, hi, npan + 1)
    a, b = e[:-1, None], e[1:, None]
    return (
        (0.5 * (a + b) + 0.5 * (b - a) * _GL16_X[None, :]).ravel(),
        (0.5 * (b - a) * _GL16_W[None, :]).ravel(),
    )


def initial_potential(
    spec: InitialPotentialSpec,
    x: float,
    t: float,
    *,
    width: float = 0.25,
    tol: float | None = None,
) -> float:
    r"""Evaluate :math:`\int_a^b G^\mu(x - \xi, t)\,\tau_5(\xi)\,d\xi`.

    With :math:`y = (x - \xi) t^{-\alpha/3}` the integral becomes
    :math:`t^{m-1+\alpha/3} \int g(y)\,\tau_5(x - y t^{\alpha/3})\,dy`, which
    resolves the concentration of the kernel as :math:`t \to 0`. Panels of
    width *width* in ``y`` are split at ``y = 0``.

    :raises GridTooCoarse: if halving *width* changes the value by more
        than *tol*.
    """
    if not t > 0:
        raise DomainError(f"initial potential is evaluated at t>0, got {t}")
    ker = spec.kernel
    prof = kernel_profile(ker)
    tau = _as_space_function(spec.density)
    s = t ** ker.alpha.third
    lo, hi = prof.support
    ylo, yhi = max(lo, (x - spec.b) / s), min(hi, (x - spec.a) / s)

    def integrate(wd: float) -> float:
        total = 0.0
        for a, b in ((ylo, min(yhi, 0.0)), (max(ylo, 0.0), yhi)):
            y, w = _panels(a, b, wd)
            if y.size:
                total += float(np.sum(w * prof(y) * tau(x - y * s)))
        return total * t ** (ker.m - 1) * s

    value = integrate(width)
    if tol is not None:
        err = abs(value - integrate(width / 2))
        if err > tol:
            raise GridTooCoarse(f"initial potential error estimate {err:.3e} exceeds tol={tol:.3e}")
    return value


# }}}


# {{{ volume potential


@dataclass(frozen=True)
class VolumePotentialSpec:
    """Space-time convolution of ``G`` with a forcing supported on ``[a, b] x [0, T]``.

    *forcing* is a vectorized callable ``f(x, t)``; it is sampled on a
    uniform spatial grid of spacing *dx* aligned with ``a`` and on the time
    grid of the evaluation.
    """

    a: float
    b: float
    forcing: Callable[[np.ndarray, np.ndarray], np.ndarray]
    alpha: FractionalOrder
    dx: float = 1.0 / 64
    mu: float | None = None
    name: str = field(default="f", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_order(self.alpha))
        if not self.a < self.b:
            raise ConfigError(f"forcing support needs a<b, got [{self.a}, {self.b}]")
        if not self.dx > 0:
            raise ConfigError(f"forcing grid spacing must be positive, got {self.dx}")

    def kernel(self, dx_count: int = 0) -> KernelSpec:
        mu = self.alpha.two_thirds if self.mu is None else self.mu
        return KernelSpec(Branch.G, self.alpha, mu, dx_count)

    @property
    def xi(self) -> np.ndarray:
        n = max(1, int(round((self.b - self.a) / self.dx)))
        return np.linspace(self.a, self.b, n + 1)

    @property
    def xi_weights(self) -> np.ndarray:
        xi = self.xi
        w = np.full(xi.size, xi[1] - xi[0])
        w[0] = w[-1] = 0.5 * (xi[1] - xi[0])
        return w


def _sampled_forcing(spec: VolumePotentialSpec, grid: TimeGrid) -> np.ndarray:
    """Forcing times trapezoid weights, shape ``(n_t + 1, n_xi)``."""
    X, T = np.meshgrid(spec.xi, grid.nodes)
    f = np.asarray(spec.forcing(X, T), dtype=float)
    f = np.broadcast_to(f, X.shape)
    return f * spec.xi_weights[None, :]


def volume_potential_grid(
    spec: VolumePotentialSpec,
    x: np.ndarray,
    grid: TimeGrid,
    dx_count: int = 0,
) -> np.ndarray:
    """Volume potential at all nodes ``(t_n, x_i)``, shape ``(n_t + 1, n_x)``.

    *x* may be arbitrary points; when all offsets ``x_i - xi_j`` are integer
    multiples of the forcing spacing, moments are shared between offsets and
    the space-time sum runs as a single two-dimensional FFT convolution.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ker = spec.kernel(dx_count)
    xi = spec.xi
    delta = xi[1] - xi[0]
    F = _sampled_forcing(spec, grid)
    n = grid.n_steps

    if not np.any(F):
        return np.zeros((n + 1, x.size))

    # an m = 0 kernel jumps at offset 0: interior nodes take the mean of both
    # sides and support endpoints take the side on which the support lies
    jump = ker.m == 0

    q = (x - xi[0]) / delta
    aligned = np.allclose(q, np.round(q), rtol=0.0, atol=1.0e-9)

    if aligned:
        qi = np.round(q).astype(int)
        pmin, pmax = qi.min() - (xi.size - 1), qi.max()
        P = np.arange(pmin, pmax + 1)
        A = np.zeros((P.size, n))
        B = np.zeros((P.size, n))
        for r, p in enumerate(P):
            A[r], B[r] = convolution_moments(ker, p * delta, grid.h, n)

        # W[i, n] = sum_j sum_k A[q_i - j, k] F[n - k, j] + B[q_i - j, k] F[n - k - 1, j]
        ca = fftconvolve(A, F[1:].T)
        cb = fftconvolve(B, F[:-1].T)
        out = np.zeros((n + 1, x.size))
        rows = qi - pmin
        out[1:] = (ca[rows, :n] + cb[rows, :n]).T

        if jump:
            for i, qq in enumerate(qi):
                for j, sd in ((0, -1), (xi.size - 1, +1)):
                    if qq == j:
                        a0, b0 = convolution_moments(ker, 0.0, grid.h, n, side=sd)
                        am, bm = convolution_moments(ker, 0.0, grid.h, n, side=0)
                        out[:, i] += moment_convolution(a0 - am, b0 - bm, F[:, j])
        return out

    out = np.zeros((n + 1, x.size))
    for i, xx in enumerate(x):
        for j, xj in enumerate(xi):
            d = xx - xj
            sd = 0
            if d == 0 and jump:
                sd = -1 if j == 0 else (1 if j == xi.size - 1 else 0)
            A, B = convolution_moments(ker, d, grid.h, n, side=sd)
            out[:, i] += moment_convolution(A, B, F[:, j])
    return out


def volume_potential(
    spec: VolumePotentialSpec,
    x: float,
    t: float,
    *,
    h: float = 1.0 / 256,
    dx_count: int = 0,
    tol: float | None = None,
) -> float:
    r"""Evaluate :math:`\int_0^t \int_a^b G(x - \xi, t - \eta) f(\xi, \eta)\,d\xi\,d\eta`.

    Product integration in time with step close to *h* and the trapezoid
    rule in space with the spacing of *spec*. The value at ``t = 0`` is 0.

    :raises GridTooCoarse: if halving the time step and the spatial spacing
        changes the value by more than *tol*.
    """
    if t < 0:
        raise DomainError(f"volume potential is evaluated at t>=0, got {t}")
    if t == 0:
        return 0.0

    def at(step: float, sp: VolumePotentialSpec) -> float:
        grid = TimeGrid(t, max(2, int(math.ceil(t / step - 1.0e-9))))
        return float(volume_potential_grid(sp, np.array([x]), grid, dx_count)[-1, 0])

    value = at(h, spec)
    if tol is not None:
        fine = VolumePotentialSpec(spec.a, spec.b, spec.forcing, spec.alpha, spec.dx / 2, spec.mu)
        err = abs(value - at(h / 2, fine))
        if err > tol:
            raise GridTooCoarse(f"volume potential error estimate {err:.3e} exceeds tol={tol:.3e}")
    return value


# }}}
