r"""Caputo derivative and Riemann-Liouville integral on uniform grids.

.. math::

    \partial_t^\alpha f(t) = \frac{1}{\Gamma(1 - \alpha)}
        \int_0^t \frac{f'(\tau)}{(t - \tau)^\alpha} \,d\tau,
    \qquad
    J^\alpha f(t) = \frac{1}{\Gamma(\alpha)}
        \int_0^t (t - \tau)^{\alpha - 1} f(\tau) \,d\tau.

The derivative uses the L1 scheme and the integral the product trapezoid
rule. Both are causal convolutions with weights that depend only on
``(alpha, n_steps)`` and are cached as read-only arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve
from scipy.special import roots_legendre

from fracairy.errors import ConfigError, OrderOutOfRange

# above this many steps convolutions go through the FFT
_DIRECT_LIMIT = 2048


# {{{ types


@dataclass(frozen=True)
class FractionalOrder:
    """Fractional order :math:`0 < \\alpha < 1` and its derived exponents."""

    alpha: float

    def __post_init__(self) -> None:
        a = self.alpha
        if not (isinstance(a, (int, float, np.floating)) and 0.0 < float(a) < 1.0):
            raise OrderOutOfRange(f"fractional order must satisfy 0<alpha<1, got alpha={a}")
        object.__setattr__(self, "alpha", float(a))

    @property
    def third(self) -> float:
        return self.alpha / 3

    @property
    def two_thirds(self) -> float:
        return 2 * self.alpha / 3

    @property
    def one_minus_third(self) -> float:
        return 1 - self.alpha / 3

    @property
    def rho(self) -> float:
        """Wright parameter :math:`-\\alpha/3`."""
        return -self.alpha / 3


def as_order(alpha: FractionalOrder | float) -> FractionalOrder:
    return alpha if isinstance(alpha, FractionalOrder) else FractionalOrder(alpha)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid :math:`t_k = k T / n` on :math:`[0, T]`."""

    t_max: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ConfigError(f"time horizon must satisfy t_max>0, got {self.t_max}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ConfigError(f"time grid needs n_steps>=2, got {self.n_steps}")

    @property
    def h(self) -> float:
        return self.t_max / self.n_steps

    @cached_property
    def nodes(self) -> np.ndarray:
        t = np.arange(self.n_steps + 1) * self.h
        t.setflags(write=False)
        return t

    def refine(self, factor: int = 2) -> TimeGrid:
        return TimeGrid(self.t_max, self.n_steps * factor)


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function at the nodes of a :class:`TimeGrid`.

    *values* may carry trailing axes (e.g. vector densities or spatial
    samples); the first axis is always time.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim == 0 or v.shape[0] != self.grid.n_steps + 1:
            raise ConfigError(
                f"expected {self.grid.n_steps + 1} samples, got shape {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: TimeGrid, func) -> SampledFunction:
        return cls(grid, np.asarray(func(grid.nodes), dtype=float))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes


# }}}


# {{{ weights


@lru_cache(maxsize=128)
def l1_weights(alpha: float, n: int) -> np.ndarray:
    """L1 weights :math:`b_k = (k + 1)^{1 - \\alpha} - k^{1 - \\alpha}`."""
    k = np.arange(n, dtype=float)
    b = (k + 1) ** (1 - alpha) - k ** (1 - alpha)
    b.setflags(write=False)
    return b


@lru_cache(maxsize=128)
def product_trapezoid_weights(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights of the product trapezoid rule for :math:`J^\\alpha`.

    Returns ``(c, a0)`` with ``c[k]`` the weight of :math:`f_{n-k}`, ``k < n``,
    and ``a0[m]`` the weight of :math:`f_0` at node ``m``; both without the
    common factor :math:`h^\\alpha / \\Gamma(\\alpha + 2)`.
    """
    k = np.arange(n + 1, dtype=float)
    p = alpha + 1
    c = np.empty(n + 1)
    c[0] = 1.0
    c[1:] = (k[1:] + 1) ** p - 2 * k[1:] ** p + (k[1:] - 1) ** p
    a0 = np.zeros(n + 1)
    a0[1:] = (k[1:] - 1) ** p - (k[1:] - 1 - alpha) * k[1:] ** alpha
    c.setflags(write=False)
    a0.setflags(write=False)
    return c, a0


def causal_convolve(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return ``y[n] = sum_{j <= n} w[n - j] x[j]`` along the first axis of *x*."""
    n = x.shape[0]
    w = np.asarray(w[:n], dtype=float)
    if n <= _DIRECT_LIMIT:
        T = toeplitz(w, np.zeros(n))
        return np.tensordot(T, x, axes=(1, 0))

    shape = (n,) + (1,) * (x.ndim - 1)
    return fftconvolve(w.reshape(shape), x, axes=0)[:n]


# }}}


# {{{ operators


def caputo_l1(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """L1 Caputo derivative of samples along the first axis; row 0 is zero."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    b = l1_weights(alpha, n)
    d = np.diff(values, axis=0)
    out = np.zeros_like(values)
    out[1:] = causal_convolve(b, d) / (math.gamma(2 - alpha) * h**alpha)
    return out


def rl_trapezoid(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """Product trapezoid Riemann-Liouville integral along the first axis."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0] - 1
    c, a0 = product_trapezoid_weights(alpha, n)

    out = np.zeros_like(values)
    a0 = a0.reshape((n + 1,) + (1,) * (values.ndim - 1))
    out[1:] = causal_convolve(c, values[1:]) + a0[1:] * values[0]
    return out * h**alpha / math.gamma(alpha + 2)


def caputo_split(
    func,
    grid: TimeGrid,
    alpha: FractionalOrder | float,
    t_start: float,
    *,
    grading: float = 1.0,
    n_quad: int = 64,
    value_at_zero: float = 0.0,
) -> np.ndarray:
    r"""Caputo derivative of a callable with an integrable singularity at ``t = 0``.

    The history over :math:`[0, t_s]` is integrated by parts,

    .. math::

        \int_0^{t_s} \frac{f'(\tau)}{(t - \tau)^\alpha} d\tau
        = \frac{f(t_s)}{(t - t_s)^\alpha} - \frac{f(0)}{t^\alpha}
          - \alpha \int_0^{t_s} \frac{f(\tau)}{(t - \tau)^{\alpha + 1}} d\tau,

    and the last integral is done by Gauss-Legendre in ``u`` with
    :math:`\tau = t_s u^q`, ``q = grading``. The rest of the history uses the
    L1 scheme on the grid. *t_start* must be a grid node; values at nodes
    ``t <= t_start`` are NaN.
    """
    a = as_order(alpha).alpha
    j = int(round(t_start / grid.h))
    if j < 1 or abs(j * grid.h - t_start) > 1.0e-9 * grid.t_max or j >= grid.n_steps:
        raise ConfigError(f"t_start={t_start} must be an interior grid node")
    t = grid.nodes
    f = np.asarray(func(t[j:]), dtype=float)

    u, w = roots_legendre(n_quad)
    u, w = 0.5 * (u + 1), 0.5 * w
    tau = t_start * u**grading
    jac = w * t_start * grading * u ** (grading - 1)
    ft = np.asarray(func(tau), dtype=float)

    tk = t[j + 1 :]
    shape = (tk.size,) + (1,) * (f.ndim - 1)
    lag = (tk[:, None] - tau[None, :]) ** (-a - 1)
    head = (
        f[0] * ((tk - t_start) ** (-a)).reshape(shape)
        - value_at_zero * (tk ** (-a)).reshape(shape)
        - a * np.tensordot(lag * jac[None, :], ft, axes=(1, 0))
    ) / math.gamma(1 - a)

    n = grid.n_steps - j
    tail = causal_convolve(l1_weights(a, n), np.diff(f, axis=0)) / (math.gamma(2 - a) * grid.h**a)

    out = np.full((grid.n_steps + 1,) + f.shape[1:], np.nan)
    out[j + 1 :] = head + tail
    return out


def caputo_derivative(f: SampledFunction, alpha: FractionalOrder | float) -> SampledFunction:
    """L1 discretization of the Caputo derivative, zero at the first node.

    :raises OrderOutOfRange: unless :math:`0 < \\alpha < 1`.
    """
    alpha = as_order(alpha)
    return SampledFunction(f.grid, caputo_l1(f.values, f.grid.h, alpha.alpha))


def rl_integral(f: SampledFunction, alpha: FractionalOrder | float) -> SampledFunction:
    """Product trapezoid discretization of the Riemann-Liouville integral.

    :raises OrderOutOfRange: unless :math:`0 < \\alpha < 1`.
    """
    alpha = as_order(alpha)
    return SampledFunction(f.grid, rl_trapezoid(f.values, f.grid.h, alpha.alpha))


def caputo_power_rule(beta: float, alpha: FractionalOrder | float, t: float) -> float:
    r"""Exact :math:`\partial_t^\alpha t^\beta = \Gamma(\beta+1) t^{\beta-\alpha} / \Gamma(\beta+1-\alpha)`."""
    a = alpha.alpha if isinstance(alpha, FractionalOrder) else float(alpha)
    if beta <= 0:
        raise ConfigError(f"power rule needs beta>0, got {beta}")
    return math.exp(math.lgamma(beta + 1) - math.lgamma(beta + 1 - a)) * t ** (beta - a)


# }}}
