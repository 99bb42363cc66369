r"""Fundamental solutions of :math:`\partial_t^\alpha u - u_{xxx} = 0`.

With :math:`\rho = -\alpha/3`, :math:`\omega = e^{2\pi i/3}`, the similarity
variable :math:`y = x t^{-\alpha/3}` and the effective weight
:math:`m = \mu - k\alpha/3` after :math:`k` spatial derivatives,

.. math::

    G^\mu_\alpha(x, t) =
    \begin{cases}
        \tfrac13 t^{m-1} \phi(\rho, m; y), & x < 0, \\
        -\tfrac23 t^{m-1} \operatorname{Re}\left[\omega^{1+k} \phi(\rho, m; \omega y)\right], & x > 0,
    \end{cases}
    \qquad
    V^\mu_\alpha(x, t) = \tfrac13 t^{m-1}
        \operatorname{Im}\left[\omega^{1+k} \phi(\rho, m; \omega y)\right], \quad x > 0.

Spatial derivatives and fractional time operators both act as shifts of
:math:`\mu`. Time convolutions against these kernels are discretized by
cell moments (:func:`convolution_moments`) that integrate the kernel exactly
up to quadrature error against piecewise-linear densities.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import rgamma, roots_legendre

from fracairy.errors import DomainError, SingularPoint
from fracairy.fractional_operators import FractionalOrder, as_order
from fracairy.special_functions import (
    OMEGA,
    WrightParams,
    decay_rate_supremum,
    wright,
    wright_tail_bound,
)

__all__ = [
    "Branch",
    "FractionalOrder",
    "KernelProfile",
    "KernelSpec",
    "KernelValue",
    "TimeOp",
    "convolution_moments",
    "decay_cutoff",
    "kernel_decay_bound",
    "kernel_eval",
    "kernel_mass",
    "kernel_profile",
    "kernel_time_transform",
    "kernel_values",
]

# profiles are truncated where the Wright factor has decayed by this many e-folds
PROFILE_EFOLDS = 40.0


class Branch(enum.Enum):
    G = "G"
    V = "V"


@dataclass(frozen=True)
class KernelSpec:
    """A member of the kernel family: branch, weight and derivative count.

    ``extend`` allows evaluating the ``V`` branch for ``x < 0`` by the same
    formula. This continuation is not part of the solution method and is
    only meant for experimentation.
    """

    branch: Branch
    alpha: FractionalOrder
    mu: float
    dx_count: int = 0
    extend: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_order(self.alpha))
        object.__setattr__(self, "branch", Branch(self.branch))
        if int(self.dx_count) != self.dx_count or self.dx_count < 0:
            raise DomainError(f"dx_count must be a nonnegative integer, got {self.dx_count}")
        if not math.isfinite(self.mu):
            raise DomainError(f"kernel weight mu must be finite, got {self.mu}")

    @property
    def m(self) -> float:
        """Effective weight after the spatial derivatives."""
        m = self.mu - self.dx_count * self.alpha.third
        # absorb rounding so that e.g. 2a/3 - 2(a/3) is exactly zero
        return 0.0 if abs(m) < 1.0e-12 else m

    @property
    def rho(self) -> float:
        return self.alpha.rho

    @property
    def rotation(self) -> complex:
        return OMEGA ** (1 + self.dx_count)

    def derivative(self, k: int = 1) -> KernelSpec:
        return replace(self, dx_count=self.dx_count + k)


@dataclass(frozen=True)
class KernelValue:
    value: float
    similarity_arg: float


@dataclass(frozen=True)
class TimeOp:
    """A fractional time operator: ``caputo`` or ``rl_integral`` of order ``nu``."""

    kind: str
    nu: float

    def __post_init__(self) -> None:
        if self.kind not in ("caputo", "rl_integral"):
            raise DomainError(f"unknown time operator {self.kind!r}")
        if self.nu < 0:
            raise DomainError(f"operator order must be nonnegative, got {self.nu}")


# {{{ pointwise evaluation


def _origin_value(spec: KernelSpec) -> float:
    """Value of the similarity profile at ``y = 0`` (right limit for ``V``)."""
    r = float(rgamma(spec.m))
    if spec.branch is Branch.V:
        return r * spec.rotation.imag / 3
    if spec.dx_count % 3 == 2 and r != 0.0:
        raise DomainError(
            f"G with {spec.dx_count} x-derivatives has different one-sided limits at x=0"
        )
    return r / 3


def _profile_exact(spec: KernelSpec, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    neg, pos, zero = y < 0, y > 0, y == 0

    if np.any(neg):
        if spec.branch is Branch.V:
            if not spec.extend:
                raise DomainError("V kernel is defined for x>0 only (set extend=True to continue)")
            val = wright(spec.rho, spec.m, OMEGA * y[neg])
            out[neg] = (spec.rotation * val).imag / 3
        else:
            out[neg] = wright(spec.rho, spec.m, y[neg]).real / 3
    if np.any(pos):
        val = spec.rotation * wright(spec.rho, spec.m, OMEGA * y[pos])
        out[pos] = -2 * val.real / 3 if spec.branch is Branch.G else val.imag / 3
    if np.any(zero):
        out[zero] = _origin_value(spec)

    return out


def kernel_values(spec: KernelSpec, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorized kernel evaluation with broadcasting of *x* and *t*."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise DomainError("kernels are defined for t>0")
    y = x * t ** (-spec.alpha.third)
    return t ** (spec.m - 1) * _profile_exact(spec, y.ravel()).reshape(y.shape)


def kernel_eval(spec: KernelSpec, x: float, t: float) -> KernelValue:
    """Evaluate a kernel of the family at a single point.

    At ``x = 0`` the common one-sided limit is returned; it does not exist
    for ``G`` with ``dx_count = 2 (mod 3)``, which raises :class:`DomainError`.
    """
    if not t > 0:
        raise DomainError(f"kernels are defined for t>0, got t={t}")
    y = x * t ** (-spec.alpha.third)
    value = t ** (spec.m - 1) * float(_profile_exact(spec, np.array([y]))[0])
    return KernelValue(value, y)


def kernel_time_transform(spec: KernelSpec, op: TimeOp) -> KernelSpec:
    r"""Shift the weight: ``caputo(nu)`` lowers :math:`\mu` by ``nu``, ``rl_integral(nu)`` raises it."""
    shift = -op.nu if op.kind == "caputo" else op.nu
    return replace(spec, mu=spec.mu + shift)


def kernel_mass(spec: KernelSpec, t: float) -> float:
    r"""Exact :math:`\int G^\mu_\alpha(x, t)\,dx = t^{\mu+\alpha/3-1} / \Gamma(\mu + \alpha/3)`."""
    if spec.branch is not Branch.G or spec.dx_count != 0:
        raise DomainError("the mass formula holds for G without x-derivatives")
    if not t > 0:
        raise DomainError(f"kernel mass needs t>0, got t={t}")
    s = spec.mu + spec.alpha.third
    if s <= 0:
        raise DomainError(f"kernel mass needs mu+alpha/3>0, got {s}")
    return t ** (s - 1) * float(rgamma(s))


def decay_cutoff(alpha: FractionalOrder, side: int, efolds: float = PROFILE_EFOLDS) -> float:
    """Similarity argument beyond which the Wright factor is below ``exp(-efolds)``.

    ``side < 0`` is the real negative axis, ``side > 0`` the rotated ray.
    """
    delta = alpha.third
    argz = math.pi if side < 0 else 2 * math.pi / 3
    nu = decay_rate_supremum(delta, argz)
    return (efolds / nu) ** (1 - delta)


def kernel_decay_bound(spec: KernelSpec, x: float, t: float) -> float:
    """Upper bound on ``|kernel_eval|`` from the exponential Wright estimate."""
    y = x * t ** (-spec.alpha.third)
    params = WrightParams(spec.rho, spec.m)
    if y < 0:
        if spec.branch is Branch.V:
            raise DomainError("no decay estimate for the continued V kernel")
        factor = 1 / 3
        bound = wright_tail_bound(params, y)
    else:
        factor = 2 / 3 if spec.branch is Branch.G else 1 / 3
        bound = wright_tail_bound(params, OMEGA * y)
    return factor * t ** (spec.m - 1) * bound


# }}}


# {{{ similarity profiles


def _profile_nodes(ymax: float) -> np.ndarray:
    a = np.arange(0.0, min(ymax, 8.0), 0.005)
    b = np.arange(8.0, min(ymax, 40.0), 0.01) if ymax > 8 else np.empty(0)
    c = np.arange(40.0, ymax, 0.02) if ymax > 40 else np.empty(0)
    return np.concatenate([a, b, c, [ymax]])


@lru_cache(maxsize=64)
def _wright_tables(rho: float, m: float) -> tuple:
    """Cubic splines of the Wright factor on the two decaying rays."""
    alpha = FractionalOrder(-3 * rho)

    yneg = _profile_nodes(decay_cutoff(alpha, -1))
    neg = CubicSpline(yneg, wright(rho, m, -yneg).real)

    ypos = _profile_nodes(decay_cutoff(alpha, +1))
    vals = wright(rho, m, OMEGA * ypos)
    pos_re = CubicSpline(ypos, vals.real)
    pos_im = CubicSpline(ypos, vals.imag)

    return (yneg[-1], neg), (ypos[-1], pos_re, pos_im)


@dataclass(frozen=True)
class KernelProfile:
    r"""Tabulated similarity profile ``g`` with :math:`K(x, t) = t^{m-1} g(x t^{-\alpha/3})`.

    The profile is interpolated by cubic splines on each side of ``y = 0``
    and set to zero where the Wright factor is negligible. At ``y = 0`` the
    left table is used, so ``G`` with two derivatives returns its left limit.
    """

    spec: KernelSpec

    @property
    def support(self) -> tuple[float, float]:
        (lneg, _), (lpos, *_) = _wright_tables(self.spec.rho, self.spec.m)
        left = -lneg if self.spec.branch is Branch.G else 0.0
        return left, lpos

    def __call__(self, y: np.ndarray) -> np.ndarray:
        spec = self.spec
        (lneg, neg), (lpos, pos_re, pos_im) = _wright_tables(spec.rho, spec.m)
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)

        left = y <= 0
        if np.any(left):
            if spec.branch is Branch.V:
                if np.any(y < 0):
                    raise DomainError("V kernel is defined for x>0 only")
                out[left] = _origin_value(spec)
            else:
                u = -y[left]
                out[left] = np.where(u < lneg, neg(np.minimum(u, lneg)), 0.0) / 3

        right = (y > 0) & (y < lpos)
        if np.any(right):
            u = y[right]
            val = spec.rotation * (pos_re(u) + 1j * pos_im(u))
            out[right] = -2 * val.real / 3 if spec.branch is Branch.G else val.imag / 3

        return out


def kernel_profile(spec: KernelSpec) -> KernelProfile:
    return KernelProfile(spec)


# }}}


# {{{ time-convolution moments


_GL_X, _GL_W = roots_legendre(8)


def _origin_moments(
    spec: KernelSpec, h: float, n: int, side: int
) -> tuple[np.ndarray, np.ndarray]:
    r"""Moments of a kernel anchored at the evaluation point.

    For ``m > 0`` the kernel is :math:`c\,s^{m-1}` and the moments are
    exact. For ``m = 0`` the profile vanishes at the origin and the whole
    contribution concentrates in an arbitrarily thin layer at ``s = 0``; its
    one-sided limits follow from the log-moment identities
    :math:`\int_0^\infty \phi(\rho, 0; -u)\,du/u
    = \int_0^\infty \phi(\rho, 0; \omega u)\,du/u = \alpha/3`.
    """
    m = spec.m
    A = np.zeros(n)
    B = np.zeros(n)

    if m == 0:
        left = 1 / 3 if spec.branch is Branch.G else math.nan
        if spec.branch is Branch.G:
            right = -2 * spec.rotation.real / 3
        else:
            right = spec.rotation.imag / 3
        if side < 0:
            A[0] = left
        elif side > 0:
            A[0] = right
        else:
            A[0] = 0.5 * (left + right)
        if math.isnan(A[0]):
            raise DomainError("V kernel is defined for x>0 only")
        return A, B

    if spec.branch is Branch.G and spec.dx_count % 3 == 2 and rgamma(m) != 0:
        raise SingularPoint("G with two x-derivatives is singular at its anchor")
    if m < 0:
        raise SingularPoint(f"kernel weight m={m} is not integrable at the anchor")

    c = _origin_value(spec)
    k = np.arange(n, dtype=float)
    i0 = ((k + 1) ** m - k**m) / m
    i1 = ((k + 1) ** (m + 1) - k ** (m + 1)) / (m + 1) - k * i0
    scale = c * h**m
    return scale * (i0 - i1), scale * i1


def convolution_moments(
    spec: KernelSpec, d: float, h: float, n: int, side: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    r"""Cell moments of the kernel at spatial offset ``d = x - a``.

    Returns ``(A, B)`` of length *n* with

    .. math::

        A_k = \int_{kh}^{(k+1)h} K(d, s) (1 - \theta)\,ds, \qquad
        B_k = \int_{kh}^{(k+1)h} K(d, s)\, \theta \,ds,
        \qquad \theta = s/h - k,

    so that :math:`\int_0^{t_n} K(d, s) \tau(t_n - s)\,ds
    = \sum_k A_k \tau_{n-k} + B_k \tau_{n-k-1}` for piecewise-linear
    :math:`\tau`. The first cell is integrated in the similarity variable
    :math:`u = |d| s^{-\alpha/3}`, which resolves the layer the kernel has
    near :math:`s = 0` when :math:`d` is small.

    At ``d = 0`` a kernel with ``m = 0`` has distinct one-sided limits;
    *side* selects the left (``-1``) or right (``+1``) limit or their mean
    (``0``).
    """
    if d == 0:
        return _origin_moments(spec, h, n, side)

    prof = kernel_profile(spec)
    a3 = spec.alpha.third
    m = spec.m
    sign = 1.0 if d > 0 else -1.0
    ad = abs(d)
    lo, hi = prof.support
    ucut = hi if d > 0 else -lo
    if spec.branch is Branch.V and d < 0:
        raise DomainError("V kernel is defined for x>0 only")

    A = np.zeros(n)
    B = np.zeros(n)

    # cells k >= 1 in s, subdivided where the similarity variable moves fast
    k = np.arange(1, n, dtype=float)
    uk = ad * (k * h) ** (-a3)
    uk1 = ad * ((k + 1) * h) ** (-a3)
    live = uk1 < ucut
    if np.any(live):
        kk = k[live]
        span = np.minimum(uk[live], ucut) - uk1[live]
        nsub = np.clip(np.ceil(span / 0.25) + np.ceil(np.log(uk[live] / uk1[live]) / 0.5), 1, 256)
        nsub = nsub.astype(int)

        cell = np.repeat(np.arange(kk.size), nsub)
        j = np.concatenate([np.arange(q) for q in nsub])
        width = 1.0 / nsub[cell]
        # theta nodes within each subpanel
        theta = (j[:, None] + 0.5 * (_GL_X[None, :] + 1)) * width[:, None]
        w = 0.5 * _GL_W[None, :] * width[:, None] * h

        s = (kk[cell][:, None] + theta) * h
        K = s ** (m - 1) * prof(sign * ad * s ** (-a3))
        Kw = K * w
        idx = kk[cell].astype(int)
        A += np.bincount(idx, (Kw * (1 - theta)).sum(axis=1), minlength=n)[:n]
        B += np.bincount(idx, (Kw * theta).sum(axis=1), minlength=n)[:n]

    # cell 0 in the similarity variable
    uh = ad * h ** (-a3)
    if uh < ucut:
        edges = []
        if uh < 1.0:
            nlog = max(1, int(math.ceil(-math.log(uh) / 0.5)))
            edges.append(np.exp(np.linspace(math.log(uh), 0.0, nlog + 1)))
            start = 1.0
        else:
            start = uh
        nlin = max(1, int(math.ceil((ucut - start) / 0.25)))
        edges.append(np.linspace(start, ucut, nlin + 1))
        e = np.unique(np.concatenate(edges))

        a, b = e[:-1], e[1:]
        u = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL_X[None, :]
        wu = 0.5 * (b - a)[:, None] * _GL_W[None, :]
        s = (ad / u) ** (1 / a3)
        theta = s / h
        f = (1 / a3) * s**m * prof(sign * u) / u * wu
        A[0] += float(np.sum(f * (1 - theta)))
        B[0] += float(np.sum(f * theta))

    return A, B


# }}}
