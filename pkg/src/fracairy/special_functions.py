r"""Wright, M-Wright and Mittag-Leffler functions.

The Wright function of the second kind

.. math::

    \phi(\rho, \mu; z) = \sum_{n = 0}^\infty \frac{z^n}{n!\,\Gamma(\rho n + \mu)},
    \qquad -1 < \rho < 0,

is the building block of every kernel in this package. Three evaluators are
provided:

* :func:`wright_phi` -- the power series in double precision, returning an
  :class:`EvalResult` with a truncation and rounding estimate.
* :func:`wright` -- the vectorized evaluator used by the solvers. It sums the
  series where the largest term is moderate and otherwise integrates the
  Hankel loop (two rays with a double exponential rule joined by a unit
  arc), which is well conditioned for large :math:`|z|`.
* :func:`wright_phi_hankel` -- an independent check in extended precision
  (mpmath) along a two-ray-plus-arc contour with Gauss-Legendre panels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, loggamma, roots_legendre

from fracairy.errors import (
    ConfigError,
    DomainError,
    NonConvergence,
    QuadratureFailure,
    SectorViolation,
)

EPS = np.finfo(float).eps
MAX_TERMS = 500
ML_TERM_CEILING = 16000
OMEGA = cmath.exp(2j * math.pi / 3)

# largest series term tolerated before switching to the ray integral
_SERIES_PEAK = 1.0e3
# beyond this many e-folds of decay the value is returned as zero
_NEGLIGIBLE_EFOLDS = 80.0


# {{{ parameters


@dataclass(frozen=True)
class WrightParams:
    """Parameters :math:`(\\rho, \\mu)` of the Wright function."""

    rho: float
    mu: complex

    def __post_init__(self) -> None:
        if not -1.0 < self.rho < 0.0:
            raise ConfigError(f"Wright parameter must satisfy -1<rho<0, got rho={self.rho}")
        if not cmath.isfinite(complex(self.mu)):
            raise ConfigError(f"Wright parameter mu must be finite, got {self.mu}")

    @property
    def delta(self) -> float:
        return -self.rho


@dataclass(frozen=True)
class EvalResult:
    value: complex
    abs_error_estimate: float
    terms_used: int


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler function :math:`E_{\\alpha,\\mu}`."""

    alpha: float
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ConfigError(f"Mittag-Leffler order must satisfy alpha>0, got {self.alpha}")


# }}}


# {{{ series


def _log_rgamma(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(log|1/Gamma(x)|, sign(1/Gamma(x)))`` for real *x*.

    Poles of Gamma give sign 0 and log magnitude ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    logabs = np.empty_like(x)
    sign = np.ones_like(x)

    pos = x > 0
    logabs[pos] = -gammaln(x[pos])

    neg = ~pos
    xn = x[neg]
    pole = np.isclose(xn, np.round(xn), rtol=0.0, atol=1.0e-14)
    s = np.sin(np.pi * xn)
    with np.errstate(divide="ignore"):
        la = gammaln(1.0 - xn) + np.log(np.abs(s)) - math.log(math.pi)
    la[pole] = -np.inf
    sg = np.sign(s)
    sg[pole] = 0.0
    logabs[neg] = la
    sign[neg] = sg

    return logabs, sign


@lru_cache(maxsize=256)
def _series_coefficients(rho: float, mu: complex, nterms: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-magnitudes and phases of :math:`1/(n!\\,\\Gamma(\\rho n + \\mu))`."""
    n = np.arange(nterms, dtype=float)
    x = rho * n + mu
    if isinstance(mu, complex) and mu.imag != 0.0:
        lg = -loggamma(x.astype(complex))
        logabs = lg.real - gammaln(n + 1)
        phase = np.exp(1j * lg.imag)
    else:
        logabs, sign = _log_rgamma(np.real(x))
        logabs = logabs - gammaln(n + 1)
        phase = sign.astype(complex)

    logabs.setflags(write=False)
    phase.setflags(write=False)
    return logabs, phase


def _as_real_mu(mu: complex) -> complex | float:
    mu = complex(mu)
    return mu.real if mu.imag == 0.0 else mu


def _series_terms(rho: float, mu: complex, z: np.ndarray, nterms: int) -> np.ndarray:
    """Matrix of series terms, shape ``(nterms, z.size)``."""
    logc, phase = _series_coefficients(rho, mu, nterms)
    n = np.arange(nterms, dtype=float)[:, None]

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logz = np.log(np.abs(z))[None, :]
        mag = np.where(n == 0, logc[:, None], logc[:, None] + n * logz)
        terms = np.exp(mag) * phase[:, None]

    if np.all(z.imag == 0.0):
        # exact signs on the real line
        neg = z.real < 0
        if np.any(neg):
            alt = np.where(np.arange(nterms) % 2 == 0, 1.0, -1.0)[:, None]
            terms = np.where(neg[None, :], terms * alt, terms)
    else:
        terms = terms * np.exp(1j * n * np.angle(z)[None, :])

    return terms


def _series_envelope(rho: float, mu: complex, r: float, nterms: int = MAX_TERMS) -> np.ndarray:
    logc, _ = _series_coefficients(rho, mu, nterms)
    n = np.arange(nterms, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(n == 0, logc, logc + n * math.log(max(r, 1.0e-300)))


def wright_phi(
    params: WrightParams,
    z: complex,
    *,
    tol: float = 1.0e-16,
    max_terms: int = MAX_TERMS,
) -> EvalResult:
    r"""Evaluate :math:`\phi(\rho, \mu; z)` by its power series.

    Summation stops at the first index ``N`` for which the bound on the tail
    :math:`\sum_{n \ge N} |z|^n / (n! |\Gamma(\rho n + \mu)|)` drops below
    ``tol * |partial sum|``. Coefficients at poles of :math:`\Gamma` vanish.

    :raises NonConvergence: if *max_terms* terms do not meet *tol*.
    """
    rho, mu = params.rho, _as_real_mu(params.mu)
    z = complex(z)

    if z == 0:
        logc, phase = _series_coefficients(rho, mu, 1)
        return EvalResult(complex(phase[0] * math.exp(logc[0])), 0.0, 1)

    # the tail bound looks past the cap so that a small cap cannot pass
    env = _series_envelope(rho, mu, abs(z), max(max_terms, MAX_TERMS))
    # tail[k] = sum_{n >= k} envelope_n
    with np.errstate(over="ignore"):
        e = np.exp(env)
    tail = np.cumsum(e[::-1])[::-1]
    tail = np.append(tail, 0.0)

    terms = _series_terms(rho, mu, np.array([z]), max_terms)[:, 0]
    with np.errstate(invalid="ignore"):
        partial = np.cumsum(terms)

    # smallest N with tail[N] <= tol |partial[N-1]| once terms are decaying
    peak = int(np.argmax(env))
    ok = tail[1 : max_terms + 1] <= tol * np.maximum(np.abs(partial), 1.0e-300)
    ok[:peak] = False
    idx = np.flatnonzero(ok)
    if idx.size == 0 or not np.isfinite(tail[0]):
        raise NonConvergence(
            f"Wright series did not converge in {max_terms} terms at |z|={abs(z):.3g} "
            f"(rho={rho}, mu={mu}); use the large-argument evaluator"
        )

    nused = int(idx[0]) + 1
    value = complex(partial[nused - 1])
    absum = float(np.sum(np.abs(terms[:nused])))
    rounding = EPS * absum * (np.max(np.abs(env[:nused][np.isfinite(env[:nused])]), initial=0.0) + nused)
    return EvalResult(value, float(tail[nused]) + float(rounding), nused)


@lru_cache(maxsize=256)
def series_radius(rho: float, mu: complex) -> float:
    """Largest :math:`|z|` for which no series term exceeds ``_SERIES_PEAK``."""
    mu = _as_real_mu(mu)
    lo, hi = 0.0, 64.0
    limit = math.log(_SERIES_PEAK)
    if np.max(_series_envelope(rho, mu, hi)) <= limit:
        return hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if np.max(_series_envelope(rho, mu, mid)) > limit:
            hi = mid
        else:
            lo = mid
    return lo


def _series_vec(rho: float, mu: complex, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rmax = float(np.max(np.abs(z)))
    env = _series_envelope(rho, mu, rmax)
    with np.errstate(over="ignore"):
        e = np.exp(env)
    tail = np.append(np.cumsum(e[::-1])[::-1], 0.0)
    peak = int(np.argmax(env))
    idx = np.flatnonzero(tail[1:] <= 1.0e-17)
    idx = idx[idx >= peak]
    if idx.size == 0:
        raise NonConvergence(f"Wright series did not converge at |z|={rmax:.3g}")
    nterms = int(idx[0]) + 1

    terms = _series_terms(rho, mu, z, nterms)
    value = terms.sum(axis=0)
    fin = env[:nterms][np.isfinite(env[:nterms])]
    err = tail[nterms] + 8.0 * EPS * np.abs(terms).sum(axis=0) * (1 + np.max(np.abs(fin), initial=0.0))
    return value, err


# }}}


# {{{ collapsed Hankel loop


# radius of the arc that closes the loop around the branch point
_ARC_RADIUS = 1.0


@lru_cache(maxsize=8)
def _de_rule(h: float) -> tuple[np.ndarray, np.ndarray]:
    """Exp-sinh nodes and weights for :math:`\\int_0^\\infty g(s)\\,ds`."""
    k = np.arange(-4.5, 4.0 + 0.5 * h, h)
    s = np.exp(0.5 * np.pi * np.sinh(k))
    w = h * 0.5 * np.pi * np.cosh(k) * s
    for a in (s, w):
        a.setflags(write=False)
    return s, w


def _decay_rate(delta: float, argz: np.ndarray) -> np.ndarray:
    """Supremum of admissible decay rates in the exponential estimate."""
    a = np.abs(argz)
    rate = (1 - delta) * delta ** (delta / (1 - delta)) * np.cos((np.pi - a) / (1 - delta))
    return np.where(a > 0.5 * (1 + delta) * np.pi, rate, 0.0)


def _ray_step(r: float) -> float:
    if r <= 20:
        return 0.02
    if r <= 150:
        return 0.01
    if r <= 300:
        return 0.005
    if r <= 600:
        return 0.0025
    return 0.00125


_THETAS = np.linspace(0.5 * np.pi + 0.01, np.pi, 128)


def _ray_angles(absz: np.ndarray, argz: np.ndarray, delta: float, sgn: int) -> np.ndarray:
    # exponent on the ray is r cos(theta) + |z| cos(arg z + sgn delta theta) r^delta
    c = absz[:, None] * np.cos(argz[:, None] + sgn * delta * _THETAS[None, :])
    ct = -np.cos(_THETAS)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        rs = (np.maximum(c, 0.0) * delta / ct) ** (1 / (1 - delta))
        growth = np.where(c > 0, -rs * ct + c * rs**delta, 0.0)
    score = growth + 0.8 / ct
    return _THETAS[np.argmin(score, axis=1)]


def _loop_integrand(z: np.ndarray, sigma: np.ndarray, log_sigma: np.ndarray, delta: float, mu: float) -> np.ndarray:
    # exp(sigma + z sigma^delta) sigma^(-mu), one row per point
    return np.exp(sigma + z[:, None] * np.exp(delta * log_sigma) - mu * log_sigma)


@lru_cache(maxsize=64)
def _arc_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = roots_legendre(n)
    u, wu = 0.5 * (x + 1), 0.5 * w
    for a in (u, wu):
        a.setflags(write=False)
    return u, wu


def _rays_block(rho: float, mu: float, z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Hankel loop: two rays from radius ``R`` joined by an arc through the positive axis."""
    delta = -rho
    R = _ARC_RADIUS
    s, w = _de_rule(h)
    absz, argz = np.abs(z), np.angle(z)

    total = np.zeros(z.shape, dtype=complex)
    coarse = np.zeros(z.shape, dtype=complex)
    magnitude = np.zeros(z.shape)
    ray_magnitude = np.zeros(z.shape)
    thetas = {}
    for sgn in (1, -1):
        theta = _ray_angles(absz, argz, delta, sgn)
        thetas[sgn] = theta
        e = np.exp(1j * sgn * theta)
        r = R + s
        log_sigma = np.log(r)[None, :] + 1j * sgn * theta[:, None]
        f = _loop_integrand(z, r[None, :] * e[:, None], log_sigma, delta, mu) * w[None, :]
        total += sgn * e * f.sum(axis=1)
        coarse += sgn * e * f[:, ::2].sum(axis=1)
        ray_magnitude += np.abs(f).sum(axis=1)
    magnitude += ray_magnitude

    # arc from -theta_minus to theta_plus, resolved for its phase variation
    freq = R + delta * float(np.max(absz)) * R**delta + abs(1 - mu)
    # rounded up so that the cached rules are reused
    n = 32 * (2 + int(math.ceil(2 * np.pi * freq / 16)))
    arc = []
    for m in (n, (3 * n) // 4):
        u, wu = _arc_nodes(m)
        lo, hi = -thetas[-1], thetas[1]
        psi = lo[:, None] + (hi - lo)[:, None] * u[None, :]
        log_sigma = math.log(R) + 1j * psi
        f = _loop_integrand(z, R * np.exp(1j * psi), log_sigma, delta, mu - 1.0)
        f = 1j * f * (wu[None, :] * (hi - lo)[:, None])
        arc.append(f.sum(axis=1))
        if m == n:
            magnitude += np.abs(f).sum(axis=1)

    value = (total + arc[0]) / (2j * np.pi)
    # the exp-sinh rule converges exponentially: halving h squares the relative error
    d = np.abs(total - 2.0 * coarse)
    ray_err = np.minimum(d, d**2 / np.maximum(ray_magnitude, np.finfo(float).tiny))
    err = (ray_err + np.abs(arc[0] - arc[1])) / (2 * np.pi) + 16 * EPS * magnitude
    return value, err


def _wright_large(rho: float, mu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hankel loop evaluation for large ``|z|`` (vectorized)."""
    value = np.zeros(z.shape, dtype=complex)
    err = np.zeros(z.shape)
    steps = np.vectorize(_ray_step, otypes=[float])(np.abs(z))
    for h in np.unique(steps):
        idx = np.flatnonzero(steps == h)
        for chunk in np.array_split(idx, max(1, idx.size // 1024)):
            # overflow only happens where the loop is hopeless; the estimate records it
            with np.errstate(over="ignore", invalid="ignore"):
                v, e = _rays_block(rho, mu, z[chunk], float(h))
            value[chunk] = v
            err[chunk] = np.where(np.isfinite(v) & np.isfinite(e), e, np.inf)
    return value, err


# }}}


# {{{ vectorized evaluator


def wright_with_error(rho: float, mu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :math:`\\phi(\\rho, \\mu; z)` and an absolute error estimate."""
    if not -1.0 < rho < 0.0:
        raise ConfigError(f"Wright parameter must satisfy -1<rho<0, got rho={rho}")

    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    value = np.zeros(z.shape, dtype=complex)
    err = np.zeros(z.shape)

    absz = np.abs(z)
    argz = np.angle(z)
    delta = -rho
    with np.errstate(over="ignore"):
        efolds = _decay_rate(delta, argz) * absz ** (1 / (1 - delta))
    negligible = efolds > _NEGLIGIBLE_EFOLDS + 2 * np.log1p(absz)

    small = (absz <= series_radius(rho, mu)) & ~negligible
    if np.any(small):
        value[small], err[small] = _series_vec(rho, mu, z[small])

    large = ~small & ~negligible
    if np.any(large):
        if isinstance(mu, complex) and mu.imag != 0.0:
            raise DomainError("complex mu is only supported inside the series radius")
        value[large], err[large] = _wright_large(rho, float(np.real(mu)), z[large])

    err[negligible] = np.exp(-_NEGLIGIBLE_EFOLDS)
    return value.reshape(shape), err.reshape(shape)


def wright(rho: float, mu: float, z: np.ndarray | complex) -> np.ndarray:
    r"""Vectorized Wright function :math:`\phi(\rho, \mu; z)` for real :math:`\mu`.

    Accurate to roughly ``1e-13`` in absolute terms for :math:`|z| \lesssim 600`
    inside the decay sector of the function and for moderate :math:`|z|`
    elsewhere.
    """
    value, _ = wright_with_error(rho, mu, z)
    return value


def m_wright(nu: float, z: complex) -> EvalResult:
    r"""M-Wright function :math:`M_\nu(z) = \phi(-\nu, 1 - \nu; -z)`."""
    if not 0.0 < nu < 1.0:
        raise ConfigError(f"M-Wright order must satisfy 0<nu<1, got {nu}")
    v, e = wright_with_error(-nu, 1.0 - nu, np.array([-complex(z)]))
    return EvalResult(complex(v[0]), float(e[0]), 1)


def f_wright(nu: float, z: complex) -> EvalResult:
    r"""F-Wright function :math:`F_\nu(z) = \phi(-\nu, 0; -z)`."""
    if not 0.0 < nu < 1.0:
        raise ConfigError(f"F-Wright order must satisfy 0<nu<1, got {nu}")
    v, e = wright_with_error(-nu, 0.0, np.array([-complex(z)]))
    return EvalResult(complex(v[0]), float(e[0]), 1)


# }}}


# {{{ exponential estimate


def decay_rate_supremum(delta: float, argz: float) -> float:
    """Supremum of the admissible rate in the exponential estimate at ``arg z``."""
    return float(_decay_rate(delta, np.array([argz]))[0])


def in_decay_sector(delta: float, argz: float) -> bool:
    return 0.5 * (1 + delta) * math.pi < abs(argz) <= math.pi


@lru_cache(maxsize=128)
def _calibrate_bound(rho: float, mu: float, argz: float) -> tuple[float, float]:
    delta = -rho
    nu = 0.9 * decay_rate_supremum(delta, argz)
    p = 1 / (1 - delta)

    # past this radius the factor exp(-0.1 nu_sup r^p) has fallen by e^-10
    rmax = max(20.0, (10.0 / max(nu / 9.0, 1e-300)) ** (1 / p))
    rneg = (_NEGLIGIBLE_EFOLDS / (nu / 0.9)) ** (1 / p)
    rmax = min(rmax, rneg)

    r = np.linspace(0.0, rmax, 2001)
    phi, err = wright_with_error(rho, mu, r * np.exp(1j * argz))
    # only radii where the value is resolved well above its error estimate
    resolved = np.abs(phi) > 100.0 * err
    scaled = np.abs(phi[resolved]) * np.exp(nu * r[resolved] ** p)
    return 1.1 * float(np.max(scaled)), nu


def tail_bound_constants(params: WrightParams, argz: float) -> tuple[float, float]:
    """Calibrated ``(C, nu)`` for the exponential estimate along ``arg z``."""
    if not in_decay_sector(params.delta, argz):
        raise SectorViolation(
            f"arg z={argz:.6g} outside the sector (1+delta)pi/2 < |arg z| <= pi "
            f"for delta={params.delta:.6g}"
        )
    return _calibrate_bound(params.rho, float(np.real(params.mu)), round(float(argz), 12))


def wright_tail_bound(params: WrightParams, z: complex) -> float:
    r"""Exponential bound :math:`C \exp(-\nu |z|^{1/(1-\delta)})` on :math:`|\phi|`.

    The rate is ``0.9`` times its admissible supremum for ``arg z`` and the
    constant is ``1.1`` times the largest observed ratio on a dense radial
    grid, so the bound dominates :math:`|\phi|` along the whole ray.

    :raises SectorViolation: if ``arg z`` is outside the decay sector.
    """
    z = complex(z)
    argz = cmath.phase(z) if z != 0 else math.pi
    C, nu = tail_bound_constants(params, argz)
    return C * math.exp(-nu * abs(z) ** (1 / (1 - params.delta)))


# }}}


# {{{ Hankel loop oracle


def _gl_panels(f, a, b, npanels: int, nodes, weights):
    h = (b - a) / npanels
    total = mpmath.mpc(0)
    for j in range(npanels):
        lo = a + j * h
        c = lo + h / 2
        s = mpmath.mpc(0)
        for x, w in zip(nodes, weights):
            s += w * f(c + h / 2 * x)
        total += s * h / 2
    return total


def _panel_doubling(f, a, b, tol, nodes, weights, max_level: int = 12):
    prev = _gl_panels(f, a, b, 1, nodes, weights)
    for level in range(1, max_level + 1):
        cur = _gl_panels(f, a, b, 2**level, nodes, weights)
        err = abs(cur - prev)
        if err <= tol:
            return cur, err
        prev = cur
    raise QuadratureFailure(f"Hankel contour quadrature did not converge on [{a}, {b}] (err={err})")


def wright_phi_hankel(
    params: WrightParams,
    z: complex,
    *,
    tol: float = 1.0e-13,
    eps: float = 0.1,
    order: int = 16,
) -> EvalResult:
    r"""Evaluate :math:`\phi(\rho, \mu; z)` from its Hankel loop integral.

    .. math::

        \phi(\rho, \mu; z) = \frac{1}{2\pi i} \int_{Ha}
            e^{\sigma + z \sigma^{-\rho}} \sigma^{-\mu} \,d\sigma.

    The loop is two rays at angles :math:`\pm(\pi - \epsilon)` joined by a
    circular arc of radius :math:`\max(1, |z|^{1/(1+\rho)})`. Each piece is
    integrated with ``order``-point Gauss-Legendre panels, doubling the panel
    count until successive results agree to *tol*. Arithmetic runs in mpmath
    with enough digits to absorb the cancellation on the arc.

    :raises QuadratureFailure: when panel doubling stalls.
    """
    rho = params.rho
    mu = complex(params.mu)
    z = complex(z)
    R = max(1.0, abs(z) ** (1 / (1 + rho)))

    growth = (R + abs(z) * R ** (-rho)) / math.log(10)
    dps = int(30 + growth)

    with mpmath.workdps(dps):
        zz = mpmath.mpc(z)
        mm = mpmath.mpc(mu)
        lam = -mpmath.mpf(rho)
        theta = mpmath.pi - mpmath.mpf(eps)
        X, W = mpmath.gauss_quadrature(order, "legendre")

        def g(sigma):
            return mpmath.exp(sigma + zz * mpmath.power(sigma, lam)) * mpmath.power(sigma, -mm)

        # ray length: integrand below 10^-(dps) of the arc scale
        target = -(dps + 5) * math.log(10)
        rmax = R
        while -rmax * math.cos(eps) + abs(z) * rmax ** (-rho) + abs(mu) * math.log(rmax) > target:
            rmax *= 1.5

        eit = mpmath.expj(theta)
        emt = mpmath.expj(-theta)

        def arc(t):
            s = R * mpmath.expj(t)
            return g(s) * 1j * s

        def upper(r):
            return g(r * eit) * eit

        def lower(r):
            return g(r * emt) * emt

        ptol = mpmath.mpf(tol) / 3
        I_arc, e1 = _panel_doubling(arc, -theta, theta, ptol, X, W)
        I_up, e2 = _panel_doubling(upper, mpmath.mpf(R), mpmath.mpf(rmax), ptol, X, W)
        I_lo, e3 = _panel_doubling(lower, mpmath.mpf(R), mpmath.mpf(rmax), ptol, X, W)

        value = (I_arc + I_up - I_lo) / (2j * mpmath.pi)
        err = (e1 + e2 + e3) / (2 * mpmath.pi)
        return EvalResult(complex(value), float(err), 3 * order)


# }}}


# {{{ Mittag-Leffler


@lru_cache(maxsize=64)
def _ml_coefficients(alpha: float, mu: float, nterms: int) -> tuple[np.ndarray, np.ndarray]:
    logabs, sign = _log_rgamma(alpha * np.arange(nterms) + mu)
    return logabs, sign


def _ml_series(params: MLParams, flat: np.ndarray, tol: float, nterms: int) -> np.ndarray | None:
    logc, sign = _ml_coefficients(params.alpha, params.mu, nterms)
    n = np.arange(nterms, dtype=float)[:, None]

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logz = np.log(np.abs(flat))[None, :]
        mag = np.where(n == 0, logc[:, None], logc[:, None] + n * logz)
        terms = np.exp(mag) * sign[:, None]
    alt = np.where((np.arange(nterms) % 2 == 1)[:, None] & (flat < 0)[None, :], -1.0, 1.0)
    terms = terms * alt

    with np.errstate(invalid="ignore", over="ignore"):
        partial = np.cumsum(terms, axis=0)
        tail = np.cumsum(np.abs(terms)[::-1], axis=0)[::-1]
    tail = np.vstack([tail[1:], np.zeros((1, flat.size))])
    # once past the peak, the remaining magnitudes are a valid tail bound;
    # asking for it one term early keeps a computed term in the bound
    ok = tail <= tol * np.maximum(np.abs(partial), 1.0e-300)
    if not np.all(ok[-2]) or not np.all(np.isfinite(partial[-1])):
        return None
    return partial[-1]


def mittag_leffler(
    params: MLParams,
    z: float | np.ndarray,
    *,
    tol: float = 1.0e-12,
    max_terms: int | None = None,
) -> float | np.ndarray:
    r"""Two-parameter Mittag-Leffler function by its power series.

    .. math::

        E_{\alpha,\mu}(z) = \sum_{n=0}^\infty \frac{z^n}{\Gamma(\alpha n + \mu)}

    Without *max_terms* the term count doubles from ``MAX_TERMS`` up to
    ``ML_TERM_CEILING``; small orders need many terms before
    :math:`\Gamma(\alpha n + \mu)` overtakes :math:`|z|^n`.

    :raises NonConvergence: if the tail does not drop below
        ``tol * |partial sum|`` within the allowed number of terms.
    """
    zz = np.asarray(z, dtype=float)
    flat = zz.ravel()
    counts = [max_terms] if max_terms is not None else []
    if max_terms is None:
        n = MAX_TERMS
        while n <= ML_TERM_CEILING:
            counts.append(n)
            n *= 2

    for nterms in counts:
        total = _ml_series(params, flat, tol, nterms)
        if total is not None:
            value = total.reshape(zz.shape)
            return float(value) if np.ndim(z) == 0 else value

    raise NonConvergence(
        f"Mittag-Leffler series did not converge in {counts[-1]} terms "
        f"(alpha={params.alpha}, max|z|={np.max(np.abs(flat)):.3g})"
    )


# }}}
