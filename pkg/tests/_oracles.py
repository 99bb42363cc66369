"""High-precision reference values computed independently with mpmath."""

from __future__ import annotations

import mpmath as mp

# beyond this similarity argument the kernels used here are below 1e-14
Y_NEGLIGIBLE = 60


def wright_series(rho, mu, z, dps=None):
    r"""Direct sum of :math:`\sum z^k / (k!\,\Gamma(\rho k + \mu))` in extended precision.

    The default precision covers the cancellation between terms, whose
    peak grows like :math:`\exp(|z|^{1/(1+\rho)})`.
    """
    if dps is None:
        dps = 30 + int(abs(complex(z)) ** (1 / (1 + float(rho))) / 2.3)
    with mp.workdps(dps):
        z = mp.mpc(z)
        rho, mu = mp.mpf(rho), mp.mpf(mu)
        total = mp.mpf(0)
        term_z = mp.mpf(1)
        eps = mp.mpf(10) ** (-dps + 5)
        k, small = 0, 0
        while True:
            term = term_z * mp.rgamma(rho * k + mu)
            total += term
            # terms vanish at poles of Gamma, so ask for several small ones
            small = small + 1 if abs(term) < eps else 0
            if small >= 4:
                break
            term_z = term_z * z / (k + 1)
            k += 1
        return complex(total)


def kernel(branch, alpha, mu, x, t, dx=0):
    """Kernel value from the similarity form with the direct series."""
    with mp.workdps(30):
        rho = -mp.mpf(alpha) / 3
        m = mp.mpf(mu) - dx * mp.mpf(alpha) / 3
        t = mp.mpf(t)
        y = mp.mpf(x) * t ** (-mp.mpf(alpha) / 3)
        if abs(y) > Y_NEGLIGIBLE:
            return 0.0
        omega = mp.exp(2j * mp.pi / 3)
        rot = omega ** (1 + dx)
        pref = t ** (m - 1)
        if x < 0:
            return float(pref * mp.re(wright_series(rho, m, y)) / 3)
        val = rot * wright_series(rho, m, omega * y)
        if branch == "G":
            return float(-2 * pref * mp.re(val) / 3)
        return float(pref * mp.im(val) / 3)


def manufactured_trace(alpha, x, t, dx=0):
    r"""Trace of :math:`\int_0^t G(x - 1, t - \tau)\,\tau\,d\tau` by quadrature."""
    mu = 2 * alpha / 3
    with mp.workdps(20):
        f = lambda tau: kernel("G", alpha, mu, x - 1, t - tau, dx) * tau
        return float(mp.quad(f, [0, t / 2, t * 0.9, t * 0.99, t]))
