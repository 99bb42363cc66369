r"""Second-kind Volterra systems with weakly singular convolution kernels.

.. math::

    L\,\Phi(t) = F(t) + \int_0^t K(t - \tau)\,\Phi(\tau)\,d\tau,

with a constant invertible ``d x d`` matrix :math:`L` (the identity unless
given). Both solvers share one discretization: :math:`\Phi` is piecewise
linear in time and the kernel enters only through its cell moments

.. math::

    A_k = \int_{kh}^{(k+1)h} K(s)(1 - \theta)\,ds, \qquad
    B_k = \int_{kh}^{(k+1)h} K(s)\,\theta\,ds, \qquad \theta = s/h - k.

Time marching solves the resulting lower-triangular system step by step;
Picard iteration applies the same discrete operator repeatedly and realizes
the action of the resolvent on the forcing.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from fracairy.errors import ConfigError, Instability, NoConvergence, SingularMatrix
from fracairy.fractional_operators import SampledFunction, TimeGrid, causal_convolve


OVERFLOW_GUARD = 1.0e100

_GL_X, _GL_W = roots_legendre(16)


@dataclass(frozen=True)
class VolterraSystem:
    """A discretized Volterra system.

    *kernel* maps an array of lags ``s`` of shape ``(m,)`` to an array of
    shape ``(m, d, d)``. It may behave like :math:`s^{-p}` at the origin with
    ``p = singular_exponent < 1``. Alternatively, precomputed *moments*
    ``(A, B)`` of shape ``(n, d, d)`` replace the kernel.
    """

    forcing: SampledFunction
    kernel: Callable[[np.ndarray], np.ndarray] | None = None
    singular_exponent: float = 0.0
    moments: tuple[np.ndarray, np.ndarray] | None = None
    lead: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kernel is None and self.moments is None:
            raise ConfigError("a Volterra system needs a kernel or its moments")
        if not 0.0 <= self.singular_exponent < 1.0:
            raise ConfigError(f"kernel singularity needs 0<=p<1, got p={self.singular_exponent}")
        if self.moments is not None:
            A, B = self.moments
            n, d = self.grid.n_steps, self.dimension
            if A.shape != (n, d, d) or B.shape != (n, d, d):
                raise ConfigError(f"moments must have shape {(n, d, d)}, got {A.shape}, {B.shape}")

    @property
    def grid(self) -> TimeGrid:
        return self.forcing.grid

    @property
    def dimension(self) -> int:
        v = self.forcing.values
        return 1 if v.ndim == 1 else v.shape[1]

    @property
    def lead_matrix(self) -> np.ndarray:
        d = self.dimension
        return np.eye(d) if self.lead is None else np.asarray(self.lead, dtype=float).reshape(d, d)

    @property
    def forcing_matrix(self) -> np.ndarray:
        return self.forcing.values.reshape(self.grid.n_steps + 1, self.dimension)


@dataclass(frozen=True)
class DensitySolution:
    grid: TimeGrid
    values: np.ndarray
    residual_norm: float
    iterations_or_steps: int
    contraction_ratio: float = float("nan")


# {{{ moments


def kernel_moments(system: VolterraSystem) -> tuple[np.ndarray, np.ndarray]:
    """Cell moments of the kernel, shape ``(n, d, d)`` each."""
    if system.moments is not None:
        return system.moments

    grid, d = system.grid, system.dimension
    n, h = grid.n_steps, grid.h
    p = system.singular_exponent

    def K(s: np.ndarray) -> np.ndarray:
        return np.asarray(system.kernel(s), dtype=float).reshape(s.size, d, d)

    # cells k >= 1
    k = np.arange(1, n, dtype=float)
    theta = 0.5 * (_GL_X + 1)
    s = (k[:, None] + theta[None, :]) * h
    Ks = K(s.ravel()).reshape(n - 1, theta.size, d, d)
    w = 0.5 * h * _GL_W
    A = np.zeros((n, d, d))
    B = np.zeros((n, d, d))
    A[1:] = np.einsum("q,kqij->kij", w * (1 - theta), Ks)
    B[1:] = np.einsum("q,kqij->kij", w * theta, Ks)

    # first cell with the s^-p factor in the weight
    xj, wj = roots_jacobi(16, 0.0, -p)
    s0 = 0.5 * h * (1 + xj)
    K0 = K(s0) * s0[:, None, None] ** p
    scale = (0.5 * h) ** (1 - p)
    th0 = s0 / h
    A[0] = scale * np.einsum("q,qij->ij", wj * (1 - th0), K0)
    B[0] = scale * np.einsum("q,qij->ij", wj * th0, K0)

    return A, B


def apply_moments(A: np.ndarray, B: np.ndarray, phi: np.ndarray) -> np.ndarray:
    r"""Discrete convolution :math:`(K * \Phi)_n = \sum_k A_k \Phi_{n-k} + B_k \Phi_{n-k-1}`."""
    nn, d = phi.shape
    out = np.zeros_like(phi)
    for i in range(d):
        for j in range(d):
            if np.any(A[:, i, j]) or np.any(B[:, i, j]):
                out[1:, i] += causal_convolve(A[:, i, j], phi[1:, j])
                out[1:, i] += causal_convolve(B[:, i, j], phi[:-1, j])
    return out


def discrete_residual(system: VolterraSystem, phi: np.ndarray) -> float:
    A, B = kernel_moments(system)
    phi = phi.reshape(system.grid.n_steps + 1, system.dimension)
    r = phi @ system.lead_matrix.T - system.forcing_matrix - apply_moments(A, B, phi)
    return float(np.max(np.abs(r)))


def _check_lead(L: np.ndarray) -> None:
    if not np.all(np.isfinite(L)) or np.linalg.cond(L) > 1.0e12:
        raise SingularMatrix("the instantaneous coefficient matrix is singular")


# }}}


# {{{ solvers


def solve_march(system: VolterraSystem) -> DensitySolution:
    """Solve by causal time marching.

    At node ``n`` the history sum over earlier nodes is formed from the cell
    moments and the ``d x d`` system :math:`(L - A_0)\\Phi_n = \\ldots` is
    solved.

    :raises SingularMatrix: if :math:`L` or :math:`L - A_0` is singular.
    :raises Instability: if the solution exceeds the overflow guard.
    """
    A, B = kernel_moments(system)
    L = system.lead_matrix
    _check_lead(L)
    F = system.forcing_matrix
    n, d = system.grid.n_steps, system.dimension

    M = L - A[0]
    _check_lead(M)
    lu = np.linalg.inv(M)

    phi = np.zeros((n + 1, d))
    phi[0] = np.linalg.solve(L, F[0])
    for m in range(1, n + 1):
        hist = F[m].copy()
        if m > 1:
            hist += np.einsum("kij,kj->i", A[1:m], phi[m - 1 : 0 : -1])
        hist += np.einsum("kij,kj->i", B[:m], phi[m - 1 :: -1])
        phi[m] = lu @ hist
        if not np.all(np.abs(phi[m]) < OVERFLOW_GUARD):
            raise Instability(f"density exceeded {OVERFLOW_GUARD:.0e} at step {m}")

    values = phi if system.forcing.values.ndim > 1 else phi[:, 0]
    return DensitySolution(system.grid, values, discrete_residual(system, phi), n)


def solve_picard(system: VolterraSystem, max_iter: int = 200, tol: float = 1.0e-12) -> DensitySolution:
    r"""Solve by successive approximation :math:`\Phi \leftarrow L^{-1}(F + K * \Phi)`.

    Stops when successive iterates differ by less than *tol* in the sup
    norm. The observed contraction ratio is the ratio of the last two
    increments.

    :raises NoConvergence: after *max_iter* iterations, carrying the ratio.
    """
    A, B = kernel_moments(system)
    L = system.lead_matrix
    _check_lead(L)
    Linv = np.linalg.inv(L)
    F = system.forcing_matrix

    phi = F @ Linv.T
    prev_inc = np.nan
    ratio = np.nan
    for it in range(1, max_iter + 1):
        new = (F + apply_moments(A, B, phi)) @ Linv.T
        inc = float(np.max(np.abs(new - phi)))
        if it > 1 and prev_inc > 0:
            ratio = inc / prev_inc
        phi = new
        if not np.all(np.abs(phi) < OVERFLOW_GUARD):
            raise Instability("Picard iterates exceeded the overflow guard")
        if inc < tol:
            values = phi if system.forcing.values.ndim > 1 else phi[:, 0]
            return DensitySolution(system.grid, values, discrete_residual(system, phi), it, ratio)
        prev_inc = inc

    raise NoConvergence(
        f"Picard iteration did not converge in {max_iter} iterations "
        f"(last increment {inc:.3e}, contraction ratio {ratio:.3g})",
        ratio=ratio,
    )


# }}}
