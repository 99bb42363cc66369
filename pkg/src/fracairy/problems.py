r"""Initial-boundary value problems for :math:`\partial_t^\alpha u - u_{xxx} = f`.

All three problems start from :math:`u(x, 0) = 0`.

* Problem 1 on :math:`0 < x < 1` with :math:`u(0,t) = \varphi_1`,
  :math:`u_x(0,t) = \varphi_2`, :math:`u(1,t) = \varphi_3`. The solution is
  sought as boundary potentials of ``G`` anchored at 0, ``V`` anchored at 0
  and ``G`` anchored at 1 with densities :math:`(\alpha, \beta, \gamma)` plus
  the volume potential ``F``; the boundary conditions give a 3x3 Volterra
  system for the densities.
* Problem 2 on :math:`x > 0` with :math:`u(0,t) = \psi_1`,
  :math:`u_x(0,t) = \psi_2`. Potentials of ``G`` and ``V`` at 0 with
  densities :math:`(\lambda, \mu)` that follow in closed form.
* Problem 3 on :math:`x < 0` with :math:`u_{xx}(0^-,t) = \psi`. A single
  ``G`` potential whose density follows from the left jump relation.

Boundary data are functions of ``t`` that must vanish at ``t = 0``; the
forcing is a function of ``(x, t)`` with a declared support.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from fracairy.errors import ConfigError, IncompatibleData
from fracairy.fractional_operators import (
    FractionalOrder,
    SampledFunction,
    TimeGrid,
    as_order,
    caputo_l1,
)
from fracairy.kernels import Branch, KernelSpec, convolution_moments, kernel_values
from fracairy.potentials import VolumePotentialSpec, moment_convolution, volume_potential_grid
from fracairy.volterra import DensitySolution, VolterraSystem, solve_march

SQRT3 = math.sqrt(3.0)

#: coefficient matrix of the boundary system of Problem 1
PROBLEM1_LEAD = np.array([
    [1 / 3, SQRT3 / 6, 0.0],
    [1 / 3, -SQRT3 / 6, 0.0],
    [0.0, 0.0, 1 / 3],
])

REQUIRED_DATA = {1: ("phi1", "phi2", "phi3"), 2: ("psi1", "psi2"), 3: ("psi",)}


# {{{ presets


def bump(r: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump with peak 1 at ``r = 0`` and support ``|r| < 1``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(1 - 1 / (1 - r[inside] ** 2))
    return out


@dataclass(frozen=True)
class TimeData:
    """A named function of time used as boundary data."""

    name: str
    func: Callable[[np.ndarray], np.ndarray]

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.func(t), dtype=float), t.shape).copy()

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"


@dataclass(frozen=True)
class Forcing:
    """A named forcing ``f(x, t)`` vanishing outside ``support``."""

    name: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    support: tuple[float, float] | None = None

    def __call__(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        return np.broadcast_to(np.asarray(self.func(x, t), dtype=float), x.shape).copy()

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"


def _preset_args(spec: str) -> tuple[str, list[float]]:
    name, _, rest = spec.strip().partition(":")
    try:
        args = [float(a) for a in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ConfigError(f"malformed preset arguments in {spec!r}") from exc
    return name.strip().lower(), args


def time_preset(spec: str) -> TimeData:
    """Boundary data presets: ``zero``, ``poly:k`` (``t^k``), ``sin[:w]`` (``sin(w t)``),
    ``bump:center,width`` (smooth bump in ``t``)."""
    name, args = _preset_args(spec)
    if name == "zero" and not args:
        return TimeData("zero", lambda t: np.zeros_like(t))
    if name == "poly" and len(args) == 1 and args[0] > 0:
        k = args[0]
        return TimeData(spec, lambda t: t**k)
    if name == "sin" and len(args) <= 1:
        w = args[0] if args else math.pi
        return TimeData(spec, lambda t: np.sin(w * t))
    if name == "bump" and len(args) == 2 and args[1] > 0:
        c, wd = args
        return TimeData(spec, lambda t: bump((t - c) / wd))
    raise ConfigError(f"unknown boundary-data preset {spec!r}")


def forcing_preset(spec: str) -> Forcing:
    """Forcing presets: ``zero``, ``poly:k`` (``t^k``), ``sin`` (``sin(pi x)``),
    ``bump:center,width`` (smooth bump in ``x``, constant in time)."""
    name, args = _preset_args(spec)
    if name == "zero" and not args:
        return Forcing("zero", lambda x, t: np.zeros_like(x), None)
    if name == "poly" and len(args) == 1 and args[0] >= 0:
        k = args[0]
        return Forcing(spec, lambda x, t: t**k + 0 * x)
    if name == "sin" and not args:
        return Forcing(spec, lambda x, t: np.sin(np.pi * x) + 0 * t)
    if name == "bump" and len(args) == 2 and args[1] > 0:
        c, wd = args
        return Forcing(spec, lambda x, t: bump((x - c) / wd) + 0 * t, (c - wd, c + wd))
    raise ConfigError(f"unknown forcing preset {spec!r}")


def sampled_time_data(name: str, t: np.ndarray, values: np.ndarray) -> TimeData:
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != values.shape or np.any(np.diff(t) <= 0):
        raise ConfigError(f"sampled data {name!r} needs increasing times and matching values")
    return TimeData(name, lambda s: np.interp(s, t, values))


# }}}


# {{{ setup


@dataclass(frozen=True)
class ProblemSetup:
    """Everything needed to solve one of the three problems.

    The spatial grid has ``n_x`` intervals on ``[x_lo, x_hi]``: ``[0, 1]``
    for Problem 1, ``[0, L]`` for Problem 2 and ``[-L, 0]`` for Problem 3.
    The forcing is taken as zero outside its support intersected with the
    physical domain.
    """

    problem_id: int
    alpha: FractionalOrder
    data: Mapping[str, TimeData]
    forcing: Forcing = field(default_factory=lambda: forcing_preset("zero"))
    t_max: float = 1.0
    n_steps: int = 128
    n_x: int = 64
    length: float = 2.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_order(self.alpha))
        if self.problem_id not in REQUIRED_DATA:
            raise ConfigError(f"problem must be 1, 2 or 3, got {self.problem_id}")
        names = REQUIRED_DATA[self.problem_id]
        data = {k: (time_preset(v) if isinstance(v, str) else v) for k, v in self.data.items()}
        for k in names:
            data.setdefault(k, time_preset("zero"))
        extra = set(data) - set(names)
        if extra:
            raise ConfigError(f"problem {self.problem_id} has no boundary data {sorted(extra)}")
        object.__setattr__(self, "data", data)
        if isinstance(self.forcing, str):
            object.__setattr__(self, "forcing", forcing_preset(self.forcing))
        if not self.length > 0:
            raise ConfigError(f"domain length must be positive, got {self.length}")
        if self.n_x < 4:
            raise ConfigError(f"need n_x>=4, got {self.n_x}")
        TimeGrid(self.t_max, self.n_steps)

        for k in names:
            v0 = float(data[k](np.array([0.0]))[0])
            if abs(v0) > 1.0e-12:
                raise IncompatibleData(
                    f"boundary data {k} must vanish at t=0 to match u(x,0)=0, got {v0:.6g}"
                )

    @property
    def domain(self) -> tuple[float, float]:
        if self.problem_id == 1:
            return 0.0, 1.0
        if self.problem_id == 2:
            return 0.0, self.length
        return -self.length, 0.0

    @property
    def physical_domain(self) -> tuple[float, float]:
        return {1: (0.0, 1.0), 2: (0.0, math.inf), 3: (-math.inf, 0.0)}[self.problem_id]

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_max, self.n_steps)

    @property
    def x(self) -> np.ndarray:
        lo, hi = self.domain
        return np.linspace(lo, hi, self.n_x + 1)

    @property
    def dx(self) -> float:
        lo, hi = self.domain
        return (hi - lo) / self.n_x

    def sampled(self, name: str) -> np.ndarray:
        return self.data[name](self.grid.nodes)

    def refined(self, factor: int = 2) -> ProblemSetup:
        return ProblemSetup(
            self.problem_id, self.alpha, self.data, self.forcing, self.t_max,
            self.n_steps * factor, self.n_x * factor, self.length,
        )

    def volume_spec(self) -> VolumePotentialSpec | None:
        """Forcing restricted to its support, snapped outward to the spatial grid."""
        if self.forcing.is_zero:
            return None
        plo, phi = self.physical_domain
        lo, hi = self.domain
        slo, shi = self.forcing.support if self.forcing.support is not None else (lo, hi)
        slo, shi = max(slo, plo), min(shi, phi)
        if self.forcing.support is None:
            slo, shi = max(slo, lo), min(shi, hi)
        if not slo < shi:
            return None
        x0, dx = lo, self.dx
        a = x0 + math.floor((slo - x0) / dx + 1.0e-9) * dx
        b = x0 + math.ceil((shi - x0) / dx - 1.0e-9) * dx
        a, b = max(a, plo), min(b, phi)
        return VolumePotentialSpec(a, b, self.forcing, self.alpha, dx=dx, name=self.forcing.name)


@dataclass(frozen=True)
class SolutionField:
    """Samples ``u[n, i] = u(x_i, t_n)`` with the densities that produced them."""

    setup: ProblemSetup
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    densities: Mapping[str, np.ndarray]
    volume: np.ndarray
    provenance: Mapping[str, object]


# }}}


# {{{ helpers


def _volume(setup: ProblemSetup, x: np.ndarray, dx_count: int = 0) -> np.ndarray:
    spec = setup.volume_spec()
    if spec is None:
        return np.zeros((setup.n_steps + 1, np.size(x)))
    return volume_potential_grid(spec, np.atleast_1d(x), setup.grid, dx_count)


def _potential(
    setup: ProblemSetup,
    branch: Branch,
    anchor: float,
    density: np.ndarray,
    x: np.ndarray,
    dx_count: int = 0,
    side: int = 0,
) -> np.ndarray:
    """Boundary potential with weight 2a/3 at the points *x*, shape ``(n_t + 1, n_x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((setup.n_steps + 1, x.size))
    if not np.any(density):
        return out
    ker = KernelSpec(branch, setup.alpha, setup.alpha.two_thirds, dx_count)
    g = setup.grid
    for i, xx in enumerate(x):
        A, B = convolution_moments(ker, float(xx) - anchor, g.h, g.n_steps, side=side)
        out[:, i] = moment_convolution(A, B, density)
    return out


def _base_provenance(setup: ProblemSetup) -> dict[str, object]:
    return {
        "problem": setup.problem_id,
        "alpha": setup.alpha.alpha,
        "t_max": setup.t_max,
        "n_steps": setup.n_steps,
        "n_x": setup.n_x,
        "domain": setup.domain,
        "forcing": setup.forcing.name,
        "data": {k: v.name for k, v in setup.data.items()},
        "time_quadrature": "product integration, piecewise-linear densities",
        "space_quadrature": "trapezoid on the solution grid",
    }


# }}}


# {{{ problem 1


def problem1_kernel_moments(alpha: FractionalOrder, grid: TimeGrid) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    r"""Cell moments of the four kernels of the boundary system.

    ``K1`` and ``K2`` are :math:`G` with effective weight 0 at offset ``-1``
    (from :math:`\partial_t^{2\alpha/3} G^{2\alpha/3}` and
    :math:`\partial_t^{\alpha/3} G^{2\alpha/3}_x`), ``K3`` and ``K4`` are
    :math:`G^0` and :math:`V^0` at offset ``+1``.
    """
    a = as_order(alpha)
    h, n = grid.h, grid.n_steps
    return {
        "K1": convolution_moments(KernelSpec(Branch.G, a, 0.0), -1.0, h, n),
        "K2": convolution_moments(KernelSpec(Branch.G, a, a.third, 1), -1.0, h, n),
        "K3": convolution_moments(KernelSpec(Branch.G, a, 0.0), 1.0, h, n),
        "K4": convolution_moments(KernelSpec(Branch.V, a, 0.0), 1.0, h, n),
    }


def problem1_kernel_bound(alpha: FractionalOrder, t_max: float, npoints: int = 2000) -> float:
    """Largest observed ``|K_j(s)|`` on ``(0, t_max]``; the kernels are bounded."""
    a = as_order(alpha)
    # log spacing resolves the approach to s = 0, where the kernels stay bounded
    s = t_max * np.logspace(-40, 0, npoints)
    vals = [
        kernel_values(KernelSpec(Branch.G, a, 0.0), -1.0, s),
        kernel_values(KernelSpec(Branch.G, a, 0.0), 1.0, s),
        kernel_values(KernelSpec(Branch.V, a, 0.0), 1.0, s),
    ]
    return float(max(np.max(np.abs(v)) for v in vals))


def problem1_system(setup: ProblemSetup) -> tuple[VolterraSystem, np.ndarray, np.ndarray]:
    """Boundary system of Problem 1, the volume potential on the grid and its x-derivative at 0."""
    a = setup.alpha
    g = setup.grid
    h, n = g.h, g.n_steps

    F = _volume(setup, setup.x)
    Fx0 = _volume(setup, np.array([0.0]), dx_count=1)[:, 0]

    R = np.stack([
        caputo_l1(setup.sampled("phi1") - F[:, 0], h, a.two_thirds),
        caputo_l1(setup.sampled("phi2") - Fx0, h, a.third),
        caputo_l1(setup.sampled("phi3") - F[:, -1], h, a.two_thirds),
    ], axis=1)

    K = problem1_kernel_moments(a, g)
    A = np.zeros((n, 3, 3))
    B = np.zeros((n, 3, 3))
    for (i, j), name in {(0, 2): "K1", (1, 2): "K2", (2, 0): "K3", (2, 1): "K4"}.items():
        A[:, i, j] = -K[name][0]
        B[:, i, j] = -K[name][1]

    system = VolterraSystem(SampledFunction(g, R), moments=(A, B), lead=PROBLEM1_LEAD)
    return system, F, Fx0


def solve_problem1(setup: ProblemSetup, solver: Callable[[VolterraSystem], DensitySolution] = solve_march) -> SolutionField:
    """Solve Problem 1 on ``[0, 1]``."""
    if setup.problem_id != 1:
        raise ConfigError("solve_problem1 needs problem_id=1")
    system, F, _ = problem1_system(setup)
    sol = solver(system)
    dens = sol.values
    x = setup.x

    u = F.copy()
    u += _potential(setup, Branch.G, 0.0, dens[:, 0], x)
    u += _potential(setup, Branch.V, 0.0, dens[:, 1], x)
    u += _potential(setup, Branch.G, 1.0, dens[:, 2], x)

    prov = _base_provenance(setup)
    prov.update(
        volterra_residual=sol.residual_norm,
        volterra_steps=sol.iterations_or_steps,
        kernel_bound=problem1_kernel_bound(setup.alpha, setup.t_max),
    )
    return SolutionField(
        setup, x, setup.grid.nodes, u,
        {"alpha": dens[:, 0], "beta": dens[:, 1], "gamma": dens[:, 2]},
        F, prov,
    )


# }}}


# {{{ problem 2


def problem2_rhs(setup: ProblemSetup) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fractional derivatives of the corrected data and the volume potential on the grid."""
    a = setup.alpha
    h = setup.grid.h
    Q = _volume(setup, setup.x)
    Qx0 = _volume(setup, np.array([0.0]), dx_count=1)[:, 0]
    ra = caputo_l1(setup.sampled("psi1") - Q[:, 0], h, a.two_thirds)
    rb = caputo_l1(setup.sampled("psi2") - Qx0, h, a.third)
    return ra, rb, Q


def solve_problem2(setup: ProblemSetup) -> SolutionField:
    """Solve Problem 2 on ``x > 0``, sampled on ``[0, L]``."""
    if setup.problem_id != 2:
        raise ConfigError("solve_problem2 needs problem_id=2")
    ra, rb, Q = problem2_rhs(setup)
    lam = 1.5 * (ra + rb)
    mu = SQRT3 * (ra - rb)

    x = setup.x
    u = Q.copy()
    u += _potential(setup, Branch.G, 0.0, lam, x)
    u += _potential(setup, Branch.V, 0.0, mu, x)

    prov = _base_provenance(setup)
    prov.update(truncation="forcing restricted to its support within [0, L]")
    return SolutionField(
        setup, x, setup.grid.nodes, u,
        {"lambda": lam, "mu": mu, "rhs_u": ra, "rhs_ux": rb},
        Q, prov,
    )


# }}}


# {{{ problem 3


def problem3_second_derivative_trace(setup: ProblemSetup) -> np.ndarray:
    r""":math:`\partial_x^2 R(0^-, t)` from the kernel with two x-derivatives."""
    return _volume(setup, np.array([0.0]), dx_count=2)[:, 0]


def problem3_density(setup: ProblemSetup, variant: str = "proof") -> np.ndarray:
    r"""Density of Problem 3.

    ``proof`` is :math:`3(\psi - R_{xx}(0, t))`, obtained from the left jump
    value 1/3. ``statement`` is :math:`\tfrac32 (R_{xx}(0, t) - \psi)`, kept
    for comparison only.
    """
    rxx = problem3_second_derivative_trace(setup)
    psi = setup.sampled("psi")
    if variant == "proof":
        return 3.0 * (psi - rxx)
    if variant == "statement":
        return 1.5 * (rxx - psi)
    raise ConfigError(f"unknown density variant {variant!r}")


def solve_problem3(setup: ProblemSetup, variant: str = "proof") -> SolutionField:
    """Solve Problem 3 on ``x < 0``, sampled on ``[-L, 0]``."""
    if setup.problem_id != 3:
        raise ConfigError("solve_problem3 needs problem_id=3")
    theta = problem3_density(setup, variant)
    x = setup.x
    R = _volume(setup, x)
    u = R + _potential(setup, Branch.G, 0.0, theta, x)

    prov = _base_provenance(setup)
    prov.update(truncation="forcing restricted to its support within [-L, 0]", density_variant=variant)
    return SolutionField(setup, x, setup.grid.nodes, u, {"theta": theta}, R, prov)


# }}}


def solve(setup: ProblemSetup) -> SolutionField:
    return {1: solve_problem1, 2: solve_problem2, 3: solve_problem3}[setup.problem_id](setup)
