"""Entropy solutions of ``u_t + f(u)_x * dz/dt = 0`` for piecewise-linear ``z``.

On each linear piece of the path the equation is a conservation law with flux
``lambda * f`` where ``lambda`` is the slope; pieces are chained with a
first-order Godunov scheme on a uniform mesh with outflow boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate

from . import kernels
from .paths import (
    PiecewiseLinearPath,
    RegularityBounds,
    evaluate,
    inv,
    linear_path,
    running_max,
    running_min,
    total_variation,
    uniform_distance,
)


class CFLError(ArithmeticError):
    """Time step violates the CFL restriction."""


class NonConvexFluxError(ValueError):
    pass


class InvariantViolation(AssertionError):
    """A Godunov step broke conservation or the maximum principle."""


@dataclass(frozen=True)
class FluxModel:
    """Strictly convex flux with derivatives.

    ``argmin`` is the point where ``f'`` vanishes (``-inf``/``inf`` if ``f`` is
    monotone). ``h`` optionally gives ``int_0^u f''`` in closed form, and
    ``kernel`` names a compiled Godunov kernel.
    """

    name: str
    f: Callable
    f_prime: Callable
    f_double_prime: Callable
    argmin: float = 0.0
    h: Callable | None = None
    kernel: str | None = None

    def speed_bound(self, lo: float, hi: float) -> float:
        """``max |f'|`` on ``[lo, hi]`` (``f'`` is increasing)."""
        return float(max(abs(self.f_prime(lo)), abs(self.f_prime(hi))))

    def curvature_bound(self, lo: float, hi: float, n: int = 257) -> float:
        return float(np.max(np.abs(self.f_double_prime(np.linspace(lo, hi, n)))))


def burgers() -> FluxModel:
    return FluxModel(
        name="burgers",
        f=lambda u: 0.5 * u * u,
        f_prime=lambda u: u,
        f_double_prime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        argmin=0.0,
        h=lambda u: u,
        kernel="burgers",
    )


def quartic() -> FluxModel:
    """``f(u) = u**4/4 + u**2/2``; ``f'' = 3u**2 + 1 > 0``."""
    return FluxModel(
        name="quartic",
        f=lambda u: 0.25 * u**4 + 0.5 * u * u,
        f_prime=lambda u: u**3 + u,
        f_double_prime=lambda u: 3.0 * u * u + 1.0,
        argmin=0.0,
    )


FLUXES = {"burgers": burgers, "quartic": quartic}


def get_flux(name: str) -> FluxModel:
    try:
        return FLUXES[name]()
    except KeyError:
        raise ValueError(f"unknown flux {name!r}; choose from {sorted(FLUXES)}") from None


def check_convexity(flux: FluxModel, lo: float, hi: float, n: int = 33):
    if np.any(np.asarray(flux.f_double_prime(np.linspace(lo, hi, n))) <= 0):
        raise NonConvexFluxError(f"f'' is not positive on [{lo}, {hi}]")


def fprime_inverse(flux: FluxModel, v: float, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Solve ``f'(u) = v`` for ``u`` in ``[lo, hi]`` by bisection."""
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if flux.f_prime(mid) < v:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class GridSolution:
    """Cell averages on a uniform mesh of ``[x_left, x_right]`` at ``time``."""

    x_left: float
    x_right: float
    cell_averages: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        u = np.array(self.cell_averages, dtype=float)
        if u.ndim != 1 or u.size < 1:
            raise ValueError("cell_averages must be a non-empty 1-d array")
        if not self.x_right > self.x_left:
            raise ValueError("x_right must exceed x_left")
        u.setflags(write=False)
        object.__setattr__(self, "cell_averages", u)

    @classmethod
    def from_function(cls, func, x_left: float, x_right: float, n_cells: int, time: float = 0.0):
        """Sample ``func`` at cell centres."""
        dx = (x_right - x_left) / n_cells
        x = x_left + dx * (np.arange(n_cells) + 0.5)
        return cls(x_left, x_right, np.asarray(func(x), dtype=float) * np.ones(n_cells), time)

    @property
    def n_cells(self) -> int:
        return self.cell_averages.size

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + self.dx * (np.arange(self.n_cells) + 0.5)

    def with_values(self, values, time=None) -> "GridSolution":
        return replace(self, cell_averages=values, time=self.time if time is None else time)

    def mass(self) -> float:
        return math.fsum(self.cell_averages) * self.dx

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.cell_averages)) * self.dx)

    def l2_norm_sq(self) -> float:
        return float(np.sum(self.cell_averages**2) * self.dx)

    def bv_seminorm(self) -> float:
        return float(np.sum(np.abs(np.diff(self.cell_averages))))


def l1_distance(u: GridSolution, v: GridSolution) -> float:
    if u.n_cells != v.n_cells or u.x_left != v.x_left or u.x_right != v.x_right:
        raise ValueError("solutions live on different meshes")
    return float(np.sum(np.abs(u.cell_averages - v.cell_averages)) * u.dx)


def estimate_bounds(u0: GridSolution, flux: FluxModel, jump_threshold: float | None = None) -> RegularityBounds:
    """One-sided Lipschitz constants of ``f'(u0)`` from adjacent-cell quotients.

    A quotient beyond ``jump_threshold`` (default ``0.5/dx``) is read as a jump
    and makes the corresponding constant infinite.
    """
    if u0.n_cells < 2:
        return RegularityBounds(0.0, 0.0)
    thr = 0.5 / u0.dx if jump_threshold is None else jump_threshold
    q = np.diff(flux.f_prime(u0.cell_averages)) / u0.dx
    qmax, qmin = float(q.max()), float(q.min())
    m_plus = math.inf if qmax > thr else max(0.0, qmax)
    m_minus = math.inf if -qmin > thr else max(0.0, -qmin)
    return RegularityBounds(m_minus=m_minus, m_plus=m_plus)


def godunov_step(u: GridSolution, flux: FluxModel, lam: float, dt: float, cfl: float = 1.0, backend=None) -> GridSolution:
    """One conservative Godunov update for the flux ``lam * f``.

    Raises :class:`CFLError` when ``dt*|lam|*max|f'(u)| > cfl*dx``.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    vals = u.cell_averages
    speed = flux.speed_bound(float(vals.min()), float(vals.max()))
    if dt * abs(lam) * speed > cfl * u.dx * (1 + 1e-12):
        raise CFLError(f"CFL number {dt * abs(lam) * speed / u.dx:.4g} exceeds {cfl}")
    ratio = lam * dt / u.dx
    return u.with_values(kernels.advance(vals, ratio, 1, flux, backend), u.time + dt)


def _checked_steps(values, ratio, nsteps, flux, dx, lo, hi, backend):
    for _ in range(nsteps):
        new = kernels.advance(values, ratio, 1, flux, backend)
        boundary = ratio * (float(flux.f(values[-1])) - float(flux.f(values[0])))
        drift = (math.fsum(new) - math.fsum(values) + boundary) * dx
        if abs(drift) > 1e-12:
            raise InvariantViolation(f"mass drift {drift:.3e} in one step")
        if new.min() < lo - 1e-13 or new.max() > hi + 1e-13:
            raise InvariantViolation("update left the initial range")
        values = new
    return values


def solve_path(
    u0: GridSolution,
    z: PiecewiseLinearPath,
    tau: float,
    flux: FluxModel,
    cfl: float = 0.45,
    check_invariants: bool = False,
    backend=None,
) -> GridSolution:
    """Evolve ``u0`` along ``z`` up to ``tau``.

    Each piece with increment ``dz`` is split into
    ``ceil(|dz| * max|f'| / (cfl * dx))`` equal substeps; only ``lambda*dt``
    enters the update, so a piece is advanced by ``dz`` in flux time.
    """
    if not 0 < cfl <= 1:
        raise ValueError("cfl must lie in (0, 1]")
    zr = z.restrict(tau)
    values = u0.cell_averages
    lo, hi = float(values.min()), float(values.max())
    speed = flux.speed_bound(lo, hi)
    dx = u0.dx
    for dz in np.diff(zr.values):
        dz = float(dz)
        if dz == 0.0 or speed == 0.0:
            continue
        nsteps = math.ceil(abs(dz) * speed / (cfl * dx))
        ratio = (dz / nsteps) / dx
        if check_invariants:
            values = _checked_steps(values, ratio, nsteps, flux, dx, lo, hi, backend)
        else:
            values = kernels.advance(values, ratio, nsteps, flux, backend)
    return u0.with_values(values, u0.time + tau)


def shock_free(z: PiecewiseLinearPath, tau: float, bounds: RegularityBounds) -> bool:
    """Whether ``-1/M+ <= z(t) <= 1/M-`` on ``[0, tau]`` (no shock can form)."""
    zr = z.restrict(tau)
    return bool(zr.values.max() <= bounds.upper_level and zr.values.min() >= bounds.lower_level)


def solve_path_cached(u0, z, tau, flux, bounds: RegularityBounds, cfl: float = 0.45, backend=None):
    """Fast path: while ``z`` stays inside the shock-free window the solution at
    ``tau`` depends only on ``z(tau)``, so a single monotone solve suffices.
    Falls back to :func:`solve_path` otherwise."""
    if shock_free(z, tau, bounds):
        endpoint = float(evaluate(z, tau))
        return solve_path(u0, linear_path(tau, endpoint / tau), tau, flux, cfl, backend=backend)
    return solve_path(u0, z, tau, flux, cfl, backend=backend)


def required_padding(u0: GridSolution, z: PiecewiseLinearPath, flux: FluxModel) -> float:
    """Distance waves can travel: ``max|f'(u0)| * TV(z)``."""
    vals = u0.cell_averages
    return flux.speed_bound(float(vals.min()), float(vals.max())) * total_variation(z)


def pad(u0: GridSolution, width: float) -> tuple[GridSolution, int]:
    """Extend the mesh on both sides by at least ``width`` with edge values."""
    k = math.ceil(width / u0.dx)
    vals = np.pad(u0.cell_averages, k, mode="edge")
    return GridSolution(u0.x_left - k * u0.dx, u0.x_right + k * u0.dx, vals, u0.time), k


def riemann_exact(flux: FluxModel, u_left: float, u_right: float, lam: float, t: float, x: float) -> float:
    """Entropy solution of the Riemann problem for ``lam * f`` at ``(t, x)``."""
    lo, hi = min(u_left, u_right), max(u_left, u_right)
    check_convexity(flux, lo, hi)
    if t <= 0 or lam == 0 or u_left == u_right:
        return u_left if x < 0 else u_right
    if lam < 0:
        # u(t, x) = v(t, -x) where v solves the mirrored problem with |lam| f
        return riemann_exact(flux, u_right, u_left, -lam, t, -x)
    xi = x / t
    if u_left > u_right:
        s = lam * (flux.f(u_left) - flux.f(u_right)) / (u_left - u_right)
        return u_left if xi < s else u_right
    if xi <= lam * flux.f_prime(u_left):
        return u_left
    if xi >= lam * flux.f_prime(u_right):
        return u_right
    return fprime_inverse(flux, xi / lam, u_left, u_right)


@dataclass(frozen=True)
class OleinikReport:
    """Discrete check of the one-sided bounds on ``f'(u)`` quotients at time ``t``.

    ``max_violation_*`` is the worst excess beyond bound + slack (0 if none);
    ``max_excess_*`` the worst excess beyond the bare bound.
    """

    time: float
    lower_bound: float
    upper_bound: float
    slack: float
    max_violation_lower: float
    max_violation_upper: float
    max_excess_lower: float
    max_excess_upper: float
    n_violations: int
    quantile_violations: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def oleinik_bounds(z: PiecewiseLinearPath, t: float, bounds: RegularityBounds) -> tuple[float, float]:
    """``(-1/(rho+(t) - z(t)), 1/(z(t) - rho-(t)))`` with ``1/0 = inf``, ``1/inf = 0``."""
    zr = z.restrict(t) if t > 0 else z
    zt = float(evaluate(zr, t))
    rp = float(running_max(zr, bounds)(t))
    rm = float(running_min(zr, bounds)(t))
    return -inv(rp - zt), inv(zt - rm)


def oleinik_report(
    u: GridSolution,
    z: PiecewiseLinearPath,
    t: float,
    bounds: RegularityBounds,
    flux: FluxModel,
    c_slack: float = 2.0,
) -> OleinikReport:
    lower, upper = oleinik_bounds(z, t, bounds)
    q = np.diff(flux.f_prime(u.cell_averages)) / u.dx
    slack = c_slack * math.sqrt(u.dx)
    excess = np.maximum(lower - q, q - upper)
    with np.errstate(invalid="ignore"):
        ex_lo = float(np.max(lower - q)) if q.size else -math.inf
        ex_hi = float(np.max(q - upper)) if q.size else -math.inf
    viol = excess - slack
    n_viol = int(np.count_nonzero(viol > 0))
    quant = {}
    if q.size:
        for p in (50, 90, 99, 100):
            quant[f"p{p}"] = float(np.percentile(excess, p))
    return OleinikReport(
        time=t,
        lower_bound=lower,
        upper_bound=upper,
        slack=slack,
        max_violation_lower=max(0.0, ex_lo - slack),
        max_violation_upper=max(0.0, ex_hi - slack),
        max_excess_lower=max(0.0, ex_lo),
        max_excess_upper=max(0.0, ex_hi),
        n_violations=n_viol,
        quantile_violations=quant,
    )


def bump(x):
    """Smooth bump ``exp(-1/(1-x^2))`` supported on ``(-1, 1)``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def bump_derivative_l1() -> float:
    """``||J'||_{L^1}`` for the normalised bump; equals ``2 J(0)``."""
    total, _ = integrate.quad(lambda s: float(bump(s)), -1, 1)
    return 2.0 * math.exp(-1.0) / total


def _h_values(flux: FluxModel, u):
    if flux.h is not None:
        return np.asarray(flux.h(u), dtype=float)
    uniq, back = np.unique(u, return_inverse=True)
    hv = np.array([integrate.quad(flux.f_double_prime, 0.0, float(v), epsabs=1e-10, epsrel=1e-10)[0] for v in uniq])
    return hv[back]


def mollify_initial(u0: GridSolution, epsilon: float, flux: FluxModel) -> GridSolution:
    """``g((h(u0) * J_eps))`` with ``h = int_0^u f''`` and ``g = h^{-1}``.

    The discrete kernel samples the bump at the mesh offsets inside
    ``(-eps, eps)`` and is normalised to unit sum; the mesh is extended by edge
    values for the convolution.
    """
    dx = u0.dx
    if not epsilon > dx:
        raise ValueError(f"epsilon={epsilon} must exceed dx={dx}")
    u = u0.cell_averages
    hv = _h_values(flux, u)
    m = math.ceil(epsilon / dx)
    w = bump(np.arange(-m, m + 1) * dx / epsilon)
    w /= w.sum()
    conv = np.convolve(np.pad(hv, m, mode="edge"), w, mode="valid")
    if flux.h is not None and flux.name == "burgers":
        return u0.with_values(conv)
    # invert the increasing map h by bisection on the data range
    lo = np.full(conv.shape, float(u.min()))
    hi = np.full(conv.shape, float(u.max()))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = _h_values(flux, mid) < conv
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < 1e-12:
            break
    return u0.with_values(0.5 * (lo + hi))


def mollified_bounds(bounds: RegularityBounds, epsilon: float, u0: GridSolution, flux: FluxModel) -> RegularityBounds:
    """``M^eps = min(M, c/eps * ||h(u0)||_inf)`` with ``c = ||J'||_{L^1}``."""
    cap = bump_derivative_l1() / epsilon * float(np.max(np.abs(_h_values(flux, u0.cell_averages))))
    return RegularityBounds(min(bounds.m_minus, cap), min(bounds.m_plus, cap))


@dataclass(frozen=True)
class DataNorms:
    """Norms entering the continuous-dependence estimate."""

    l1_diff: float
    bv1: float
    bv2: float
    l2sq1: float
    l2sq2: float
    fprime_sup: float
    fsecond_sup: float


def data_norms(u0_1: GridSolution, u0_2: GridSolution, flux: FluxModel) -> DataNorms:
    lo = float(min(u0_1.cell_averages.min(), u0_2.cell_averages.min()))
    hi = float(max(u0_1.cell_averages.max(), u0_2.cell_averages.max()))
    return DataNorms(
        l1_diff=l1_distance(u0_1, u0_2),
        bv1=u0_1.bv_seminorm(),
        bv2=u0_2.bv_seminorm(),
        l2sq1=u0_1.l2_norm_sq(),
        l2sq2=u0_2.l2_norm_sq(),
        fprime_sup=flux.speed_bound(lo, hi),
        fsecond_sup=flux.curvature_bound(lo, hi),
    )


def continuous_dependence_rhs(norms: DataNorms, endpoint_gap: float, path_gap: float, C: float = 1.0) -> float:
    """``L1 + C [ |f'| (BV1 + BV2) endpoint_gap + sqrt(path_gap |f''| (L2^2 + L2^2)) ]``."""
    transport = norms.fprime_sup * (norms.bv1 + norms.bv2) * endpoint_gap
    root = math.sqrt(path_gap * norms.fsecond_sup * (norms.l2sq1 + norms.l2sq2))
    return norms.l1_diff + C * (transport + root)


def stability_rhs(u0_1, u0_2, z1, z2, t: float, flux: FluxModel, C: float = 1.0) -> float:
    """Right-hand side of the continuous-dependence estimate at time ``t``,
    using the sup-distance of the paths on ``[0, t]``."""
    norms = data_norms(u0_1, u0_2, flux)
    gap = abs(float(evaluate(z1, t)) - float(evaluate(z2, t)))
    sup = uniform_distance(z1.restrict(t), z2.restrict(t))
    return continuous_dependence_rhs(norms, gap, sup, C)
