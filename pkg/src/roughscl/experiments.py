"""Reusable numerical experiments shared by the CLI and the acceptance tests."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .orm import orm
from .paths import PiecewiseLinearPath, RegularityBounds, sample_brownian, uniform_distance
from .solver import (
    GridSolution,
    estimate_bounds,
    l1_distance,
    oleinik_report,
    solve_path,
)

INITIAL_DATA = {
    "tanh": lambda x: -np.tanh(x / 0.5),
    "box": lambda x: np.where(np.abs(x) < 1.0, 1.0, 0.0),
    "step": lambda x: np.where(x < 0.0, 1.0, 0.0),
    "sine": lambda x: 0.5 * np.sin(x),
}


def initial_data(name: str, x_left: float, x_right: float, n_cells: int) -> GridSolution:
    try:
        func = INITIAL_DATA[name]
    except KeyError:
        raise ValueError(f"unknown initial data {name!r}; choose from {sorted(INITIAL_DATA)}") from None
    return GridSolution.from_function(func, x_left, x_right, n_cells)


def fit_exponent(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("need at least two positive samples")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass
class OrmGap:
    n_cells: int
    gap: float
    relative_gap: float
    n_steps: int
    bounds: RegularityBounds


def orm_gap(u0: GridSolution, z: PiecewiseLinearPath, tau: float, flux, cfl: float = 0.45, bounds=None) -> OrmGap:
    """L1 distance at ``tau`` between the solutions driven by ``z`` and by its ORM."""
    if bounds is None:
        bounds = estimate_bounds(u0, flux)
    res = orm(z, tau, bounds)
    ua = solve_path(u0, z, tau, flux, cfl)
    ub = solve_path(u0, res.compressed, tau, flux, cfl)
    gap = l1_distance(ua, ub)
    return OrmGap(u0.n_cells, gap, gap / u0.l1_norm(), res.n_steps, bounds)


def oleinik_scan(u0: GridSolution, z: PiecewiseLinearPath, times, flux, bounds=None, c_slack: float = 2.0, cfl: float = 0.45):
    """Oleinik reports at each of ``times`` (solutions recomputed from 0)."""
    if bounds is None:
        bounds = estimate_bounds(u0, flux)
    return [oleinik_report(solve_path(u0, z, t, flux, cfl), z, t, bounds, flux, c_slack) for t in times]


def coarsen(path: PiecewiseLinearPath, n_segments: int) -> PiecewiseLinearPath:
    """Interpolate ``path`` on every ``k``-th breakpoint (``n_segments`` pieces)."""
    total = path.times.size - 1
    if total % n_segments:
        raise ValueError(f"{n_segments} does not divide the {total} segments of the path")
    idx = np.arange(0, total + 1, total // n_segments)
    return PiecewiseLinearPath(path.times[idx], path.values[idx])


def convergence_study(
    u0: GridSolution,
    target: PiecewiseLinearPath,
    levels,
    flux,
    cfl: float = 0.45,
    jobs: int = 1,
):
    """Errors of solutions driven by coarsened targets against the full target.

    Returns a list of dict rows ``{segments, sup_distance, l1_error}``; rows are
    ordered as ``levels`` regardless of ``jobs``.
    """
    tau = target.horizon
    reference = solve_path(u0, target, tau, flux, cfl)

    def one(k):
        zn = coarsen(target, k)
        err = l1_distance(solve_path(u0, zn, tau, flux, cfl), reference)
        return {"segments": int(k), "sup_distance": uniform_distance(zn, target), "l1_error": err}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, levels))
    return [one(k) for k in levels]


def brownian_convergence(u0, n_target: int, levels, flux, seed: int, scale: float = 1.0, tau: float = 1.0, cfl=0.45, jobs=1):
    target = sample_brownian(tau, n_target, seed, scale)
    rows = convergence_study(u0, target, levels, flux, cfl, jobs)
    usable = [r for r in rows if r["sup_distance"] > 0 and r["l1_error"] > 0]
    exponent = math.nan
    if len(usable) >= 2:
        exponent = fit_exponent([r["sup_distance"] for r in usable], [r["l1_error"] for r in usable])
    return rows, exponent


def bump_perturbation(z: PiecewiseLinearPath, delta: float) -> PiecewiseLinearPath:
    """``z + delta * sin(pi t / tau)``: sup-distance ``delta`` (attained at a
    breakpoint when ``tau/2`` is one), same endpoint."""
    tau = z.horizon
    t = np.union1d(z.times, [0.5 * tau])
    vals = np.interp(t, z.times, z.values) + delta * np.sin(np.pi * t / tau)
    vals[0] = 0.0
    vals[-1] = z.values[-1]
    return PiecewiseLinearPath(t, vals)
