"""Distance between equivalence classes of driving paths.

Two paths are compared through monotone reparameterizations ``(a1, a2)`` of
``[0, tau]``. The cost of a pair only depends on where the planar curve
``(a1, a2)`` first crosses the vertical lines ``s1 = t`` (``t`` in the ORM
times of ``z1``) and the horizontal lines ``s2 = t`` (ORM times of ``z2``), so
the infimum is searched over monotone lattice paths on that grid by dynamic
programming.

Lattice conventions
-------------------
Nodes are grid intersections ``(j, k)``. A path moves right ``(j+1, k)``, up
``(j, k+1)`` or diagonally ``(j+1, k+1)``. Entering column ``j+1`` charges the
vertical line's term at the arrival node, entering row ``k+1`` the horizontal
line's term; a diagonal move charges both. A term is nonzero only for lines of
kind +1 (-1) at nodes inside the up-set ``K+`` (``K-``) where the larger running
max exceeds ``max(1/M1-, 1/M2-)`` (the smaller running min drops below
``min(-1/M1+, -1/M2+)``). The terminal gap ``|z1(tau) - z2(tau)|`` is always
charged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .orm import orm
from .paths import (
    DomainError,
    PiecewiseLinearPath,
    RegularityBounds,
    compose,
    evaluate,
    running_max,
    running_min,
)


class GridTooLargeError(ValueError):
    """Exhaustive enumeration refused because the grid has too many cells."""


@dataclass(frozen=True, eq=False)
class CostGrid:
    """Grid lines, their kinds and the running extrema sampled on them.

    ``kinds*`` holds +1 for lines in T+, -1 for T-, 0 otherwise (including
    refinement lines). ``k_plus_region = (i1, i2)`` encodes
    ``K+ = {(j, k) : j >= i1 or k >= i2}`` on the lattice; an index equal to the
    number of lines means the threshold is never crossed on that axis.
    """

    t1_breaks: np.ndarray
    t2_breaks: np.ndarray
    kinds1: np.ndarray
    kinds2: np.ndarray
    rho1_plus: np.ndarray
    rho1_minus: np.ndarray
    rho2_plus: np.ndarray
    rho2_minus: np.ndarray
    c_plus: float
    c_minus: float
    k_plus_region: tuple
    k_minus_region: tuple
    terminal_cost: float
    tau: float

    @property
    def shape(self) -> tuple:
        """Number of cells ``(N1, N2)``."""
        return self.t1_breaks.size - 1, self.t2_breaks.size - 1

    def in_k_plus(self, j: int, k: int) -> bool:
        return j >= self.k_plus_region[0] or k >= self.k_plus_region[1]

    def in_k_minus(self, j: int, k: int) -> bool:
        return j >= self.k_minus_region[0] or k >= self.k_minus_region[1]

    def vertical_term(self, j: int, k: int) -> float:
        """Cost of first reaching column line ``j`` at row ``k``."""
        kind = self.kinds1[j]
        if kind > 0 and self.in_k_plus(j, k):
            return abs(self.rho1_plus[j] - self.rho2_plus[k])
        if kind < 0 and self.in_k_minus(j, k):
            return abs(self.rho1_minus[j] - self.rho2_minus[k])
        return 0.0

    def horizontal_term(self, j: int, k: int) -> float:
        """Cost of first reaching row line ``k`` at column ``j``."""
        kind = self.kinds2[k]
        if kind > 0 and self.in_k_plus(j, k):
            return abs(self.rho1_plus[j] - self.rho2_plus[k])
        if kind < 0 and self.in_k_minus(j, k):
            return abs(self.rho1_minus[j] - self.rho2_minus[k])
        return 0.0


@dataclass(frozen=True, eq=False)
class DistanceReport:
    value: float
    witness: np.ndarray
    kappa_plus: float
    kappa_minus: float
    grid_dims: tuple

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": self.witness.tolist(),
            "kappa_plus": _json_float(self.kappa_plus),
            "kappa_minus": _json_float(self.kappa_minus),
            "grid_dims": list(self.grid_dims),
        }


def _json_float(x):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _common_horizon(z1, z2, tau):
    if tau is None:
        if z1.horizon != z2.horizon:
            raise DomainError(f"horizon mismatch: {z1.horizon} vs {z2.horizon}")
        tau = z1.horizon
    if tau > z1.horizon or tau > z2.horizon:
        raise DomainError(f"tau={tau} beyond a path horizon")
    return float(tau)


def _first_index_above(values, level):
    """Smallest index with ``values[i] > level``; ``len(values)`` if none."""
    hits = np.flatnonzero(np.asarray(values) > level)
    return int(hits[0]) if hits.size else len(values)


def _sample(rho, t):
    return np.asarray(rho(np.asarray(t, dtype=float)), dtype=float)


def build_cost_grid(z1, z2, bounds1: RegularityBounds, bounds2: RegularityBounds, tau=None, refine: bool = True) -> CostGrid:
    """Assemble the lattice for :func:`dp_distance`.

    With ``refine`` each axis also receives the other path's ORM times as
    cost-free lines, which puts the diagonal ``s1 = s2`` on the lattice.
    """
    tau = _common_horizon(z1, z2, tau)
    r1 = orm(z1, tau, bounds1)
    r2 = orm(z2, tau, bounds2)
    axes = []
    for own, other in ((r1, r2), (r2, r1)):
        times = np.asarray(own.taus, dtype=float)
        if refine:
            times = np.union1d(times, np.asarray(other.taus, dtype=float))
        kinds = np.array([own.kind(float(t)) for t in times], dtype=int)
        axes.append((times, kinds, _sample(own.rho_plus, times), _sample(own.rho_minus, times)))
    (t1, k1, p1, m1), (t2, k2, p2, m2) = axes

    c_plus = max(bounds1.upper_level, bounds2.upper_level)
    c_minus = min(bounds1.lower_level, bounds2.lower_level)
    if math.isinf(c_plus):
        kp = (t1.size, t2.size)
    else:
        kp = (_first_index_above(p1, c_plus), _first_index_above(p2, c_plus))
    if math.isinf(c_minus):
        km = (t1.size, t2.size)
    else:
        km = (_first_index_above(-m1, -c_minus), _first_index_above(-m2, -c_minus))
    terminal = abs(float(evaluate(r1.path, tau)) - float(evaluate(r2.path, tau)))
    return CostGrid(t1, t2, k1, k2, p1, m1, p2, m2, c_plus, c_minus, kp, km, terminal, tau)


# up, right, diagonal: the order doubles as the tie-break preference
_MOVES = ((0, 1), (1, 0), (1, 1))


def _move_cost(grid: CostGrid, j: int, k: int, dj: int, dk: int) -> float:
    cost = 0.0
    if dj:
        cost = grid.vertical_term(j + dj, k + dk)
    if dk:
        cost = max(cost, grid.horizontal_term(j + dj, k + dk))
    return cost


def value_function(grid: CostGrid) -> np.ndarray:
    """``V[j, k]``: least achievable max-cost from node ``(j, k)`` to the end."""
    n1, n2 = grid.shape
    V = np.full((n1 + 1, n2 + 1), math.inf)
    V[n1, n2] = grid.terminal_cost
    for j in range(n1, -1, -1):
        for k in range(n2, -1, -1):
            if j == n1 and k == n2:
                continue
            best = math.inf
            for dj, dk in _MOVES:
                if j + dj > n1 or k + dk > n2:
                    continue
                best = min(best, max(_move_cost(grid, j, k, dj, dk), V[j + dj, k + dk]))
            V[j, k] = best
    return V


def _witness(grid: CostGrid, V: np.ndarray) -> np.ndarray:
    n1, n2 = grid.shape
    j = k = 0
    nodes = [(0, 0)]
    while (j, k) != (n1, n2):
        target = V[j, k]
        for dj, dk in _MOVES:
            if j + dj > n1 or k + dk > n2:
                continue
            if max(_move_cost(grid, j, k, dj, dk), V[j + dj, k + dk]) == target:
                j, k = j + dj, k + dk
                break
        nodes.append((j, k))
    idx = np.array(nodes)
    return np.column_stack((grid.t1_breaks[idx[:, 0]], grid.t2_breaks[idx[:, 1]]))


def witness_parameterization(witness) -> tuple:
    """Reparameterizations ``(a1, a2)`` tracing the witness polyline.

    Node ``(x, y)`` is visited at parameter time ``(x + y) / 2``, which is
    strictly increasing along a monotone lattice path and ends at ``tau``.
    """
    w = np.asarray(witness, dtype=float)
    r = 0.5 * (w[:, 0] + w[:, 1])
    r[-1] = w[-1, 0]
    return (
        PiecewiseLinearPath(r, w[:, 0], anchored=False),
        PiecewiseLinearPath(r, w[:, 1], anchored=False),
    )


def dp_distance(z1, z2, bounds1: RegularityBounds, bounds2: RegularityBounds, tau=None, refine: bool = True) -> DistanceReport:
    """Minimal max-cost over monotone lattice paths, with a witness path.

    Examples
    --------
    >>> from roughscl.paths import PiecewiseLinearPath, RegularityBounds
    >>> z = PiecewiseLinearPath([0, 1, 2], [0, 1, 0])
    >>> b = RegularityBounds(10.0, 10.0)
    >>> dp_distance(z, z, b, b).value
    0.0
    """
    grid = build_cost_grid(z1, z2, bounds1, bounds2, tau, refine)
    V = value_function(grid)
    witness = _witness(grid, V)
    a1, a2 = witness_parameterization(witness)
    kp = kappa(z1.restrict(grid.tau), z2.restrict(grid.tau), a1, a2, bounds1, bounds2, +1)
    km = kappa(z1.restrict(grid.tau), z2.restrict(grid.tau), a1, a2, bounds1, bounds2, -1)
    return DistanceReport(float(V[0, 0]), witness, kp, km, grid.shape)


def brute_force_distance(grid: CostGrid, max_cells: int = 36) -> float:
    """Exhaustive minimum over all right/up/diagonal lattice paths.

    First-hit events are recomputed along every path from the set of lines
    already crossed, independently of :func:`value_function`.
    """
    n1, n2 = grid.shape
    if n1 * n2 > max_cells:
        raise GridTooLargeError(f"{n1}x{n2} grid exceeds max_cells={max_cells}")

    def term(kind, j, k):
        if kind > 0 and max(grid.rho1_plus[j], grid.rho2_plus[k]) > grid.c_plus:
            return abs(grid.rho1_plus[j] - grid.rho2_plus[k])
        if kind < 0 and min(grid.rho1_minus[j], grid.rho2_minus[k]) < grid.c_minus:
            return abs(grid.rho1_minus[j] - grid.rho2_minus[k])
        return 0.0

    best = math.inf
    # stack of (j, k, highest column reached, highest row reached, running max)
    stack = [(0, 0, 0, 0, 0.0)]
    while stack:
        j, k, seen_j, seen_k, acc = stack.pop()
        if j > seen_j:
            acc = max(acc, term(grid.kinds1[j], j, k))
            seen_j = j
        if k > seen_k:
            acc = max(acc, term(grid.kinds2[k], j, k))
            seen_k = k
        if j == n1 and k == n2:
            best = min(best, max(acc, grid.terminal_cost))
            continue
        for dj, dk in ((1, 0), (0, 1), (1, 1)):
            if j + dj <= n1 and k + dk <= n2:
                stack.append((j + dj, k + dk, seen_j, seen_k, acc))
    return best


def _rho(path, bounds, sign):
    return running_max(path, bounds) if sign > 0 else running_min(path, bounds)


def _crossing_time(rho, level: float, sign: int) -> float:
    """``inf{t : sign * rho(t) > sign * level}``, or ``inf`` if never."""
    if getattr(rho, "is_infinite", False):
        return 0.0 if sign * rho.sign > 0 else math.inf
    v = sign * rho.values
    lvl = sign * level
    i = _first_index_above(v, lvl)
    if i == v.size:
        return math.inf
    if i == 0:
        return 0.0
    t0, t1 = float(rho.times[i - 1]), float(rho.times[i])
    return t0 + (lvl - v[i - 1]) * (t1 - t0) / (v[i] - v[i - 1])


def kappa(z1, z2, alpha1, alpha2, bounds1, bounds2, sign: int) -> float:
    """Truncation time for the running max (``sign=+1``) or min (``sign=-1``)."""
    if sign > 0:
        level = max(bounds1.upper_level, bounds2.upper_level)
    else:
        level = min(bounds1.lower_level, bounds2.lower_level)
    if math.isinf(level):
        return math.inf
    w1 = compose(z1, alpha1)
    w2 = compose(z2, alpha2)
    return min(_crossing_time(_rho(w1, bounds1, sign), level, sign), _crossing_time(_rho(w2, bounds2, sign), level, sign))


def phi(z1, z2, alpha1, alpha2, bounds1: RegularityBounds, bounds2: RegularityBounds) -> float:
    """Cost of comparing ``z1∘alpha1`` with ``z2∘alpha2``.

    Maximum of the running-max gaps at ORM times of type + after ``kappa+``,
    the running-min gaps at ORM times of type - after ``kappa-`` and the
    endpoint gap.
    """
    w1 = compose(z1, alpha1)
    w2 = compose(z2, alpha2)
    if w1.horizon != w2.horizon:
        raise DomainError("reparameterizations must share their domain")
    tau = w1.horizon
    r1 = orm(w1, tau, bounds1)
    r2 = orm(w2, tau, bounds2)
    out = abs(float(evaluate(w1, tau)) - float(evaluate(w2, tau)))
    for sign, events in ((+1, r1.t_plus + r2.t_plus), (-1, r1.t_minus + r2.t_minus)):
        k = kappa(z1, z2, alpha1, alpha2, bounds1, bounds2, sign)
        if not events or math.isinf(k):
            continue
        rho1 = _rho(w1, bounds1, sign)
        rho2 = _rho(w2, bounds2, sign)
        for t in events:
            if t > k:
                out = max(out, abs(float(rho1(t)) - float(rho2(t))))
    return out


def identity(tau: float) -> PiecewiseLinearPath:
    return PiecewiseLinearPath([0.0, tau], [0.0, tau])


def stability_bound_improved(norms, z1, z2, dist: float, tau=None, C: float = 1.0) -> float:
    """Continuous-dependence bound with the class distance ``dist`` in place of
    the sup-distance of the paths.

    ``norms`` is a :class:`roughscl.solver.DataNorms`.
    """
    from .solver import continuous_dependence_rhs

    if norms is None:
        raise ValueError("data norms are required")
    if dist < 0:
        raise ValueError("dist must be nonnegative")
    tau = _common_horizon(z1, z2, tau)
    gap = abs(float(evaluate(z1, tau)) - float(evaluate(z2, tau)))
    return continuous_dependence_rhs(norms, gap, dist, C)
