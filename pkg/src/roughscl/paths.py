"""Piecewise-linear driving paths.

All operations work on breakpoints in double precision; nothing here samples
densely. A path is immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

BROWNIAN_GENERATOR = f"numpy.random.PCG64+standard_normal (numpy {np.__version__})"


class PathError(ValueError):
    """Base class for invalid path input."""


class DomainError(PathError):
    """Argument outside the domain of the path."""


class ContractError(PathError):
    """Input violates a structural precondition (monotonicity, surjectivity)."""


def inv(x: float) -> float:
    """Reciprocal with ``1/0 = inf`` and ``1/inf = 0``."""
    if x == 0:
        return math.inf
    if math.isinf(x):
        return 0.0
    return 1.0 / x


@dataclass(frozen=True)
class RegularityBounds:
    """One-sided Lipschitz constants of ``f'(u0)``.

    ``-m_minus <= (f'(u0(y)) - f'(u0(x))) / (y - x) <= m_plus`` for ``x < y``.
    Either constant may be ``math.inf``.
    """

    m_minus: float = math.inf
    m_plus: float = math.inf

    def __post_init__(self):
        for name in ("m_minus", "m_plus"):
            v = getattr(self, name)
            if math.isnan(v) or v < 0:
                raise ValueError(f"{name} must lie in [0, inf], got {v}")

    @property
    def upper_level(self) -> float:
        """Truncation level ``1/M-`` of the running max."""
        return inv(self.m_minus)

    @property
    def lower_level(self) -> float:
        """Truncation level ``-1/M+`` of the running min."""
        return -inv(self.m_plus)

    def swapped(self) -> "RegularityBounds":
        return RegularityBounds(m_minus=self.m_plus, m_plus=self.m_minus)


class PiecewiseLinearPath:
    """Continuous path given by its breakpoints ``(times[i], values[i])``.

    Parameters
    ----------
    times : array_like
        Strictly increasing, ``times[0] == 0``.
    values : array_like
        Path values at the breakpoints.
    anchored : bool
        Require ``values[0] == 0`` (paths in C_0).
    """

    __slots__ = ("times", "values")
    is_infinite = False

    def __init__(self, times, values, anchored: bool = True):
        t = np.array(times, dtype=float)
        v = np.array(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise PathError("times and values must be 1-d arrays of equal length")
        if t.size < 2:
            raise PathError("a path needs at least two breakpoints")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise PathError("breakpoints must be finite")
        if t[0] != 0.0:
            raise PathError("first breakpoint time must be 0")
        if np.any(np.diff(t) <= 0):
            raise PathError("breakpoint times must be strictly increasing")
        if anchored and v[0] != 0.0:
            raise PathError("anchored path must start at 0")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("PiecewiseLinearPath is immutable")

    def __repr__(self):
        return f"PiecewiseLinearPath(n={self.times.size}, horizon={self.horizon!r})"

    def __len__(self):
        return self.times.size

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        return evaluate(self, t)

    def __neg__(self):
        return PiecewiseLinearPath(self.times, -self.values, anchored=False)

    def same_breakpoints(self, other: "PiecewiseLinearPath") -> bool:
        return (
            not other.is_infinite
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )

    def restrict(self, tau: float) -> "PiecewiseLinearPath":
        """The path on ``[0, tau]``, with a breakpoint inserted at ``tau``."""
        if not 0 < tau <= self.horizon:
            raise DomainError(f"tau={tau} outside (0, {self.horizon}]")
        if tau == self.horizon:
            return self
        k = int(np.searchsorted(self.times, tau, side="left"))
        if self.times[k] == tau:
            times, values = self.times[: k + 1], self.values[: k + 1]
        else:
            times = np.append(self.times[:k], tau)
            values = np.append(self.values[:k], evaluate(self, tau))
        return PiecewiseLinearPath(times, values, anchored=False)


@dataclass(frozen=True)
class InfinitePath:
    """Constant path at ``sign * inf``; running extremum with infinite truncation."""

    sign: int
    horizon: float
    is_infinite = True

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.horizon)):
            raise DomainError("evaluation time outside path horizon")
        out = np.full(t.shape, self.sign * math.inf)
        return float(out) if out.ndim == 0 else out

    def __neg__(self):
        return InfinitePath(-self.sign, self.horizon)


def evaluate(path: PiecewiseLinearPath, t):
    """Exact linear interpolation; stored values are returned at breakpoints."""
    ts, vs = path.times, path.values
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0) | (t_arr > ts[-1])) or np.any(np.isnan(t_arr)):
        raise DomainError(f"evaluation time outside [0, {ts[-1]}]")
    i = np.clip(np.searchsorted(ts, t_arr, side="right") - 1, 0, ts.size - 2)
    t0, t1 = ts[i], ts[i + 1]
    v0, v1 = vs[i], vs[i + 1]
    out = v0 + (t_arr - t0) * (v1 - v0) / (t1 - t0)
    out = np.where(t_arr == t0, v0, np.where(t_arr == t1, v1, out))
    return float(out) if out.ndim == 0 else out


def running_max(path: PiecewiseLinearPath, bounds: RegularityBounds):
    """Truncated running max ``max(1/M-, max_{s<=t} z(s))`` as an exact path.

    Returns an :class:`InfinitePath` when ``M- = 0``.
    """
    level = bounds.upper_level
    if math.isinf(level):
        return InfinitePath(+1, path.horizon)
    ts, vs = path.times, path.values
    m = max(level, float(vs[0]))
    out_t, out_v = [0.0], [m]
    for i in range(ts.size - 1):
        t0, t1 = float(ts[i]), float(ts[i + 1])
        z0, z1 = float(vs[i]), float(vs[i + 1])
        if z1 > m:
            if z0 < m:
                tc = t0 + (m - z0) * (t1 - t0) / (z1 - z0)
                if t0 < tc < t1:
                    out_t.append(tc)
                    out_v.append(m)
            out_t.append(t1)
            out_v.append(z1)
            m = z1
        else:
            out_t.append(t1)
            out_v.append(m)
    return PiecewiseLinearPath(out_t, out_v, anchored=False)


def running_min(path: PiecewiseLinearPath, bounds: RegularityBounds):
    """Truncated running min ``min(-1/M+, min_{s<=t} z(s))``."""
    return -running_max(-path, bounds.swapped())


class Sign(Enum):
    PLUS = +1
    MINUS = -1


@dataclass(frozen=True)
class IntervalUnion:
    """``{0}`` (optionally) together with disjoint half-open intervals ``(s, t]``."""

    intervals: tuple = ()
    contains_zero: bool = True

    def __post_init__(self):
        prev = -math.inf
        for s, t in self.intervals:
            if not (prev <= s < t):
                raise ContractError("intervals must be sorted, disjoint and non-empty")
            prev = t

    def __contains__(self, x: float) -> bool:
        if x == 0 and self.contains_zero:
            return True
        for s, t in self.intervals:
            if s < x <= t:
                return True
            if s >= x:
                break
        return False

    def max_at_most(self, t: float) -> float:
        """``max(B ∩ [0, t])``; ``-inf`` when the intersection is empty."""
        best = 0.0 if self.contains_zero else -math.inf
        for s, e in self.intervals:
            if s >= t:
                break
            best = t if e >= t else e
        return best

    @property
    def right_endpoints(self) -> tuple:
        return tuple(e for _, e in self.intervals)


def increase_set(rho, sign: Sign) -> IntervalUnion:
    """Set where ``rho`` strictly increases (PLUS) or strictly decreases (MINUS)."""
    if rho.is_infinite:
        return IntervalUnion((), True)
    s = sign.value
    d = s * np.diff(rho.values)
    if np.any(d < 0):
        raise ContractError("running extremum is not monotone in the requested direction")
    ts = rho.times
    intervals = []
    start = None
    for i, di in enumerate(d):
        if di > 0:
            if start is None:
                start = float(ts[i])
            end = float(ts[i + 1])
        elif start is not None:
            intervals.append((start, end))
            start = None
    if start is not None:
        intervals.append((start, end))
    return IntervalUnion(tuple(intervals), True)


def _check_reparameterization(alpha: PiecewiseLinearPath, target: float):
    if np.any(np.diff(alpha.values) < 0):
        raise ContractError("reparameterization must be nondecreasing")
    if alpha.values[0] != 0.0 or alpha.values[-1] != target:
        raise ContractError(f"reparameterization must map onto [0, {target}]")


def compose(path: PiecewiseLinearPath, alpha: PiecewiseLinearPath) -> PiecewiseLinearPath:
    """``path ∘ alpha`` for a nondecreasing surjection ``alpha`` onto the path's horizon."""
    _check_reparameterization(alpha, path.horizon)
    zt, zv = path.times, path.values
    at, av = alpha.times, alpha.values
    out_t = [float(at[0])]
    out_v = [evaluate(path, float(av[0]))]
    for i in range(at.size - 1):
        s0, s1 = float(at[i]), float(at[i + 1])
        a0, a1 = float(av[i]), float(av[i + 1])
        if a1 > a0:
            lo = int(np.searchsorted(zt, a0, side="right"))
            hi = int(np.searchsorted(zt, a1, side="left"))
            same_rate = (s1 - s0) == (a1 - a0)
            for k in range(lo, hi):
                tk = float(zt[k])
                if same_rate:
                    s = s0 + (tk - a0)
                else:
                    s = s0 + (tk - a0) * (s1 - s0) / (a1 - a0)
                if s0 < s < s1 and s > out_t[-1]:
                    out_t.append(s)
                    out_v.append(float(zv[k]))
        out_t.append(s1)
        out_v.append(evaluate(path, a1))
    return PiecewiseLinearPath(out_t, out_v, anchored=False)


def generalized_inverse(alpha: PiecewiseLinearPath, t):
    """``inf{s : alpha(s) >= t}``; the left edge of any plateau at level ``t``."""
    if np.any(np.diff(alpha.values) < 0):
        raise ContractError("generalized inverse needs a nondecreasing map")
    at, av = alpha.times, alpha.values
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < av[0]) | (t_arr > av[-1])):
        raise DomainError(f"level outside [{av[0]}, {av[-1]}]")
    j = np.searchsorted(av, t_arr, side="left")
    jm = np.maximum(j - 1, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        interp = at[jm] + (t_arr - av[jm]) * (at[j] - at[jm]) / (av[j] - av[jm])
    out = np.where((j == 0) | (av[j] == t_arr), at[j], interp)
    return float(out) if out.ndim == 0 else out


def uniform_distance(z1: PiecewiseLinearPath, z2: PiecewiseLinearPath) -> float:
    """Exact sup-norm of ``z1 - z2``; attained on the merged breakpoint set."""
    if z1.horizon != z2.horizon:
        raise DomainError(f"horizon mismatch: {z1.horizon} vs {z2.horizon}")
    grid = np.union1d(z1.times, z2.times)
    return float(np.max(np.abs(evaluate(z1, grid) - evaluate(z2, grid))))


def total_variation(path: PiecewiseLinearPath) -> float:
    return float(np.sum(np.abs(np.diff(path.values))))


def sample_brownian(horizon: float, n_segments: int, seed: int, scale: float = 1.0):
    """Piecewise-linear interpolation of a Brownian path on an equispaced grid.

    Increments are ``Normal(0, scale**2 * dt)`` drawn from ``PCG64(seed)``;
    the generator is recorded in :data:`BROWNIAN_GENERATOR`.
    """
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    dt = horizon / n_segments
    incr = rng.standard_normal(n_segments) * (scale * math.sqrt(dt))
    values = np.concatenate(([0.0], np.cumsum(incr)))
    times = np.linspace(0.0, horizon, n_segments + 1)
    return PiecewiseLinearPath(times, values)


def linear_path(tau: float, slope: float = 1.0) -> PiecewiseLinearPath:
    """The straight path ``z(t) = slope * t`` on ``[0, tau]``."""
    return PiecewiseLinearPath([0.0, tau], [0.0, slope * tau])


def staircase(rng: np.random.Generator, tau: float, n_steps: int) -> PiecewiseLinearPath:
    """Random nondecreasing surjection of ``[0, tau]`` alternating flats and ramps."""
    cuts = np.sort(rng.uniform(0.0, tau, 2 * n_steps - 1))
    times = np.concatenate(([0.0], cuts, [tau]))
    levels = np.sort(rng.uniform(0.0, tau, n_steps - 1))
    values = [0.0]
    for k in range(1, times.size):
        # odd pieces rise, even pieces stay flat
        if k % 2 == 1:
            values.append(levels[k // 2] if k // 2 < levels.size else tau)
        else:
            values.append(values[-1])
    values[-1] = tau
    times = np.unique(times)
    if times.size != len(values):
        return staircase(rng, tau, n_steps)
    return PiecewiseLinearPath(times, values)
