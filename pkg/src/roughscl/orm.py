"""Oscillating running min/max (ORM) compression of a driving path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import (
    DomainError,
    IntervalUnion,
    PiecewiseLinearPath,
    RegularityBounds,
    Sign,
    evaluate,
    increase_set,
    running_max,
    running_min,
    total_variation,
)

__all__ = ["OrmResult", "OrmUndefinedError", "orm", "interpolation_sets", "total_variation"]


class OrmUndefinedError(ArithmeticError):
    """The backward recursion does not reach 0."""


@dataclass(frozen=True, eq=False)
class OrmResult:
    """Output of :func:`orm`.

    Attributes
    ----------
    taus : ndarray
        Interpolation times ``0 = tau_N < ... < tau_0 = tau`` stored increasing.
    compressed : PiecewiseLinearPath
        Linear interpolation of ``(tau_n, z(tau_n))``.
    t_plus, t_minus : tuple of float
        Interpolation times lying in the strict-increase set of the running
        max (resp. strict-decrease set of the running min), excluding 0.
    """

    taus: np.ndarray
    compressed: PiecewiseLinearPath
    t_plus: tuple
    t_minus: tuple
    rho_plus: object
    rho_minus: object
    b_plus: IntervalUnion
    b_minus: IntervalUnion
    path: PiecewiseLinearPath
    bounds: RegularityBounds

    @property
    def n_steps(self) -> int:
        """N, the number of segments of the compressed path."""
        return self.taus.size - 1

    @property
    def tau(self) -> float:
        return float(self.taus[-1])

    def kind(self, t: float) -> int:
        """+1 if ``t`` is in T+, -1 if in T-, 0 otherwise."""
        if t in self.t_plus:
            return 1
        if t in self.t_minus:
            return -1
        return 0


def orm(z: PiecewiseLinearPath, tau: float, bounds: RegularityBounds, max_iter: int | None = None) -> OrmResult:
    """Compress ``z`` on ``[0, tau]`` by the oscillating running min/max recursion.

    Starting at ``tau_0 = tau``, each step jumps back to the latest time in the
    opposite strict-monotonicity set (or in either set when the current time lies
    in neither) until 0 is reached.
    """
    if tau > z.horizon:
        raise DomainError(f"tau={tau} beyond path horizon {z.horizon}")
    zr = z.restrict(tau)
    rho_p = running_max(zr, bounds)
    rho_m = running_min(zr, bounds)
    b_p = increase_set(rho_p, Sign.PLUS)
    b_m = increase_set(rho_m, Sign.MINUS)

    if max_iter is None:
        max_iter = 2 * zr.times.size + 4
    seq = [float(tau)]
    t = float(tau)
    while t > 0:
        if len(seq) > max_iter:
            raise OrmUndefinedError(f"recursion did not reach 0 after {max_iter} steps")
        if t in b_m:
            nxt = b_p.max_at_most(t)
        elif t in b_p:
            nxt = b_m.max_at_most(t)
        else:
            nxt = max(b_p.max_at_most(t), b_m.max_at_most(t))
        if not nxt < t:
            raise OrmUndefinedError(f"recursion stalled at t={t}")
        seq.append(nxt)
        t = nxt

    taus = np.array(seq[::-1])
    taus.setflags(write=False)
    compressed = PiecewiseLinearPath(taus, evaluate(zr, taus))
    interior = [s for s in seq if s > 0]
    t_plus = tuple(sorted(s for s in interior if s in b_p))
    t_minus = tuple(sorted(s for s in interior if s in b_m))
    return OrmResult(taus, compressed, t_plus, t_minus, rho_p, rho_m, b_p, b_m, zr, bounds)


def interpolation_sets(result: OrmResult):
    """``(T_z, T_z^+, T_z^-)`` as sorted tuples."""
    return tuple(float(t) for t in result.taus), result.t_plus, result.t_minus
