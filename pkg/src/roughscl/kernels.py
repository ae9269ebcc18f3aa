"""Godunov update kernels with backend selection.

The compiled extension ``_godunov`` handles the Burgers flux; everything else
(and every flux when the extension is absent or ``ROUGHSCL_PURE_PYTHON`` is
set) goes through the numpy implementation below.
"""

import os

import numpy as np

_compiled = None
if not os.environ.get("ROUGHSCL_PURE_PYTHON"):
    try:
        from . import _godunov as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

HAVE_COMPILED = _compiled is not None


def interface_flux(ul, ur, flux, forward):
    """Godunov flux of ``f`` (sign of lambda factored out) at interfaces ``(ul, ur)``.

    For ``lambda > 0`` the flux ``lambda*f`` is convex: min of ``f`` over
    ``[ul, ur]`` when ``ul <= ur``, else max. The roles swap when ``lambda < 0``.
    """
    lo = np.minimum(ul, ur)
    hi = np.maximum(ul, ur)
    fmin = flux.f(np.clip(flux.argmin, lo, hi))
    fmax = np.maximum(flux.f(ul), flux.f(ur))
    return np.where((ul <= ur) == forward, fmin, fmax)


def advance_python(u, ratio, nsteps, flux):
    u = np.array(u, dtype=float, copy=True)
    forward = ratio > 0
    for _ in range(nsteps):
        ext = np.concatenate((u[:1], u, u[-1:]))
        F = interface_flux(ext[:-1], ext[1:], flux, forward)
        u = u - ratio * (F[1:] - F[:-1])
    return u


def select_backend(flux, backend=None):
    """Resolve ``backend`` ('compiled', 'python' or None for automatic)."""
    if backend is None:
        return "compiled" if HAVE_COMPILED and flux.kernel == "burgers" else "python"
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled Godunov kernel is not available")
        if flux.kernel != "burgers":
            raise ValueError(f"no compiled kernel for flux {flux.name!r}")
    elif backend != "python":
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def advance(u, ratio, nsteps, flux, backend=None):
    """``nsteps`` Godunov updates of cell averages ``u`` with ``ratio = lambda*dt/dx``."""
    if nsteps <= 0 or ratio == 0:
        return np.array(u, dtype=float, copy=True)
    if select_backend(flux, backend) == "compiled":
        return _compiled.advance_burgers(np.ascontiguousarray(u, dtype=float), float(ratio), int(nsteps))
    return advance_python(u, ratio, nsteps, flux)
