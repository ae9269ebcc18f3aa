# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Godunov substep loop for the Burgers flux f(u) = u**2 / 2."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _burgers(double u) nogil:
    return 0.5 * u * u


cdef inline double _flux(double ul, double ur, bint forward) nogil:
    cdef double c, fl, fr
    if (ul <= ur) == forward:
        # min of f on [min, max]; the minimiser of u**2/2 is 0
        c = 0.0
        if c < ul and c < ur:
            c = ul if ul < ur else ur
        elif c > ul and c > ur:
            c = ul if ul > ur else ur
        return _burgers(c)
    fl = _burgers(ul)
    fr = _burgers(ur)
    return fl if fl > fr else fr


def advance_burgers(const double[::1] u0, double ratio, Py_ssize_t nsteps):
    """Apply ``nsteps`` Godunov updates with signed ``ratio = lambda*dt/dx``.

    Outflow ghost cells copy the edge values.
    """
    cdef Py_ssize_t n = u0.shape[0]
    cdef Py_ssize_t i, step
    cdef bint forward = ratio > 0
    out = np.array(u0, dtype=np.float64, copy=True)
    flux_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] u = out
    cdef double[::1] F = flux_arr
    with nogil:
        for step in range(nsteps):
            F[0] = _flux(u[0], u[0], forward)
            F[n] = _flux(u[n - 1], u[n - 1], forward)
            for i in range(1, n):
                F[i] = _flux(u[i - 1], u[i], forward)
            for i in range(n):
                u[i] = u[i] - ratio * (F[i + 1] - F[i])
    return out
