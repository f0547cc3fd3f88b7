# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled allocation-search kernels.

Keep in lockstep with ``lpalloc._kernels._fallback``: same functions, same
iteration order, same arithmetic, so both backends agree to rounding error.
"""

from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

from math import fsum

cdef double INVPHI = (sqrt(5.0) - 1.0) / 2.0


cdef double _earn(double staking, double[::1] w, double[::1] fees,
                  double[::1] tvls, double[::1] ticks,
                  double staking_rate) nogil:
    cdef double total = staking_rate * staking
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        total += fees[i] * w[i] / (tvls[i] + w[i] / ticks[i])
    return total


cdef double[::1] _as_view(object seq, object array_mod):
    return array_mod.array('d', seq)


def earnings(staking, w, fees, tvls, ticks, staking_rate):
    """Yearly earnings of the allocation: staking plus per-pool fee share."""
    import array
    cdef double[::1] wv = _as_view(w, array)
    cdef double[::1] fv = _as_view(fees, array)
    cdef double[::1] tv = _as_view(tvls, array)
    cdef double[::1] mv = _as_view(ticks, array)
    return _earn(staking, wv, fv, tv, mv, staking_rate)


def grid_best(fees, tvls, ticks, staking_rate, wealth, steps):
    """Scan every lattice point of the budget simplex; return the best.

    Lattice step is wealth/steps: every (k_1..k_n) with sum(k) <= steps is
    visited, w_i = k_i*step and the remainder goes to staking. Returns
    (w list, earnings at the best point).
    """
    import array
    cdef Py_ssize_t n = len(fees)
    if n == 0 or wealth == 0.0:
        return [0.0] * n, staking_rate * wealth
    cdef double[::1] fv = _as_view(fees, array)
    cdef double[::1] tv = _as_view(tvls, array)
    cdef double[::1] mv = _as_view(ticks, array)
    cdef double stepw = wealth / steps
    cdef double wlth = wealth
    cdef double srate = staking_rate
    cdef long nsteps = steps
    cdef long *k = <long *> malloc(n * sizeof(long))
    cdef long *best_k = <long *> malloc(n * sizeof(long))
    cdef double *w = <double *> malloc(n * sizeof(double))
    if k == NULL or best_k == NULL or w == NULL:
        if k != NULL:
            free(k)
        if best_k != NULL:
            free(best_k)
        if w != NULL:
            free(w)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef long total = 0
    cdef double e, best_e
    try:
        for i in range(n):
            k[i] = 0
            best_k[i] = 0
            w[i] = 0.0
        best_e = srate * wlth
        for i in range(n):
            best_e += fv[i] * 0.0 / (tv[i] + 0.0 / mv[i])
        with nogil:
            while True:
                i = 0
                while i < n:
                    if total < nsteps:
                        k[i] += 1
                        total += 1
                        w[i] = k[i] * stepw
                        break
                    total -= k[i]
                    k[i] = 0
                    w[i] = 0.0
                    i += 1
                if i == n:
                    break
                e = srate * (wlth - total * stepw)
                for j in range(n):
                    e += fv[j] * w[j] / (tv[j] + w[j] / mv[j])
                if e > best_e:
                    best_e = e
                    for j in range(n):
                        best_k[j] = k[j]
        return [best_k[i] * stepw for i in range(n)], best_e
    finally:
        free(k)
        free(best_k)
        free(w)


cdef double _pool_earn(Py_ssize_t i, double t, double[::1] fees,
                       double[::1] tvls, double[::1] ticks) nogil:
    return fees[i] * t / (tvls[i] + t / ticks[i])


cdef double _golden_slice(Py_ssize_t i, double free_amt, double[::1] fees,
                          double[::1] tvls, double[::1] ticks,
                          double staking_rate, double xtol) nogil:
    cdef double a = 0.0
    cdef double b = free_amt
    cdef double c, d, fc, fd
    if b - a <= xtol:
        return (a + b) / 2.0
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = staking_rate * (free_amt - c) + _pool_earn(i, c, fees, tvls, ticks)
    fd = staking_rate * (free_amt - d) + _pool_earn(i, d, fees, tvls, ticks)
    while (b - a) > xtol:
        if fc > fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = staking_rate * (free_amt - c) + _pool_earn(i, c, fees, tvls,
                                                            ticks)
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = staking_rate * (free_amt - d) + _pool_earn(i, d, fees, tvls,
                                                            ticks)
    return (a + b) / 2.0


cdef double _golden_pair(Py_ssize_t i, Py_ssize_t j, double s,
                         double[::1] fees, double[::1] tvls,
                         double[::1] ticks, double xtol) nogil:
    cdef double a = 0.0
    cdef double b = s
    cdef double c, d, fc, fd
    if b - a <= xtol:
        return (a + b) / 2.0
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = _pool_earn(i, c, fees, tvls, ticks) + _pool_earn(j, s - c, fees,
                                                          tvls, ticks)
    fd = _pool_earn(i, d, fees, tvls, ticks) + _pool_earn(j, s - d, fees,
                                                          tvls, ticks)
    while (b - a) > xtol:
        if fc > fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = _pool_earn(i, c, fees, tvls, ticks) + _pool_earn(j, s - c,
                                                                  fees, tvls,
                                                                  ticks)
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = _pool_earn(i, d, fees, tvls, ticks) + _pool_earn(j, s - d,
                                                                  fees, tvls,
                                                                  ticks)
    return (a + b) / 2.0


def refine(w, fees, tvls, ticks, staking_rate, wealth, xtol, ftol,
           max_passes):
    """Cyclic golden-section ascent over the budget simplex.

    Each pass optimizes every pool-vs-staking slice and every pool-pair
    transfer; the objective is concave so this converges to the global
    maximum. Returns (w list, earnings, passes used).
    """
    import array
    cdef Py_ssize_t n = len(w)
    cdef double[::1] wv = _as_view(w, array)
    cdef double[::1] fv = _as_view(fees, array)
    cdef double[::1] tv = _as_view(tvls, array)
    cdef double[::1] mv = _as_view(ticks, array)
    cdef double srate = staking_rate
    cdef double wlth = wealth
    cdef double xt = xtol
    cdef Py_ssize_t i, j
    cdef double free_amt, s, prev, cur
    cdef int passes = 0

    prev = _earn(wlth - fsum([wv[i] for i in range(n)]), wv, fv, tv, mv,
                 srate)
    for _ in range(max_passes):
        passes += 1
        for i in range(n):
            free_amt = (wlth - fsum([wv[j] for j in range(n)])) + wv[i]
            if free_amt <= 0.0:
                continue
            wv[i] = _golden_slice(i, free_amt, fv, tv, mv, srate, xt)
        for i in range(n):
            for j in range(i + 1, n):
                s = wv[i] + wv[j]
                if s <= 0.0:
                    continue
                wv[i] = _golden_pair(i, j, s, fv, tv, mv, xt)
                wv[j] = s - wv[i]
        cur = _earn(wlth - fsum([wv[i] for i in range(n)]), wv, fv, tv, mv,
                    srate)
        if cur - prev <= ftol * max(abs(cur), 1.0):
            prev = cur
            break
        prev = cur
    return [wv[i] for i in range(n)], prev, passes
