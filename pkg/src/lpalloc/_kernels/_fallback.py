"""Pure-Python allocation-search kernels.

Mirror of the compiled module ``lpalloc._kernels._core``: same functions,
same iteration order, same arithmetic. Used when the extension was not
built or when ``LPALLOC_PURE`` is set in the environment.
"""

from __future__ import annotations

import math

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def earnings(staking, w, fees, tvls, ticks, staking_rate):
    """Yearly earnings of the allocation: staking plus per-pool fee share."""
    total = staking_rate * staking
    for i in range(len(w)):
        total += fees[i] * w[i] / (tvls[i] + w[i] / ticks[i])
    return total


def grid_best(fees, tvls, ticks, staking_rate, wealth, steps):
    """Scan every lattice point of the budget simplex; return the best.

    Lattice step is wealth/steps: every (k_1..k_n) with sum(k) <= steps is
    visited, w_i = k_i*step and the remainder goes to staking. Returns
    (w list, earnings at the best point).
    """
    n = len(fees)
    if n == 0 or wealth == 0.0:
        return [0.0] * n, staking_rate * wealth
    stepw = wealth / steps
    k = [0] * n
    w = [0.0] * n
    total = 0
    best_e = earnings(wealth, w, fees, tvls, ticks, staking_rate)
    best_k = list(k)
    while True:
        i = 0
        while i < n:
            if total < steps:
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
        e = earnings(wealth - total * stepw, w, fees, tvls, ticks, staking_rate)
        if e > best_e:
            best_e = e
            best_k = list(k)
    return [ki * stepw for ki in best_k], best_e


def _golden_max(f, a, b, xtol):
    """Golden-section maximum of a concave f on [a, b]; returns the abscissa."""
    if b - a <= xtol:
        return (a + b) / 2.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = f(c)
    fd = f(d)
    while (b - a) > xtol:
        if fc > fd:
            b = d
            d = c
            fd = fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def refine(w, fees, tvls, ticks, staking_rate, wealth, xtol, ftol, max_passes):
    """Cyclic golden-section ascent over the budget simplex.

    Each pass optimizes every pool-vs-staking slice and every pool-pair
    transfer; the objective is concave so this converges to the global
    maximum. Returns (w list, earnings, passes used).
    """
    n = len(w)
    w = list(w)

    def pool_earn(i, t):
        return fees[i] * t / (tvls[i] + t / ticks[i])

    def total():
        return earnings(wealth - math.fsum(w), w, fees, tvls, ticks,
                        staking_rate)

    prev = total()
    passes = 0
    for _ in range(max_passes):
        passes += 1
        for i in range(n):
            free = (wealth - math.fsum(w)) + w[i]
            if free <= 0.0:
                continue
            w[i] = _golden_max(
                lambda t: staking_rate * (free - t) + pool_earn(i, t),
                0.0, free, xtol)
        for i in range(n):
            for j in range(i + 1, n):
                s = w[i] + w[j]
                if s <= 0.0:
                    continue
                w[i] = _golden_max(
                    lambda t: pool_earn(i, t) + pool_earn(j, s - t),
                    0.0, s, xtol)
                w[j] = s - w[i]
        cur = total()
        if cur - prev <= ftol * max(abs(cur), 1.0):
            prev = cur
            break
        prev = cur
    return w, prev, passes
