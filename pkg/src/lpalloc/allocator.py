"""Reward-maximizing split of a budget across staking and AMM pools.

A provider with wealth W can stake at the fixed rate r_s or supply pools
whose return dilutes as fees/(tvl + w). Total earnings
r_s*w0 + sum_i fees_i*w_i/(tvl_i + w_i) are concave in the allocation, so
first-order conditions are sufficient. While staking still receives capital
the marginal return of every funded pool is pinned at r_s and each pool's
optimum has the closed form w_i = tvl_i*(sqrt(r_i(0)/r_s) - 1), clipped at
zero. When those demands exceed W the budget binds, staking gets nothing,
and the common marginal level lambda > r_s is found by bisection
(water-filling). An exhaustive grid search plus coordinate ascent serves as
an independent numerical check on the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from lpalloc import _kernels
from lpalloc.model import (
    LPConfig,
    Money,
    PoolState,
    Rate,
    effective_annual_fees,
    validate_money,
)


@dataclass(frozen=True)
class AllocationResult:
    """Outcome of one allocation run.

    pool_allocations and post_returns are (pool_id, value) pairs in input
    pool order; staking is the un-invested remainder w0; multiplier is the
    Lagrange level lambda (equal to the staking rate whenever staking
    receives capital); total_earnings is yearly USD income,
    r_s*w0 + sum r_i(w_i)*w_i.
    """

    pool_allocations: tuple[tuple[str, Money], ...]
    staking: Money
    multiplier: Rate
    post_returns: tuple[tuple[str, Rate], ...]
    total_earnings: Money


def allocation_for_pool(tvl: Money, r0: Rate, r_s: Rate) -> Money:
    """Stand-alone optimal deposit into one pool: tvl*(sqrt(r0/r_s) - 1).

    Clipped at zero, so pools returning at or below the staking rate get
    nothing. Derived from fees*tvl/(tvl+w)^2 = r_s, the point where the
    pool's marginal return falls to the staking rate.
    """
    if tvl <= 0.0 or not math.isfinite(tvl):
        raise ValueError(f"tvl must be positive, got {tvl!r}")
    if r_s <= 0.0 or not math.isfinite(r_s):
        raise ValueError(f"staking rate must be positive, got {r_s!r}")
    if r0 < 0.0 or not math.isfinite(r0):
        raise ValueError(f"pool return must be >= 0, got {r0!r}")
    return max(0.0, tvl * (math.sqrt(r0 / r_s) - 1.0))


def _pool_arrays(pools, scale_by_ticks):
    fees = [effective_annual_fees(p) for p in pools]
    tvls = []
    for p in pools:
        if p.tvl <= 0.0:
            raise ValueError(f"pool {p.pool_id!r} has non-positive tvl")
        tvls.append(p.tvl)
    scales = [float(p.tick_count) if scale_by_ticks else 1.0 for p in pools]
    return fees, tvls, scales


def water_fill_lambda(pools: list[PoolState], wealth: Money, r_s: Rate,
                      scale_by_ticks: bool = False) -> Rate:
    """Marginal-return level lambda* at which pool demands exactly use W.

    Each pool's demand at level lam is scale*max(0, sqrt(fees*tvl/lam) - tvl),
    continuous and strictly decreasing in lam, so the root is unique.
    Bisection on [r_s, max r(0)] stops when the demand sum is within
    1e-9*W of W (200 iterations cap). Requires that demand at r_s exceeds
    W, i.e. that the budget actually binds.
    """
    validate_money(wealth, "wealth")
    if r_s <= 0.0:
        raise ValueError("staking rate must be positive")
    fees, tvls, scales = _pool_arrays(pools, scale_by_ticks)

    def demand(lam):
        return math.fsum(
            sc * max(0.0, math.sqrt(f * t / lam) - t)
            for f, t, sc in zip(fees, tvls, scales))

    if demand(r_s) <= wealth:
        raise ValueError("budget does not bind at the staking rate; "
                         "the closed form applies directly")
    lo = r_s
    hi = max(f / t for f, t in zip(fees, tvls))
    tol = 1e-9 * wealth
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d = demand(mid)
        if abs(d - wealth) <= tol:
            break
        if d > wealth:
            lo = mid
        else:
            hi = mid
    return mid


def optimal_allocation(pools: list[PoolState], cfg: LPConfig,
                       scale_by_ticks: bool = False) -> AllocationResult:
    """Earnings-maximizing allocation of cfg.wealth across pools and staking.

    Slack regime (pool demands at r_s fit the budget): every w_i takes the
    closed form, the rest is staked, lambda = r_s. Binding regime: staking
    gets zero and lambda comes from water_fill_lambda. In both regimes the
    funded pools' post-allocation returns equal sqrt(r_i(0)*lambda).

    scale_by_ticks opts into multiplying each demand by the pool's
    tick_count, the literal optimum when the deposit is split over m tick
    ranges; default off, matching how published allocation tables treat
    current-tick TVL.
    """
    W = cfg.wealth
    r_s = cfg.staking_rate
    if not pools:
        return AllocationResult((), W, r_s, (), r_s * W)
    fees, tvls, scales = _pool_arrays(pools, scale_by_ticks)

    demands = [sc * allocation_for_pool(t, f / t, r_s)
               for f, t, sc in zip(fees, tvls, scales)]
    total_demand = math.fsum(demands)

    if total_demand <= W:
        lam = r_s
        w = demands
        staking = W - math.fsum(w)
    elif W == 0.0:
        lam = max(r_s, max(f / t for f, t in zip(fees, tvls)))
        w = [0.0] * len(pools)
        staking = 0.0
    else:
        lam = water_fill_lambda(pools, W, r_s, scale_by_ticks)
        w = [sc * max(0.0, math.sqrt(f * t / lam) - t)
             for f, t, sc in zip(fees, tvls, scales)]
        # bisection leaves a ~1e-9 relative residual; rescale onto the
        # budget and fold the remaining float dust into the largest
        # deposit so w0 is exactly zero and the identity is exact
        s = math.fsum(w)
        w = [wi * (W / s) for wi in w]
        k = max(range(len(w)), key=lambda i: w[i])
        w[k] += W - math.fsum(w)
        staking = 0.0

    post = []
    for p, wi, sc in zip(pools, w, scales):
        post.append((p.pool_id, effective_annual_fees(p) / (p.tvl + wi / sc)))
    earnings = math.fsum([r_s * staking] +
                         [r * wi for (_, r), wi in zip(post, w)])
    return AllocationResult(
        pool_allocations=tuple((p.pool_id, wi) for p, wi in zip(pools, w)),
        staking=staking,
        multiplier=lam,
        post_returns=tuple(post),
        total_earnings=earnings,
    )


def verify_kkt(pools: list[PoolState], result: AllocationResult,
               cfg: LPConfig, tol: float = 1e-8,
               scale_by_ticks: bool = False) -> bool:
    """First-order optimality check on an allocation.

    True iff (a) every funded pool's marginal return
    fees*tvl/(tvl + w/m)^2 is within tol*lambda of lambda, (b) every
    unfunded pool displays r(0) <= lambda*(1+tol), and (c) lambda is within
    tol of the staking rate whenever staking received capital. m is 1
    unless scale_by_ticks mirrors the allocation call.
    """
    lam = result.multiplier
    if len(result.pool_allocations) != len(pools):
        raise ValueError("result does not match the pool list")
    # pool ids can repeat across chains, so match by position, which
    # optimal_allocation guarantees to be input order
    for p, (_, w) in zip(pools, result.pool_allocations):
        f = effective_annual_fees(p)
        t = p.tvl
        m = float(p.tick_count) if scale_by_ticks else 1.0
        if w > 0.0:
            marginal = f * t / (t + w / m) ** 2
            if abs(marginal - lam) > tol * lam:
                return False
        else:
            if f / t > lam * (1.0 + tol):
                return False
    if result.staking > 0.0 and abs(lam - cfg.staking_rate) > tol * cfg.staking_rate:
        return False
    return True


def oracle_maximize(pools: list[PoolState], cfg: LPConfig,
                    grid_steps: int = 64,
                    scale_by_ticks: bool = False) -> AllocationResult:
    """Numerical maximizer independent of the closed form.

    Exhaustively scans the budget simplex on a lattice of W/grid_steps
    (pools <= 4; larger instances start from all-staking), then refines by
    cyclic golden-section ascent over staking slices and pool pairs. The
    objective is concave, so the ascent converges to the global optimum
    from any start; the grid stage is an independent safeguard, not a
    requirement for convergence.
    """
    if grid_steps < 1:
        raise ValueError("grid_steps must be >= 1")
    W = cfg.wealth
    r_s = cfg.staking_rate
    if not pools or W == 0.0:
        return optimal_allocation(pools, cfg, scale_by_ticks)
    fees, tvls, scales = _pool_arrays(pools, scale_by_ticks)
    n = len(pools)

    if n <= 4:
        w, _ = _kernels.grid_best(fees, tvls, scales, r_s, W, grid_steps)
    else:
        w = [0.0] * n
    w, _, _ = _kernels.refine(w, fees, tvls, scales, r_s, W,
                              W * 1e-12, 1e-14, 200)

    # golden-section midpoints never land exactly on 0; snap dust so
    # unfunded pools report a clean zero
    w = [wi if wi > W * 1e-9 else 0.0 for wi in w]
    staking = max(0.0, W - math.fsum(w))

    if staking > W * 1e-12:
        lam = r_s
    else:
        lam = max(f * t / (t + wi / sc) ** 2
                  for f, t, sc, wi in zip(fees, tvls, scales, w) if wi > 0.0)
    post = [(p.pool_id, f / (t + wi / sc))
            for p, f, t, sc, wi in zip(pools, fees, tvls, scales, w)]
    earnings = math.fsum([r_s * staking] +
                         [r * wi for (_, r), wi in zip(post, w)])
    return AllocationResult(
        pool_allocations=tuple((p.pool_id, wi) for p, wi in zip(pools, w)),
        staking=staking,
        multiplier=lam,
        post_returns=tuple(post),
        total_earnings=earnings,
    )


def as_json_payload(result: AllocationResult) -> dict:
    """JSON-ready dict: per-pool rows plus run-level totals, full precision."""
    rows = [
        {"pool_id": pid, "allocation_usd": wi, "post_return": ri}
        for (pid, wi), (_, ri) in zip(result.pool_allocations,
                                      result.post_returns)
    ]
    return {
        "rows": rows,
        "staking_usd": result.staking,
        "lambda": result.multiplier,
        "total_earnings_usd": result.total_earnings,
    }
