"""Sequential-entry simulation: pool returns converge to the staking rate.

When providers arrive one at a time and each deposits the stand-alone
optimum w = tvl*(sqrt(r/r_s) - 1), the pool's displayed return after the
deposit is fees/(tvl*sqrt(r/r_s)) = sqrt(r*r_s). Iterating gives the
geometric recursion r_j = sqrt(r_{j-1}*r_s) whose closed form is
r0^(1/2^j) * r_s^(1-1/2^j), a sequence that halves its log-distance to the
staking rate at every step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

from lpalloc.allocator import allocation_for_pool
from lpalloc.model import Money, PoolState, Rate, effective_annual_fees

SERIES_HEADER = ("lp_index", "pre_return", "allocation_usd", "staking_usd",
                 "post_tvl_usd")


@dataclass(frozen=True)
class ConvergenceStep:
    """One provider's turn: the return they saw, what they deposited, what
    they staked, and the pool TVL they left behind. note is empty for a
    regular step, "clipped" when the stand-alone optimum exceeded the
    provider's wealth, "no-allocation" when the pool already returned at or
    below the staking rate."""

    lp_index: int
    pre_return: Rate
    allocation: Money
    staking: Money
    post_tvl: Money
    note: str = ""


@dataclass(frozen=True)
class ConvergenceSeries:
    steps: tuple[ConvergenceStep, ...]
    staking_rate: Rate
    wealth_per_lp: Money


def step_return(r_prev: Rate, r_s: Rate) -> Rate:
    """Displayed return after one optimal deposit: sqrt(r_prev * r_s).

    Below the staking rate no deposit happens and the return passes
    through unchanged.
    """
    if r_s <= 0.0 or not math.isfinite(r_s):
        raise ValueError(f"staking rate must be positive, got {r_s!r}")
    if r_prev < 0.0 or not math.isfinite(r_prev):
        raise ValueError(f"return must be >= 0, got {r_prev!r}")
    if r_prev < r_s:
        return r_prev
    return math.sqrt(r_prev * r_s)


def analytic_return_after(j: int, r0: Rate, r_s: Rate) -> Rate:
    """Displayed return after j sequential optimal deposits, in closed form.

    Equals r0^(1/2^j) * r_s^(1-1/2^j), evaluated in log space; j=0 returns
    r0. For large j the value approaches r_s like the 2^j-th root of
    r0/r_s.
    """
    if j < 0:
        raise ValueError(f"j must be >= 0, got {j!r}")
    if r_s <= 0.0 or r0 <= 0.0:
        raise ValueError("returns must be positive")
    if j == 0:
        return r0
    a = 0.5 ** j
    return math.exp(a * math.log(r0) + (1.0 - a) * math.log(r_s))


def simulate_sequential(pool: PoolState, r_s: Rate, wealth_per_lp: Money,
                        num_lps: int) -> ConvergenceSeries:
    """Run num_lps providers through the pool one after another.

    Each provider deposits the stand-alone optimum on the TVL they find
    (capped at their wealth, flagged "clipped") and stakes the rest; the
    deposit stays in the pool for everyone after them. Volume is held
    constant across steps. In the uncapped regime the recorded pre-returns
    match analytic_return_after exactly up to rounding.
    """
    if num_lps < 1:
        raise ValueError(f"num_lps must be >= 1, got {num_lps!r}")
    if r_s <= 0.0:
        raise ValueError("staking rate must be positive")
    if wealth_per_lp < 0.0:
        raise ValueError("wealth_per_lp must be >= 0")
    fees = effective_annual_fees(pool)
    tvl = pool.tvl
    if tvl <= 0.0:
        raise ValueError("pool tvl must be positive")
    steps = []
    for j in range(1, num_lps + 1):
        r_pre = fees / tvl
        note = ""
        if r_pre <= r_s:
            w = 0.0
            if r_pre < r_s:
                note = "no-allocation"
        else:
            w = allocation_for_pool(tvl, r_pre, r_s)
            if w > wealth_per_lp:
                w = wealth_per_lp
                note = "clipped"
        tvl += w
        steps.append(ConvergenceStep(
            lp_index=j,
            pre_return=r_pre,
            allocation=w,
            staking=wealth_per_lp - w,
            post_tvl=tvl,
            note=note,
        ))
    return ConvergenceSeries(steps=tuple(steps), staking_rate=r_s,
                             wealth_per_lp=wealth_per_lp)


def write_series_csv(series: ConvergenceSeries, out: TextIO) -> None:
    """Emit the plot-data CSV, one row per provider, full precision."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SERIES_HEADER)
    for s in series.steps:
        writer.writerow([s.lp_index, repr(s.pre_return), repr(s.allocation),
                         repr(s.staking), repr(s.post_tvl)])
