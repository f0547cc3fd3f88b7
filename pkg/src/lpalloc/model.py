"""Pool domain types and yearly return functions.

Capital placed in an AMM pool earns a pro-rata share of its trading fees.
For a full-range pool the yearly return on an extra w dollars is
fees/(tvl + w). For a concentrated-liquidity position spread over m tick
ranges only the in-range slice w/m competes with the current-tick TVL, so
the return is fees/(tvl + w/m).

Rates are dimensionless fractions per year (0.0347 means 3.47%/yr); money
amounts are USD floats. Values are validated at construction and immutable
afterwards, so they are safe to share between threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

Rate = float
Money = float


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


def validate_rate(value: float, name: str = "rate") -> Rate:
    """Check that value is a finite, non-negative yearly fraction."""
    _require_finite(name, value)
    if value < 0.0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def validate_money(value: float, name: str = "amount") -> Money:
    """Check that value is a finite, non-negative USD amount."""
    _require_finite(name, value)
    if value < 0.0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class PoolState:
    """One pool on one chain.

    tvl is the effective TVL the provider's capital competes with: the
    whole pool for a full-range position (tick_count=1), or the
    current-tick TVL when the position is concentrated over tick_count
    ranges. return_override, when given, replaces the fee-implied
    displayed rate r(0); the pool then behaves as if its yearly fee income
    were return_override*tvl. Aggregators often publish a return computed
    from an effective-TVL normalization that is not recoverable from the
    TVL and volume columns alone, so the override lets reports reproduce
    published figures exactly.
    """

    chain: str
    pool_id: str
    fee: float
    daily_volume: Money
    tvl: Money
    tick_count: int = 1
    annualization_days: int = 365
    return_override: Rate | None = None

    def __post_init__(self):
        _require_finite("fee", self.fee)
        if not 0.0 <= self.fee <= 1.0:
            raise ValueError(f"fee must be in [0, 1], got {self.fee!r}")
        validate_money(self.daily_volume, "daily_volume")
        validate_money(self.tvl, "tvl")
        if self.tick_count < 1:
            raise ValueError(f"tick_count must be >= 1, got {self.tick_count!r}")
        if self.annualization_days < 1:
            raise ValueError(
                f"annualization_days must be >= 1, got {self.annualization_days!r}")
        if self.return_override is not None:
            validate_rate(self.return_override, "return_override")


@dataclass(frozen=True)
class LPConfig:
    """A provider's budget: total wealth and the staking rate it can always
    fall back to. The staking rate is a constant of the run; staked capital
    does not dilute it."""

    wealth: Money
    staking_rate: Rate

    def __post_init__(self):
        validate_money(self.wealth, "wealth")
        validate_rate(self.staking_rate, "staking_rate")
        if self.staking_rate == 0.0:
            raise ValueError("staking_rate must be > 0")


def pool_fees(pool: PoolState) -> Money:
    """Yearly trading-fee income of the whole pool: fee * volume * days."""
    return pool.fee * pool.daily_volume * pool.annualization_days


def effective_annual_fees(pool: PoolState) -> Money:
    """Yearly fee income consistent with the pool's displayed rate.

    Equals pool_fees unless return_override is set, in which case the
    income implied by the displayed rate, override*tvl, is used so that
    the return functions still satisfy r(0) = fees/tvl.
    """
    if pool.return_override is not None:
        return pool.return_override * pool.tvl
    return pool_fees(pool)


def cpmm_return(pool: PoolState, w: Money = 0.0) -> Rate:
    """Yearly return on w extra dollars in a full-range pool: fees/(tvl+w).

    w=0 gives the displayed rate r(0). Strictly decreasing in w.
    """
    validate_money(w, "w")
    denom = pool.tvl + w
    if denom <= 0.0:
        raise ValueError("tvl + w must be positive")
    return effective_annual_fees(pool) / denom


def clmm_return(pool: PoolState, w: Money = 0.0) -> Rate:
    """Yearly return on w extra dollars spread over the pool's tick_count
    ranges: fees/(tvl + w/m). With tick_count=1 this equals cpmm_return.
    """
    validate_money(w, "w")
    denom = pool.tvl + w / pool.tick_count
    if denom <= 0.0:
        raise ValueError("tvl + w/m must be positive")
    return effective_annual_fees(pool) / denom


POOLS_HEADER = ("chain", "pool_id", "fee_bps", "tvl_usd", "daily_volume_usd")


def read_pools_csv(stream: TextIO, annualization_days: int = 365) -> list[PoolState]:
    """Read pools from CSV with header
    chain,pool_id,fee_bps,tvl_usd,daily_volume_usd and an optional trailing
    return_pct column (percent, so 13.43 means r(0) = 0.1343) that becomes
    the pool's return_override.
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header[:5]) != POOLS_HEADER:
        raise ValueError(
            "pools CSV must start with header " + ",".join(POOLS_HEADER))
    has_override = len(header) >= 6 and header[5].strip() == "return_pct"
    pools = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            override = None
            if has_override and len(row) > 5 and row[5].strip():
                override = float(row[5]) / 100.0
            pools.append(PoolState(
                chain=row[0].strip(),
                pool_id=row[1].strip(),
                fee=float(row[2]) / 1e4,
                tvl=float(row[3]),
                daily_volume=float(row[4]),
                annualization_days=annualization_days,
                return_override=override,
            ))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"pools CSV line {line_no}: {exc}") from exc
    return pools
