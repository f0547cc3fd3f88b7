"""Price impact of a swap, direct and at competitive equilibrium.

In a constant-product pool a trade of size dx against a reserve x moves the
price by about dx/x. If providers keep entering until the pool's return
equals the staking rate, the equilibrium TVL is fees/r_s, each reserve side
holds half of it, and the impact of dx becomes 2*r_s*dx/fees: deeper fee
income means thinner slippage, scaled by the opportunity cost of capital.
"""

from __future__ import annotations

from dataclasses import dataclass

from lpalloc.model import Money, Rate, validate_money, validate_rate


@dataclass(frozen=True)
class SlippageInput:
    """Inputs for the equilibrium relation. reserve_x is the USD value of
    one token side at spot and is only needed for the direct dx/x impact;
    fee and daily_volume set the pool's fee income; staking_rate carries
    the per-year opportunity cost."""

    trade_size: Money
    fee: float
    daily_volume: Money
    staking_rate: Rate
    reserve_x: Money = 0.0
    annualization_days: int = 365

    def __post_init__(self):
        validate_money(self.trade_size, "trade_size")
        validate_money(self.daily_volume, "daily_volume")
        validate_money(self.reserve_x, "reserve_x")
        validate_rate(self.staking_rate, "staking_rate")
        if not 0.0 <= self.fee <= 1.0:
            raise ValueError(f"fee must be in [0, 1], got {self.fee!r}")
        if self.annualization_days < 1:
            raise ValueError("annualization_days must be >= 1")


def cpmm_price_impact(reserve_x: Money, trade_size: Money) -> float:
    """Relative price move of a trade against one reserve side: dx/x."""
    validate_money(trade_size, "trade_size")
    if reserve_x <= 0.0:
        raise ValueError(f"reserve_x must be positive, got {reserve_x!r}")
    return trade_size / reserve_x


def equilibrium_slippage(inp: SlippageInput) -> float:
    """Price impact once provider entry has pushed the return to r_s.

    Equals 2*r_s*dx/(fee*volume*days). The fee income and the staking rate
    must share the per-year time basis; annualization_days converts the
    daily volume. Linear in both dx and r_s.
    """
    fees = inp.fee * inp.daily_volume * inp.annualization_days
    if fees <= 0.0:
        raise ValueError("fee * volume must be positive")
    return 2.0 * inp.staking_rate * inp.trade_size / fees
