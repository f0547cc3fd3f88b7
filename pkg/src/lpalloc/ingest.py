"""Swap-export ingestion: daily last swap, current-tick TVL, pool snapshots.

Input rows are decimals-normalized swap events (CSV). For each pool-day we
keep the last swap, value the liquidity sitting in its tick range in USD,
and annualize the day's fee income against that in-range TVL.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import warnings
from dataclasses import dataclass

from lpalloc.model import Money, PoolState, Rate

TICK_DOMAIN = 887272
_LOG_TICK = math.log1p(1e-4)

SWAPS_HEADER = ("chain", "pool_id", "timestamp", "block", "tick",
                "sqrt_price", "liquidity", "amount0", "amount1", "fee_bps")
SNAPSHOT_HEADER = ("chain", "pool_id", "date", "tick_tvl_usd",
                   "daily_volume_usd", "annualized_return", "m",
                   "concentration")


class SwapParseError(ValueError):
    pass


@dataclass(frozen=True)
class SwapEvent:
    chain: str
    pool_id: str
    timestamp: int
    block: int
    tick: int
    sqrt_price: float
    liquidity: float
    amount0: float
    amount1: float
    fee_bps: int


@dataclass(frozen=True)
class PoolSnapshot:
    """Per-pool per-day derived state; usable is False when the day's last
    swap left no liquidity in range, which makes the return undefined."""

    chain: str
    pool_id: str
    date: dt.date
    tick_tvl_usd: Money
    daily_volume_usd: Money
    annualized_return: Rate
    tick_count: int
    concentration: float
    usable: bool = True


@dataclass(frozen=True)
class SnapshotParams:
    """Methodology knobs for snapshot building.

    range_fraction is the half-width of the provider's price range around
    spot. concentration divides the provider's effective tick span (None
    picks 1.0 on Ethereum and 1.75 on rollups, where liquidity sits
    tighter around spot). tick_spacing None derives the spacing from each
    row's fee tier. usd_price_token0 None prices token0 from the swap's
    own sqrt_price squared, with token1 worth usd_price_token1 (the
    dollar-stable side). return_multiplier rescales the annualized return
    for alternative effective-TVL normalizations.
    """

    range_fraction: float = 0.12
    concentration: float | None = None
    tick_spacing: int | None = None
    usd_price_token0: float | None = None
    usd_price_token1: float = 1.0
    annualization_days: int = 365
    return_multiplier: float = 1.0


def tick_spacing_for_fee(fee_bps: int) -> int:
    # standard fee-tier spacings: 1bp->1, 5bps->10, 30bps->60, 100bps->200
    if fee_bps <= 1:
        return 1
    return 2 * fee_bps


def sqrt_price_at_tick(tick: int) -> float:
    """Square root of the tick's price, 1.0001**(tick/2)."""
    if abs(tick) > TICK_DOMAIN:
        raise ValueError(f"tick {tick} outside [-{TICK_DOMAIN}, {TICK_DOMAIN}]")
    return math.exp(0.5 * tick * _LOG_TICK)


def implied_tick(sqrt_price: float) -> float:
    return 2.0 * math.log(sqrt_price) / _LOG_TICK


def _parse_row(line_no, row, tick_spacing):
    if len(row) != len(SWAPS_HEADER):
        raise SwapParseError(
            f"line {line_no}: expected {len(SWAPS_HEADER)} fields, "
            f"got {len(row)}")

    def intfield(idx):
        raw = row[idx].strip()
        try:
            return int(raw)
        except ValueError:
            raise SwapParseError(
                f"line {line_no}: field {SWAPS_HEADER[idx]!r}: "
                f"not an integer: {raw!r}") from None

    def floatfield(idx):
        raw = row[idx].strip()
        try:
            value = float(raw)
        except ValueError:
            raise SwapParseError(
                f"line {line_no}: field {SWAPS_HEADER[idx]!r}: "
                f"not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise SwapParseError(
                f"line {line_no}: field {SWAPS_HEADER[idx]!r}: "
                f"not finite: {raw!r}")
        return value

    ev = SwapEvent(
        chain=row[0].strip(),
        pool_id=row[1].strip(),
        timestamp=intfield(2),
        block=intfield(3),
        tick=intfield(4),
        sqrt_price=floatfield(5),
        liquidity=floatfield(6),
        amount0=floatfield(7),
        amount1=floatfield(8),
        fee_bps=intfield(9),
    )
    if ev.sqrt_price <= 0.0:
        raise SwapParseError(
            f"line {line_no}: field 'sqrt_price': must be > 0, "
            f"got {ev.sqrt_price!r}")
    if ev.liquidity < 0.0:
        raise SwapParseError(
            f"line {line_no}: field 'liquidity': must be >= 0, "
            f"got {ev.liquidity!r}")
    if abs(ev.tick) > TICK_DOMAIN:
        raise SwapParseError(
            f"line {line_no}: field 'tick': {ev.tick} outside the "
            f"[-{TICK_DOMAIN}, {TICK_DOMAIN}] domain")
    spacing = tick_spacing if tick_spacing else tick_spacing_for_fee(ev.fee_bps)
    implied = implied_tick(ev.sqrt_price)
    if abs(ev.tick - implied) >= spacing:
        raise SwapParseError(
            f"line {line_no}: tick {ev.tick} inconsistent with sqrt_price "
            f"{ev.sqrt_price!r} (implied tick {implied:.2f}, "
            f"spacing {spacing})")
    return ev


def parse_swaps_lenient(stream, tick_spacing=None):
    """Parse a swaps CSV, collecting row errors instead of raising.

    Returns (events, errors) where errors are line-numbered message
    strings. A missing or wrong header still raises, since nothing after
    it can be trusted. Exact duplicate rows are dropped with a warning
    (the export format carries no log index, so only full-row identity
    can be checked).
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != SWAPS_HEADER:
        raise SwapParseError(
            "swaps CSV must start with header " + ",".join(SWAPS_HEADER))
    events = []
    errors = []
    seen = set()
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            ev = _parse_row(line_no, row, tick_spacing)
        except SwapParseError as exc:
            errors.append(str(exc))
            continue
        if ev in seen:
            warnings.warn(f"duplicate swap row at line {line_no} dropped")
            continue
        seen.add(ev)
        events.append(ev)
    return events, errors


def parse_swaps(stream, tick_spacing=None):
    """Parse a swaps CSV strictly: the first bad row raises SwapParseError
    naming its line and field."""
    events, errors = parse_swaps_lenient(stream, tick_spacing)
    if errors:
        raise SwapParseError(errors[0])
    return events


def _utc_date(timestamp):
    return dt.datetime.fromtimestamp(timestamp, tz=dt.timezone.utc).date()


def _event_order(ev):
    # (timestamp, block) decides; the remaining fields only break exact
    # same-block ties so the result is permutation-independent
    return (ev.timestamp, ev.block, ev.sqrt_price, ev.liquidity,
            ev.amount0, ev.amount1, ev.tick)


def daily_last_swaps(events):
    """Map (chain, pool_id, date) to the day's last event, latest
    (timestamp, block) winning. Order-independent."""
    best = {}
    for ev in events:
        key = (ev.chain, ev.pool_id, _utc_date(ev.timestamp))
        cur = best.get(key)
        if cur is None or _event_order(ev) > _event_order(cur):
            best[key] = ev
    return best


def daily_volumes(events):
    """Map (chain, pool_id, date) to summed |amount1|, the USD notional
    when token1 is the dollar-stable side."""
    totals = {}
    for ev in events:
        key = (ev.chain, ev.pool_id, _utc_date(ev.timestamp))
        totals[key] = totals.get(key, 0.0) + abs(ev.amount1)
    return totals


def tick_tvl(liquidity, tick, sqrt_price, tick_spacing,
             usd_price_token0=1.0, usd_price_token1=1.0):
    """USD value of the liquidity in the current initialized tick range.

    The range is [i_l, i_l + spacing) with i_l = floor(tick/spacing)*spacing.
    amount0 = L*(1/sqrt_price - 1/sqrt_upper) is what the range still owes
    in token0, amount1 = L*(sqrt_price - sqrt_lower) what it holds in
    token1; both are non-negative while sqrt_price stays inside the range.
    """
    if tick_spacing < 1:
        raise ValueError("tick_spacing must be >= 1")
    lower = (tick // tick_spacing) * tick_spacing
    sp_low = sqrt_price_at_tick(lower)
    sp_high = sqrt_price_at_tick(lower + tick_spacing)
    if not sp_low <= sqrt_price <= sp_high:
        raise ValueError(
            f"sqrt_price {sqrt_price!r} outside its tick range "
            f"[{sp_low!r}, {sp_high!r}] (tick {tick}, spacing {tick_spacing})")
    amount0 = liquidity * (1.0 / sqrt_price - 1.0 / sp_high)
    amount1 = liquidity * (sqrt_price - sp_low)
    return amount0 * usd_price_token0 + amount1 * usd_price_token1


def ticks_in_range(range_fraction, tick_spacing):
    """Number of initialized tick ranges covering +-range_fraction around
    spot: 2*ceil(ln(1+rf)/(ln(1.0001)*spacing)) + 1."""
    if not 0.0 <= range_fraction < 1.0:
        raise ValueError(
            f"range_fraction must be in [0, 1), got {range_fraction!r}")
    if tick_spacing < 1:
        raise ValueError("tick_spacing must be >= 1")
    half = math.ceil(math.log1p(range_fraction) / (_LOG_TICK * tick_spacing))
    return 2 * half + 1


def _concentration_for(chain, params):
    if params.concentration is not None:
        return params.concentration
    # liquidity on rollups sits markedly tighter around spot than on mainnet
    return 1.0 if chain.lower() in ("ethereum", "mainnet") else 1.75


def pool_snapshot(last_swap, day_volume_usd, params):
    """Derive one pool-day snapshot from the day's last swap and volume."""
    spacing = (params.tick_spacing if params.tick_spacing
               else tick_spacing_for_fee(last_swap.fee_bps))
    price0 = (params.usd_price_token0 if params.usd_price_token0 is not None
              else last_swap.sqrt_price ** 2)
    tvl = tick_tvl(last_swap.liquidity, last_swap.tick, last_swap.sqrt_price,
                   spacing, price0, params.usd_price_token1)
    conc = _concentration_for(last_swap.chain, params)
    # higher concentration means the provider needs fewer ranges for the
    # same price coverage
    m = max(1, math.ceil(ticks_in_range(params.range_fraction, spacing) / conc))
    fee = last_swap.fee_bps / 1e4
    usable = tvl > 0.0
    if usable:
        ret = (fee * day_volume_usd * params.annualization_days / tvl
               * params.return_multiplier)
    else:
        ret = 0.0
    return PoolSnapshot(
        chain=last_swap.chain,
        pool_id=last_swap.pool_id,
        date=_utc_date(last_swap.timestamp),
        tick_tvl_usd=tvl,
        daily_volume_usd=day_volume_usd,
        annualized_return=ret,
        tick_count=m,
        concentration=conc,
        usable=usable,
    )


def build_snapshots(events, params=SnapshotParams()):
    """One snapshot per pool-day, in canonical (chain, pool_id, date) order."""
    last = daily_last_swaps(events)
    volumes = daily_volumes(events)
    keys = sorted(last, key=lambda k: (k[0], k[1], k[2].isoformat()))
    return [pool_snapshot(last[k], volumes[k], params) for k in keys]


def write_snapshots_csv(snapshots, out):
    """Emit snapshots deterministically: same inputs, byte-identical file."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SNAPSHOT_HEADER)
    for s in snapshots:
        writer.writerow([
            s.chain, s.pool_id, s.date.isoformat(), repr(s.tick_tvl_usd),
            repr(s.daily_volume_usd), repr(s.annualized_return),
            s.tick_count, repr(s.concentration),
        ])


def read_snapshots_csv(stream):
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != SNAPSHOT_HEADER:
        raise ValueError(
            "snapshot CSV must start with header " + ",".join(SNAPSHOT_HEADER))
    snaps = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            tvl = float(row[3])
            snaps.append(PoolSnapshot(
                chain=row[0].strip(),
                pool_id=row[1].strip(),
                date=dt.date.fromisoformat(row[2].strip()),
                tick_tvl_usd=tvl,
                daily_volume_usd=float(row[4]),
                annualized_return=float(row[5]),
                tick_count=int(row[6]),
                concentration=float(row[7]),
                usable=tvl > 0.0,
            ))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"snapshot CSV line {line_no}: {exc}") from exc
    return snaps


def snapshot_to_pool(snap: PoolSnapshot) -> PoolState:
    """Turn a usable snapshot into an allocator input. The snapshot's
    annualized return becomes a return override on its current-tick TVL,
    so the allocator sees exactly the derived rate."""
    if not snap.usable:
        raise ValueError(
            f"snapshot {snap.pool_id!r} {snap.date} has no in-range TVL")
    return PoolState(
        chain=snap.chain,
        pool_id=snap.pool_id,
        fee=0.0,
        daily_volume=snap.daily_volume_usd,
        tvl=snap.tick_tvl_usd,
        tick_count=snap.tick_count,
        return_override=snap.annualized_return,
    )
