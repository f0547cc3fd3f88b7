"""Command-line front end.

Subcommands: allocate (optimal split of wealth across pools and staking),
simulate (sequential provider entry until the pool return meets the staking
rate), ingest (swap exports to per-pool-day snapshots), report (allocation
table for one snapshot date), slippage (equilibrium price impact). Reports
print rates as percentages with two decimals; JSON output carries the
underlying full-precision fractions plus a meta block with the run
parameters. All subcommands are deterministic.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import sys
from contextlib import contextmanager

from lpalloc import __version__, allocator, convergence, ingest, model, slippage

FOOTNOTE = (
    "lp_return_pct is the model-implied post-allocation return "
    "sqrt(return * staking_rate); externally published LP-return figures "
    "for the same pools use an unstated effective-TVL normalization and "
    "can deviate by a few tenths of a percentage point.")


def _add_output_flags(sub):
    sub.add_argument("--format", choices=("csv", "json"), default="csv",
                     help="output format (default csv)")
    sub.add_argument("--out", default=None,
                     help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpalloc",
        description="Allocate liquidity-provider capital across ETH staking "
                    "and AMM pools, simulate return convergence, and derive "
                    "pool snapshots from swap exports.")
    sub = parser.add_subparsers(dest="command", required=True)

    alloc = sub.add_parser(
        "allocate", help="optimal split of wealth across pools and staking")
    alloc.add_argument("--pools", required=True,
                       help="pools CSV: chain,pool_id,fee_bps,tvl_usd,"
                            "daily_volume_usd[,return_pct]")
    alloc.add_argument("--staking-rate", type=float, required=True,
                       help="yearly staking rate as a fraction, e.g. 0.0347")
    alloc.add_argument("--wealth", type=float, required=True,
                       help="total budget in USD")
    alloc.add_argument("--annualization-days", type=int, default=365)
    _add_output_flags(alloc)

    sim = sub.add_parser(
        "simulate", help="sequential provider entry on a single pool")
    sim.add_argument("--staking-rate", type=float, required=True)
    sim.add_argument("--wealth", type=float, required=True,
                     help="wealth per provider in USD")
    sim.add_argument("--lps", type=int, required=True,
                     help="number of providers entering in sequence")
    sim.add_argument("--pools",
                     help="pools CSV; the first row is the simulated pool")
    sim.add_argument("--fee", type=float,
                     help="fee fraction per unit volume (alternative to "
                          "--pools, with --daily-volume and --tvl)")
    sim.add_argument("--daily-volume", type=float)
    sim.add_argument("--tvl", type=float)
    sim.add_argument("--annualization-days", type=int, default=365)
    _add_output_flags(sim)

    ing = sub.add_parser(
        "ingest", help="swap-event CSV to per-pool-day snapshot CSV")
    ing.add_argument("--swaps", required=True, help="swap-event CSV export")
    ing.add_argument("--range-pct", type=float, default=12.0,
                     help="price-range half-width in percent (default 12)")
    ing.add_argument("--concentration", type=float, default=None,
                     help="tick-span divisor; default 1.0 on Ethereum and "
                          "1.75 on rollups")
    ing.add_argument("--tick-spacing", type=int, default=None,
                     help="override the fee-tier tick spacing for all rows")
    ing.add_argument("--annualization-days", type=int, default=365)
    _add_output_flags(ing)

    rep = sub.add_parser(
        "report", help="allocation table for one snapshot date")
    rep.add_argument("--snapshots", required=True,
                     help="snapshot CSV produced by ingest")
    rep.add_argument("--date", required=True, help="snapshot date (UTC)")
    rep.add_argument("--staking-rate", type=float, required=True)
    rep.add_argument("--wealth", type=float, required=True)
    _add_output_flags(rep)

    slp = sub.add_parser(
        "slippage", help="equilibrium price impact of a trade")
    slp.add_argument("--staking-rate", type=float, required=True)
    slp.add_argument("--fee", type=float, required=True)
    slp.add_argument("--daily-volume", type=float, required=True)
    slp.add_argument("--trade-size", type=float, required=True)
    slp.add_argument("--reserve-x", type=float, default=None,
                     help="one-side reserve in USD; adds the direct dx/x "
                          "impact to the output")
    slp.add_argument("--annualization-days", type=int, default=365)
    _add_output_flags(slp)
    return parser


@contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit_json(payload, out_path):
    with _open_out(out_path) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _emit_allocation(pools, result, cfg, fmt, out_path, meta):
    r0 = [model.effective_annual_fees(p) / p.tvl for p in pools]
    if fmt == "json":
        payload = allocator.as_json_payload(result)
        for row, pool, r in zip(payload["rows"], pools, r0):
            row["chain"] = pool.chain
            row["tvl_usd"] = pool.tvl
            row["daily_volume_usd"] = pool.daily_volume
            row["return"] = r
        payload = {"meta": {**meta, "version": __version__},
                   **payload, "footnote": FOOTNOTE}
        _emit_json(payload, out_path)
        return
    with _open_out(out_path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["chain", "pool_id", "tvl_usd", "daily_volume_usd",
                         "return_pct", "allocation_usd", "lp_return_pct"])
        for pool, r, (_, w), (_, post) in zip(pools, r0,
                                              result.pool_allocations,
                                              result.post_returns):
            writer.writerow([pool.chain, pool.pool_id, f"{pool.tvl:.2f}",
                             f"{pool.daily_volume:.2f}", f"{r * 100:.2f}",
                             f"{w:.2f}", f"{post * 100:.2f}"])
        writer.writerow(["staking", "", "", "",
                         f"{cfg.staking_rate * 100:.2f}",
                         f"{result.staking:.2f}",
                         f"{cfg.staking_rate * 100:.2f}"])
        fh.write(f"# lambda={result.multiplier!r}\n")
        fh.write(f"# total_earnings_usd={result.total_earnings!r}\n")
        fh.write(f"# note: {FOOTNOTE}\n")


def _cmd_allocate(args) -> int:
    with open(args.pools, encoding="utf-8", newline="") as fh:
        pools = model.read_pools_csv(fh, args.annualization_days)
    cfg = model.LPConfig(wealth=args.wealth, staking_rate=args.staking_rate)
    result = allocator.optimal_allocation(pools, cfg)
    meta = {"command": "allocate", "pools": args.pools,
            "staking_rate": args.staking_rate, "wealth": args.wealth,
            "annualization_days": args.annualization_days}
    _emit_allocation(pools, result, cfg, args.format, args.out, meta)
    return 0


def _cmd_simulate(args) -> int:
    if args.pools:
        with open(args.pools, encoding="utf-8", newline="") as fh:
            pools = model.read_pools_csv(fh, args.annualization_days)
        if not pools:
            raise ValueError(f"no pools in {args.pools}")
        pool = pools[0]
    elif None not in (args.fee, args.daily_volume, args.tvl):
        pool = model.PoolState(
            chain="simulated", pool_id="pool", fee=args.fee,
            daily_volume=args.daily_volume, tvl=args.tvl,
            annualization_days=args.annualization_days)
    else:
        raise ValueError(
            "provide --pools or all of --fee, --daily-volume, --tvl")
    series = convergence.simulate_sequential(
        pool, args.staking_rate, args.wealth, args.lps)
    if args.format == "json":
        rows = [{"lp_index": s.lp_index, "pre_return": s.pre_return,
                 "allocation_usd": s.allocation, "staking_usd": s.staking,
                 "post_tvl_usd": s.post_tvl, "note": s.note}
                for s in series.steps]
        _emit_json({"meta": {"command": "simulate",
                             "staking_rate": args.staking_rate,
                             "wealth_per_lp": args.wealth, "lps": args.lps,
                             "version": __version__},
                    "rows": rows}, args.out)
    else:
        with _open_out(args.out) as fh:
            convergence.write_series_csv(series, fh)
    return 0


def _cmd_ingest(args) -> int:
    params = ingest.SnapshotParams(
        range_fraction=args.range_pct / 100.0,
        concentration=args.concentration,
        tick_spacing=args.tick_spacing,
        annualization_days=args.annualization_days)
    with open(args.swaps, encoding="utf-8", newline="") as fh:
        events, errors = ingest.parse_swaps_lenient(fh, args.tick_spacing)
    for err in errors:
        print(f"skipped: {err}", file=sys.stderr)
    if not events:
        print("error: no valid swap rows", file=sys.stderr)
        return 1
    snapshots = ingest.build_snapshots(events, params)
    if args.format == "json":
        rows = [{"chain": s.chain, "pool_id": s.pool_id,
                 "date": s.date.isoformat(), "tick_tvl_usd": s.tick_tvl_usd,
                 "daily_volume_usd": s.daily_volume_usd,
                 "annualized_return": s.annualized_return,
                 "m": s.tick_count, "concentration": s.concentration}
                for s in snapshots]
        _emit_json({"meta": {"command": "ingest", "swaps": args.swaps,
                             "range_pct": args.range_pct,
                             "concentration": args.concentration,
                             "tick_spacing": args.tick_spacing,
                             "annualization_days": args.annualization_days,
                             "version": __version__},
                    "rows": rows}, args.out)
    else:
        with _open_out(args.out) as fh:
            ingest.write_snapshots_csv(snapshots, fh)
    return 0


def _cmd_report(args) -> int:
    with open(args.snapshots, encoding="utf-8", newline="") as fh:
        snapshots = ingest.read_snapshots_csv(fh)
    want = dt.date.fromisoformat(args.date)
    day = [s for s in snapshots if s.date == want]
    if not day:
        available = sorted({s.date.isoformat() for s in snapshots})
        print(f"error: no snapshots for {args.date}; available dates: "
              f"{', '.join(available) if available else '(none)'}",
              file=sys.stderr)
        return 1
    pools = []
    for snap in day:
        if not snap.usable:
            print(f"skipped: {snap.chain}/{snap.pool_id} {snap.date} has "
                  f"no in-range TVL", file=sys.stderr)
            continue
        pools.append(ingest.snapshot_to_pool(snap))
    cfg = model.LPConfig(wealth=args.wealth, staking_rate=args.staking_rate)
    result = allocator.optimal_allocation(pools, cfg)
    meta = {"command": "report", "snapshots": args.snapshots,
            "date": args.date, "staking_rate": args.staking_rate,
            "wealth": args.wealth}
    _emit_allocation(pools, result, cfg, args.format, args.out, meta)
    return 0


def _cmd_slippage(args) -> int:
    inp = slippage.SlippageInput(
        trade_size=args.trade_size, fee=args.fee,
        daily_volume=args.daily_volume, staking_rate=args.staking_rate,
        reserve_x=args.reserve_x if args.reserve_x is not None else 0.0,
        annualization_days=args.annualization_days)
    rho = slippage.equilibrium_slippage(inp)
    direct = (slippage.cpmm_price_impact(args.reserve_x, args.trade_size)
              if args.reserve_x is not None else None)
    if args.format == "json":
        payload = {"meta": {"command": "slippage",
                            "staking_rate": args.staking_rate,
                            "fee": args.fee,
                            "daily_volume": args.daily_volume,
                            "trade_size": args.trade_size,
                            "annualization_days": args.annualization_days,
                            "version": __version__},
                   "equilibrium_slippage": rho}
        if direct is not None:
            payload["direct_price_impact"] = direct
        _emit_json(payload, args.out)
    else:
        with _open_out(args.out) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["quantity", "value"])
            writer.writerow(["equilibrium_slippage", repr(rho)])
            if direct is not None:
                writer.writerow(["direct_price_impact", repr(direct)])
    return 0


_HANDLERS = {
    "allocate": _cmd_allocate,
    "simulate": _cmd_simulate,
    "ingest": _cmd_ingest,
    "report": _cmd_report,
    "slippage": _cmd_slippage,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
