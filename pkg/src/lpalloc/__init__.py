"""Optimal liquidity-provider capital allocation across ETH staking and AMM
pools, with return-convergence simulation, equilibrium slippage, and a
swap-export ingestion pipeline."""

__version__ = "0.1.0"

from lpalloc.allocator import (
    AllocationResult,
    allocation_for_pool,
    optimal_allocation,
    oracle_maximize,
    verify_kkt,
    water_fill_lambda,
)
from lpalloc.convergence import (
    ConvergenceSeries,
    ConvergenceStep,
    analytic_return_after,
    simulate_sequential,
    step_return,
)
from lpalloc.ingest import (
    PoolSnapshot,
    SnapshotParams,
    SwapEvent,
    SwapParseError,
    build_snapshots,
    daily_last_swaps,
    parse_swaps,
    pool_snapshot,
    sqrt_price_at_tick,
    tick_tvl,
    ticks_in_range,
)
from lpalloc.model import (
    LPConfig,
    PoolState,
    clmm_return,
    cpmm_return,
    pool_fees,
    read_pools_csv,
)
from lpalloc.slippage import (
    SlippageInput,
    cpmm_price_impact,
    equilibrium_slippage,
)

__all__ = [
    "__version__",
    "AllocationResult", "allocation_for_pool", "optimal_allocation",
    "oracle_maximize", "verify_kkt", "water_fill_lambda",
    "ConvergenceSeries", "ConvergenceStep", "analytic_return_after",
    "simulate_sequential", "step_return",
    "PoolSnapshot", "SnapshotParams", "SwapEvent", "SwapParseError",
    "build_snapshots", "daily_last_swaps", "parse_swaps", "pool_snapshot",
    "sqrt_price_at_tick", "tick_tvl", "ticks_in_range",
    "LPConfig", "PoolState", "clmm_return", "cpmm_return", "pool_fees",
    "read_pools_csv",
    "SlippageInput", "cpmm_price_impact", "equilibrium_slippage",
]
