import pathlib

import pytest

from lpalloc import _kernels
from lpalloc._kernels import _fallback
from lpalloc.model import read_pools_csv

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def published_pools():
    """WETH-USDC pool statistics with the aggregator-published returns as
    overrides, as consumed by the allocate subcommand."""
    with open(DATA / "pools_published.csv", newline="", encoding="utf-8") as fh:
        return read_pools_csv(fh)


@pytest.fixture(params=["compiled", "pure"])
def kernel_backend(request, monkeypatch):
    """Run the test under each search-kernel backend."""
    if request.param == "pure":
        monkeypatch.setattr(_kernels, "earnings", _fallback.earnings)
        monkeypatch.setattr(_kernels, "grid_best", _fallback.grid_best)
        monkeypatch.setattr(_kernels, "refine", _fallback.refine)
    elif not _kernels.COMPILED:
        pytest.skip("compiled kernels not available")
    return request.param


@pytest.fixture
def announce(capsys):
    """Print a line to the real terminal even while capture is active."""
    def _announce(line):
        with capsys.disabled():
            print(line, flush=True)
    return _announce
