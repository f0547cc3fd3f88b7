"""Search kernels with a compiled fast path.

The Cython extension is preferred; the pure-Python fallback is picked when
the extension is missing or when LPALLOC_PURE is set (to anything) in the
environment. Both expose the same three functions with identical semantics.
"""

import os

if os.environ.get("LPALLOC_PURE"):
    from lpalloc._kernels._fallback import earnings, grid_best, refine
    COMPILED = False
else:
    try:
        from lpalloc._kernels._core import earnings, grid_best, refine
        COMPILED = True
    except ImportError:
        from lpalloc._kernels._fallback import earnings, grid_best, refine
        COMPILED = False

def _core_available():
    """Whether the compiled extension can be imported at all, regardless of
    which backend was selected."""
    try:
        from lpalloc._kernels import _core  # noqa: F401
    except ImportError:
        return False
    return True


__all__ = ["earnings", "grid_best", "refine", "COMPILED", "_core_available"]
