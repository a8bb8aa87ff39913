"""Kernel backend selection.

The compiled extension is used when it was built; setting
``PROVLEDGER_PURE_PYTHON=1`` forces the pure-Python implementation.
"""

import os

BACKEND = "python"

if os.environ.get("PROVLEDGER_PURE_PYTHON") != "1":
    try:
        from ._kernels import window_any, window_count

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import window_any, window_count

__all__ = ["BACKEND", "window_any", "window_count"]
