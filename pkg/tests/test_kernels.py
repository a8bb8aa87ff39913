import os
import subprocess
import sys
from array import array

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from provledger import _kernels_py, kernels

compiled = pytest.importorskip("provledger._kernels")

histories = st.lists(
    st.tuples(st.integers(min_value=0, max_value=60), st.integers(min_value=0, max_value=2**64 - 1)),
    max_size=60,
).map(lambda rows: sorted(rows))


@settings(max_examples=300, deadline=None)
@given(histories, st.integers(min_value=0, max_value=63), st.integers(-5, 65), st.integers(0, 30))
def test_backends_agree(rows, bit_index, lo, width):
    ticks = array("q", [t for t, _ in rows])
    masks = array("Q", [m for _, m in rows])
    bit, hi = 1 << bit_index, lo + width
    assert compiled.window_count(ticks, masks, bit, lo, hi) == _kernels_py.window_count(ticks, masks, bit, lo, hi)
    assert compiled.window_any(ticks, masks, bit, lo, hi) == _kernels_py.window_any(ticks, masks, bit, lo, hi)


def test_empty_history():
    empty_t, empty_m = array("q"), array("Q")
    for mod in (compiled, _kernels_py):
        assert mod.window_count(empty_t, empty_m, 1, 0, 10) == 0
        assert not mod.window_any(empty_t, empty_m, 1, 0, 10)


def test_backend_follows_environment():
    forced = os.environ.get("PROVLEDGER_PURE_PYTHON") == "1"
    assert kernels.BACKEND == ("python" if forced else "cython")


def test_env_forces_python_fallback():
    env = dict(os.environ, PROVLEDGER_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from provledger import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
