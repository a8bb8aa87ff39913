"""Compare the Cython window kernels with their pure-Python twins.

    python benchmarks/bench_kernels.py [--history 100000] [--repeat 20]
"""

import argparse
import random
import timeit
from array import array

from provledger import _kernels_py

try:
    from provledger import _kernels
except ImportError:
    _kernels = None


def make_history(n: int, seed: int = 0) -> tuple[array, array]:
    rng = random.Random(seed)
    ticks = array("q", sorted(rng.randrange(0, n // 4 + 1) for _ in range(n)))
    masks = array("Q", (rng.getrandbits(64) for _ in range(n)))
    return ticks, masks


def bench(module, ticks, masks, repeat: int) -> dict[str, float]:
    hi = ticks[-1]
    lo = hi - 30
    out = {}
    for name in ("window_count", "window_any"):
        fn = getattr(module, name)
        t = timeit.timeit(lambda: fn(ticks, masks, 1 << 63, lo, hi), number=repeat)
        out[name] = t / repeat
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--history", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    ticks, masks = make_history(args.history)
    py = bench(_kernels_py, ticks, masks, args.repeat)
    print(f"history={args.history} repeat={args.repeat}")
    if _kernels is None:
        print("compiled kernels not built; python only")
        for k, v in py.items():
            print(f"{k:<14} python {v * 1e3:9.3f} ms")
        return
    cy = bench(_kernels, ticks, masks, args.repeat)
    for k in py:
        assert _kernels.window_count(ticks, masks, 1, 0, ticks[-1]) == _kernels_py.window_count(
            ticks, masks, 1, 0, ticks[-1]
        )
        print(f"{k:<14} python {py[k] * 1e3:9.3f} ms   cython {cy[k] * 1e3:9.3f} ms   speedup {py[k] / cy[k]:7.1f}x")


if __name__ == "__main__":
    main()
