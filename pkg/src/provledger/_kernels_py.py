"""Pure-Python twin of ``_kernels.pyx``; same signatures, same results."""


def window_count(ticks, masks, bit, lo, hi):
    """Number of history entries with ``lo <= tick <= hi`` whose mask has ``bit``."""
    count = 0
    for t, m in zip(ticks, masks):
        if lo <= t <= hi and m & bit:
            count += 1
    return count


def window_any(ticks, masks, bit, lo, hi):
    for t, m in zip(ticks, masks):
        if lo <= t <= hi and m & bit:
            return True
    return False
