# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled history-window scans used by the reference interpreter."""


def window_count(const long long[::1] ticks, const unsigned long long[::1] masks,
                 unsigned long long bit, long long lo, long long hi):
    """Number of history entries with ``lo <= tick <= hi`` whose mask has ``bit``."""
    cdef Py_ssize_t i, n = ticks.shape[0]
    cdef Py_ssize_t count = 0
    cdef long long t
    for i in range(n):
        t = ticks[i]
        if lo <= t and t <= hi and (masks[i] & bit):
            count += 1
    return count


def window_any(const long long[::1] ticks, const unsigned long long[::1] masks,
               unsigned long long bit, long long lo, long long hi):
    cdef Py_ssize_t i, n = ticks.shape[0]
    cdef long long t
    for i in range(n):
        t = ticks[i]
        if lo <= t and t <= hi and (masks[i] & bit):
            return True
    return False
