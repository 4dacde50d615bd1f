"""Exact integrals of piecewise-constant paths inside numba kernels."""
import math

from numba import njit


@njit(cache=True, inline="always")
def integrate_steps(times, values, k, a, b):
    """Integral over ``[a, b]`` of the step path ``values[i]`` on ``[times[i], times[i+1])``."""
    total = 0.0
    for i in range(k):
        lo = times[i]
        hi = times[i + 1] if i + 1 < k else math.inf
        lo = max(lo, a)
        hi = min(hi, b)
        if hi > lo:
            total += values[i] * (hi - lo)
    return total


@njit(cache=True, inline="always")
def fill_windows(times, values, k, starts, t, m, T_row, seg_row):
    """Window integrals for each start; the first is the in-order sum of ``m`` segments."""
    acc = 0.0
    for i in range(m):
        a = starts[0] + i * t / m
        b = starts[0] + (i + 1) * t / m if i + 1 < m else starts[0] + t
        seg_row[i] = integrate_steps(times, values, k, a, b)
        acc += seg_row[i]
    T_row[0] = acc
    for j in range(1, starts.size):
        T_row[j] = integrate_steps(times, values, k, starts[j], starts[j] + t)
