"""Uninstrumented build of the Sort workload's quicksort: no counter argument,
no counting branches.  The baseline for the timing-mode overhead check."""

from __future__ import annotations

import time

import numba
import numpy as np

CUTOFF = 16


@numba.njit(nogil=True)
def quicksort(a):
    stack = np.empty(256, np.int64)
    sp = 0
    lo = 0
    hi = a.shape[0] - 1
    while True:
        while True:
            if hi - lo < CUTOFF:
                break
            mid = lo + ((hi - lo) >> 1)
            if a[mid] < a[lo]:
                t = a[mid]
                a[mid] = a[lo]
                a[lo] = t
            if a[hi] < a[lo]:
                t = a[hi]
                a[hi] = a[lo]
                a[lo] = t
            if a[hi] < a[mid]:
                t = a[hi]
                a[hi] = a[mid]
                a[mid] = t
            p = a[mid]
            i = lo - 1
            j = hi + 1
            while True:
                while True:
                    i += 1
                    if not a[i] < p:
                        break
                while True:
                    j -= 1
                    if not a[j] > p:
                        break
                if i >= j:
                    break
                t = a[i]
                a[i] = a[j]
                a[j] = t
            if j - lo < hi - j:
                stack[sp] = j + 1
                stack[sp + 1] = hi
                sp += 2
                hi = j
            else:
                stack[sp] = lo
                stack[sp + 1] = j
                sp += 2
                lo = j + 1
        for i in range(lo + 1, hi + 1):
            v = a[i]
            j = i
            while True:
                if j <= lo:
                    break
                if not a[j - 1] > v:
                    break
                a[j] = a[j - 1]
                j -= 1
            a[j] = v
        if sp == 0:
            break
        sp -= 2
        lo = stack[sp]
        hi = stack[sp + 1]


def timed_sort(data: np.ndarray) -> float:
    t0 = time.perf_counter()
    quicksort(data)
    return time.perf_counter() - t0


quicksort(np.arange(40, 0, -1, dtype=np.int64))
