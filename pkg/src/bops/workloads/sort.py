"""The Sort measuring tool: threaded quicksort over chunks plus pairwise merging.

Each worker sorts one contiguous chunk with an iterative quicksort
(median-of-three pivot, Hoare partition, insertion sort below
``CUTOFF`` elements).  Sorted chunks are then merged pairwise, round by
round, ping-ponging between the data array and one scratch buffer.

In counting mode every operation is tallied with the kernel-language rules,
as though the C code in the comments were run through the counting
interpreter: each ``+ - >> &&`` is one arithmetic BOP, each comparison one
comparing BOP, each array element access one addressing BOP (the explicit
subproblem stack included).  ``while`` conditions count on every
evaluation; ``for`` loops count one check and one step per iteration.  The
counting flag is a compile-time constant, so timing-mode kernels carry no
counting code at all.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from ..core import BopsTally

CUTOFF = 16
BLOCK_ELEMENTS = 1 << 16

# counter slots: arithmetic, comparing, addressing, data-element accesses
_AR, _CP, _AD, _DATA = range(4)


def _build_kernels(counting: bool):
    @numba.njit(nogil=True)
    def quicksort(a, cnt):
        ar = 0
        cp = 0
        ad = 0
        data = 0
        stack = np.empty(256, np.int64)
        sp = 0
        lo = 0
        hi = a.shape[0] - 1  # hi = n - 1
        if counting:
            ar += 1
        while True:
            # while (hi - lo >= CUTOFF)
            while True:
                if counting:
                    ar += 1
                    cp += 1
                if hi - lo < CUTOFF:
                    break
                # mid = lo + ((hi - lo) >> 1)
                mid = lo + ((hi - lo) >> 1)
                if counting:
                    ar += 3
                # median of three: if (a[mid] < a[lo]) swap(lo, mid) ...
                if counting:
                    ad += 2
                    data += 2
                    cp += 1
                if a[mid] < a[lo]:
                    t = a[mid]
                    a[mid] = a[lo]
                    a[lo] = t
                    if counting:
                        ad += 4
                        data += 4
                if counting:
                    ad += 2
                    data += 2
                    cp += 1
                if a[hi] < a[lo]:
                    t = a[hi]
                    a[hi] = a[lo]
                    a[lo] = t
                    if counting:
                        ad += 4
                        data += 4
                if counting:
                    ad += 2
                    data += 2
                    cp += 1
                if a[hi] < a[mid]:
                    t = a[hi]
                    a[hi] = a[mid]
                    a[mid] = t
                    if counting:
                        ad += 4
                        data += 4
                # p = a[mid]; i = lo - 1; j = hi + 1
                p = a[mid]
                i = lo - 1
                j = hi + 1
                if counting:
                    ad += 1
                    data += 1
                    ar += 2
                while True:
                    # do { i = i + 1; } while (a[i] < p);
                    while True:
                        i += 1
                        if counting:
                            ar += 1
                            ad += 1
                            data += 1
                            cp += 1
                        if not a[i] < p:
                            break
                    # do { j = j - 1; } while (a[j] > p);
                    while True:
                        j -= 1
                        if counting:
                            ar += 1
                            ad += 1
                            data += 1
                            cp += 1
                        if not a[j] > p:
                            break
                    # if (i >= j) break;
                    if counting:
                        cp += 1
                    if i >= j:
                        break
                    t = a[i]
                    a[i] = a[j]
                    a[j] = t
                    if counting:
                        ad += 4
                        data += 4
                # push the larger side, continue with the smaller:
                # if (j - lo < hi - j)
                if counting:
                    ar += 2
                    cp += 1
                if j - lo < hi - j:
                    # stack[sp] = j + 1; stack[sp + 1] = hi; sp = sp + 2; hi = j;
                    stack[sp] = j + 1
                    stack[sp + 1] = hi
                    sp += 2
                    hi = j
                    if counting:
                        ar += 3
                        ad += 2
                else:
                    # stack[sp] = lo; stack[sp + 1] = j; sp = sp + 2; lo = j + 1;
                    stack[sp] = lo
                    stack[sp + 1] = j
                    sp += 2
                    lo = j + 1
                    if counting:
                        ar += 3
                        ad += 2

            # insertion sort of a[lo..hi]
            # for (i = lo + 1; i <= hi; i++)
            if counting:
                ar += 1
            for i in range(lo + 1, hi + 1):
                if counting:
                    cp += 1
                    ar += 1
                # v = a[i]; j = i;
                v = a[i]
                j = i
                if counting:
                    ad += 1
                    data += 1
                # while (j > lo && a[j - 1] > v)
                while True:
                    if counting:
                        cp += 1
                        ar += 1
                    if j <= lo:
                        break
                    if counting:
                        ar += 1
                        ad += 1
                        data += 1
                        cp += 1
                    if not a[j - 1] > v:
                        break
                    # a[j] = a[j - 1]; j = j - 1;
                    a[j] = a[j - 1]
                    j -= 1
                    if counting:
                        ar += 2
                        ad += 2
                        data += 2
                # a[j] = v;
                a[j] = v
                if counting:
                    ad += 1
                    data += 1

            # if (sp == 0) break; sp = sp - 2; lo = stack[sp]; hi = stack[sp + 1];
            if counting:
                cp += 1
            if sp == 0:
                break
            sp -= 2
            lo = stack[sp]
            hi = stack[sp + 1]
            if counting:
                ar += 2
                ad += 2
        if counting:
            cnt[_AR] += ar
            cnt[_CP] += cp
            cnt[_AD] += ad
            cnt[_DATA] += data

    @numba.njit(nogil=True)
    def merge(src, lo, mid, hi, dst, cnt):
        ar = 0
        cp = 0
        ad = 0
        i = lo
        j = mid
        k = lo
        # while (i < mid && j < hi)
        while True:
            if counting:
                cp += 1
                ar += 1
            if i >= mid:
                break
            if counting:
                cp += 1
            if j >= hi:
                break
            # if (src[j] < src[i]) { dst[k] = src[j]; j = j + 1; } else { dst[k] = src[i]; i = i + 1; }
            if counting:
                ad += 2
                cp += 1
            if src[j] < src[i]:
                dst[k] = src[j]
                j += 1
            else:
                dst[k] = src[i]
                i += 1
            # k = k + 1;
            k += 1
            if counting:
                ad += 2
                ar += 2
        # while (i < mid) { dst[k] = src[i]; i = i + 1; k = k + 1; }
        while True:
            if counting:
                cp += 1
            if i >= mid:
                break
            dst[k] = src[i]
            i += 1
            k += 1
            if counting:
                ad += 2
                ar += 2
        # while (j < hi) { dst[k] = src[j]; j = j + 1; k = k + 1; }
        while True:
            if counting:
                cp += 1
            if j >= hi:
                break
            dst[k] = src[j]
            j += 1
            k += 1
            if counting:
                ad += 2
                ar += 2
        if counting:
            cnt[_AR] += ar
            cnt[_CP] += cp
            cnt[_AD] += ad
            cnt[_DATA] += ad

    @numba.njit(nogil=True)
    def copy_run(src, lo, hi, dst, cnt):
        # for (k = lo; k < hi; k++) dst[k] = src[k];
        for k in range(lo, hi):
            dst[k] = src[k]
        if counting:
            cnt[_AR] += hi - lo
            cnt[_CP] += hi - lo
            cnt[_AD] += 2 * (hi - lo)
            cnt[_DATA] += 2 * (hi - lo)

    return quicksort, merge, copy_run


_KERNELS: dict[bool, tuple] = {}
_KERNEL_LOCK = threading.Lock()


def kernels(counting: bool):
    """Compiled ``(quicksort, merge, copy_run)`` for the given mode."""
    with _KERNEL_LOCK:
        if counting not in _KERNELS:
            ks = _build_kernels(counting)
            cnt = np.zeros(4, np.int64)
            warm = np.arange(40, 0, -1, dtype=np.int64)
            ks[0](warm, cnt)
            ks[1](warm, 0, 20, 40, np.empty_like(warm), cnt)
            ks[2](warm, 0, 40, np.empty_like(warm), cnt)
            _KERNELS[counting] = ks
        return _KERNELS[counting]


@dataclass
class TallyAccumulator:
    """Per-worker counter arrays, summed once after the parallel phase."""

    slots: list

    @classmethod
    def for_workers(cls, workers: int) -> "TallyAccumulator":
        return cls([np.zeros(4, np.int64) for _ in range(workers)])

    def merged(self) -> tuple[BopsTally, int]:
        total = [0, 0, 0, 0]
        for slot in self.slots:
            for k in range(4):
                total[k] += int(slot[k])
        return BopsTally(total[_AR], total[_CP], total[_AD]), total[_DATA]


def generate_input(n: int, seed: int) -> np.ndarray:
    """``n`` uniform int64 values, reproducible for a given seed.

    Values come from PCG64 streams, one per ``BLOCK_ELEMENTS`` block, spawned
    from ``SeedSequence(seed)``; the output does not depend on thread count.
    """
    seq = np.random.SeedSequence(seed & 0xFFFF_FFFF_FFFF_FFFF)
    nblocks = max(1, -(-n // BLOCK_ELEMENTS))
    out = np.empty(n, np.int64)
    info = np.iinfo(np.int64)
    for b, child in enumerate(seq.spawn(nblocks)):
        lo = b * BLOCK_ELEMENTS
        hi = min(n, lo + BLOCK_ELEMENTS)
        gen = np.random.Generator(np.random.PCG64(child))
        out[lo:hi] = gen.integers(info.min, info.max, size=hi - lo, dtype=np.int64, endpoint=True)
    return out


def chunk_bounds(n: int, parts: int) -> list[tuple[int, int]]:
    return [(t * n // parts, (t + 1) * n // parts) for t in range(parts)]


def multiset_checksum(a: np.ndarray) -> tuple[int, int]:
    """Order-independent fingerprint: wrapping sum and xor of mixed values."""
    z = a.view(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return int(np.add.reduce(z, dtype=np.uint64)), int(np.bitwise_xor.reduce(z)) if len(z) else 0


class SortVerificationError(RuntimeError):
    """Sorted output is out of order or not a permutation of the input."""


def sort_array(data: np.ndarray, threads: int, counting: bool, pool: ThreadPoolExecutor | None = None):
    """Sort ``data``; returns ``(sorted, TallyAccumulator, seconds)``.

    ``data`` is overwritten.  The sorted result is either ``data`` itself or
    the scratch buffer, whichever the last merge round wrote.  Only the sort
    and merge phases are timed.
    """
    quicksort, merge, copy_run = kernels(counting)
    n = data.shape[0]
    parts = max(1, min(threads, n))
    runs = chunk_bounds(n, parts)
    acc = TallyAccumulator.for_workers(parts)
    buf = np.empty_like(data)
    own_pool = pool is None and parts > 1
    if own_pool:
        pool = ThreadPoolExecutor(max_workers=parts)
    try:
        t0 = time.perf_counter()
        if parts == 1:
            quicksort(data, acc.slots[0])
        else:
            list(pool.map(lambda r: quicksort(data[r[0][0]:r[0][1]], r[1]), zip(runs, acc.slots)))
        src, dst = data, buf
        while len(runs) > 1:
            jobs = []
            next_runs = []
            for p in range(0, len(runs), 2):
                if p + 1 < len(runs):
                    (lo, mid), (_, hi) = runs[p], runs[p + 1]
                    jobs.append((lo, mid, hi))
                    next_runs.append((lo, hi))
                else:
                    jobs.append((runs[p][0], None, runs[p][1]))
                    next_runs.append(runs[p])

            def work(job, slot, src=src, dst=dst):
                lo, mid, hi = job
                if mid is None:
                    copy_run(src, lo, hi, dst, slot)
                else:
                    merge(src, lo, mid, hi, dst, slot)

            list(pool.map(work, jobs, acc.slots[: len(jobs)]))
            runs = next_runs
            src, dst = dst, src
        elapsed = time.perf_counter() - t0
    finally:
        if own_pool:
            pool.shutdown()
    return src, acc, elapsed
