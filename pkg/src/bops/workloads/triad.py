"""Stream-triad bandwidth probe: ``a[i] = b[i] + s * c[i]``."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numba
import numpy as np

BYTES_PER_ELEMENT = 3 * 8
DEFAULT_CACHE_BYTES = 32 * 1024 * 1024
DEFAULT_CACHE_FACTOR = 4


@numba.njit(nogil=True)
def _triad(a, b, c, s, lo, hi):
    for i in range(lo, hi):
        a[i] = b[i] + s * c[i]


def elements_for_cache(cache_bytes: int = DEFAULT_CACHE_BYTES, factor: float = DEFAULT_CACHE_FACTOR) -> int:
    """Smallest element count whose three arrays exceed ``factor`` x ``cache_bytes``."""
    return int(-(-factor * cache_bytes // BYTES_PER_ELEMENT))


def triad_pass_times(n: int, iterations: int, threads: int = 1, scalar: float = 3.0) -> list[float]:
    a = np.zeros(n)
    b = np.full(n, 1.0)
    c = np.full(n, 2.0)
    _triad(a, b, c, scalar, 0, min(n, 16))  # compile outside the timed passes
    bounds = [(t * n // threads, (t + 1) * n // threads) for t in range(threads)]
    times = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in range(iterations):
            t0 = time.perf_counter()
            if threads == 1:
                _triad(a, b, c, scalar, 0, n)
            else:
                list(pool.map(lambda r: _triad(a, b, c, scalar, r[0], r[1]), bounds))
            times.append(time.perf_counter() - t0)
    if a[0] != 1.0 + scalar * 2.0 or a[-1] != a[0]:
        raise RuntimeError("triad produced wrong values")
    return times
