"""Instrumented measuring tools: the Sort workload and a Stream-triad probe.

Counting mode and timing mode are separate runs.  A timing run reuses the
tally of the counting run with the same configuration, so instrumentation
never touches the timed code.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass

import numpy as np

from ..core import BopsTally, Measurement
from . import sort as _sort
from . import triad as _triad
from .sort import SortVerificationError, generate_input, multiset_checksum
from .triad import DEFAULT_CACHE_BYTES, DEFAULT_CACHE_FACTOR, elements_for_cache


class Workload(enum.Enum):
    SORT = "sort"
    STREAM_TRIAD = "stream"


class Mode(enum.Enum):
    COUNTING = "counting"
    TIMING = "timing"


@dataclass(frozen=True)
class RunConfig:
    workload: Workload
    n_elements: int
    seed: int = 0
    threads: int = 1
    mode: Mode = Mode.COUNTING
    iterations: int = 1
    cache_bytes: int | None = None

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be positive")
        if self.workload is Workload.SORT and self.n_elements < 2:
            raise ValueError("sort needs at least 2 elements")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not -(2**63) <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


_counted: dict[tuple, tuple[BopsTally, int]] = {}
_counted_lock = threading.Lock()


def _count_key(cfg: RunConfig) -> tuple:
    return (cfg.n_elements, cfg.seed, cfg.threads)


def _check_reference(cfg: RunConfig, ref: Measurement) -> None:
    if ref.workload != "sort":
        raise ValueError(f"reference record is a {ref.workload!r} measurement, not sort")
    want = {"n_elements": cfg.n_elements, "seed": cfg.seed}
    for key, value in want.items():
        if key in ref.meta and ref.meta[key] != value:
            raise ValueError(f"reference record has {key}={ref.meta[key]}, this run uses {value}")
    if ref.threads != cfg.threads:
        raise ValueError(f"reference record has threads={ref.threads}, this run uses {cfg.threads}")


def run_sort(cfg: RunConfig, reference: Measurement | None = None) -> Measurement:
    """Generate, sort, verify.  Returns a :class:`Measurement`.

    Counting mode tallies every operation and the logical data traffic
    (element reads plus writes, 8 bytes each).  Timing mode takes both from
    ``reference`` when given, otherwise from a counting run of the same
    configuration (performed first, cached per process).  ``wall_time_s``
    covers the sort and merge phases only.
    """
    if cfg.workload is not Workload.SORT:
        raise ValueError("run_sort needs a Sort config")
    counting = cfg.mode is Mode.COUNTING
    meta = {"n_elements": cfg.n_elements, "seed": cfg.seed, "mode": cfg.mode.value}

    if not counting:
        if reference is not None:
            _check_reference(cfg, reference)
            tally, data_accesses = reference.tally, int(reference.bytes_accessed) // 8
            meta["tally_source"] = "reference"
        else:
            with _counted_lock:
                cached = _counted.get(_count_key(cfg))
            if cached is None:
                run_sort(RunConfig(Workload.SORT, cfg.n_elements, cfg.seed, cfg.threads, Mode.COUNTING))
                with _counted_lock:
                    cached = _counted[_count_key(cfg)]
            tally, data_accesses = cached
            meta["tally_source"] = "counting-run"

    data = generate_input(cfg.n_elements, cfg.seed)
    before = multiset_checksum(data)
    out, acc, elapsed = _sort.sort_array(data, cfg.threads, counting)
    if not bool(np.all(out[1:] >= out[:-1])):
        raise SortVerificationError("output is not in ascending order")
    if multiset_checksum(out) != before:
        raise SortVerificationError("output is not a permutation of the input")
    meta["verified"] = 1

    if counting:
        tally, data_accesses = acc.merged()
        with _counted_lock:
            _counted[_count_key(cfg)] = (tally, data_accesses)
        meta["tally_source"] = "counting-run"
    if elapsed <= 0:
        raise RuntimeError("clock returned a non-positive sort time")
    return Measurement(
        workload="sort",
        tally=tally,
        wall_time_s=elapsed,
        bytes_accessed=float(8 * data_accesses),
        threads=cfg.threads,
        meta=meta,
    )


def run_stream_triad(cfg: RunConfig) -> float:
    """Best-pass triad bandwidth in bytes/s (``24 * n / fastest pass``)."""
    if cfg.workload is not Workload.STREAM_TRIAD:
        raise ValueError("run_stream_triad needs a StreamTriad config")
    if cfg.cache_bytes is not None:
        footprint = _triad.BYTES_PER_ELEMENT * cfg.n_elements
        if footprint < DEFAULT_CACHE_FACTOR * cfg.cache_bytes:
            raise ValueError(
                f"triad arrays ({footprint} B) must exceed {DEFAULT_CACHE_FACTOR}x the cache size "
                f"({cfg.cache_bytes} B); use n >= {elements_for_cache(cfg.cache_bytes)}"
            )
    times = _triad.triad_pass_times(cfg.n_elements, cfg.iterations, cfg.threads)
    best = min(times)
    if best <= 0:
        raise RuntimeError("clock returned a non-positive pass time")
    return _triad.BYTES_PER_ELEMENT * cfg.n_elements / best


def triad_tally(n: int) -> BopsTally:
    """Kernel-language count of one pass ``for (i = 0; i < n; i++) a[i] = b[i] + s * c[i];``."""
    return BopsTally(arithmetic=3 * n, comparing=n, addressing=3 * n)


def measure_stream_triad(cfg: RunConfig) -> Measurement:
    """Triad run as a Measurement: one pass's tally over the best pass time.

    ``meta.bandwidth_bytes_per_s`` holds the bandwidth, usable as a machine spec's
    ``mem_bandwidth_peak_bytes_per_s``.
    """
    bandwidth = run_stream_triad(cfg)
    nbytes = float(_triad.BYTES_PER_ELEMENT * cfg.n_elements)
    return Measurement(
        workload="stream",
        tally=triad_tally(cfg.n_elements),
        wall_time_s=nbytes / bandwidth,
        bytes_accessed=nbytes,
        threads=cfg.threads,
        meta={"n_elements": cfg.n_elements, "iterations": cfg.iterations, "bandwidth_bytes_per_s": bandwidth},
    )


__all__ = [
    "DEFAULT_CACHE_BYTES",
    "Mode",
    "RunConfig",
    "SortVerificationError",
    "Workload",
    "elements_for_cache",
    "measure_stream_triad",
    "run_sort",
    "run_stream_triad",
    "triad_tally",
]
