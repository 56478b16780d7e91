"""Approximate BOPs from hardware performance-counter exports.

The estimate adds integer and floating-point instruction counts, scaling
packed SIMD instructions by how many 64-bit lanes they carry::

    integer_all = Integer_Ins + packed_integer_multiplier * SSE_Integer
    fp_all      = FP_Ins + scalar_fp_multiplier * SSE_Scalar + packed_fp_multiplier * SSE_Packed
    bops        = integer_all + fp_all

Instruction counts include every integer and FP instruction, not only the
operations the BOPs definition names, so the result is labeled approximate
and is never a drop-in replacement for a source-level tally.

Export format: one ``raw_event_name,value`` pair per line.  Optional header
comments ``# machine: ...``, ``# workload: ...``, ``# duration_s: ...`` and
``# schema_version: 1`` carry metadata.  A mapping file binds raw event names
to the logical counter names above, one ``raw_event_name,logical_name`` pair
per line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from . import kvfile

REQUIRED_COUNTERS = ("Integer_Ins", "SSE_Integer", "FP_Ins", "SSE_Scalar", "SSE_Packed")


class CounterFormatError(ValueError):
    """Malformed counter export or mapping file."""


class MissingCountersError(CounterFormatError):
    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(f"missing required counters: {', '.join(self.missing)}")


@dataclass(frozen=True)
class CounterDump:
    counters: Mapping[str, int]
    machine: str = ""
    workload: str = ""
    duration_s: float | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name, value in self.counters.items():
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise CounterFormatError(f"counter {name} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True)
class EstimatorProfile:
    packed_integer_multiplier: float = 2.0
    packed_fp_multiplier: float = 2.0
    scalar_fp_multiplier: float = 1.0

    def __post_init__(self):
        for name in ("packed_integer_multiplier", "packed_fp_multiplier", "scalar_fp_multiplier"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")

    @classmethod
    def for_vector_width(cls, width_bits: int) -> "EstimatorProfile":
        """Profile for packed units ``width_bits`` wide (128 -> 2, 256 -> 4)."""
        lanes = width_bits / 64
        return cls(packed_integer_multiplier=lanes, packed_fp_multiplier=lanes)


def load_profile(path: str | Path) -> EstimatorProfile:
    data = kvfile.load(path)
    kvfile.check_version(data, str(path))
    data.pop("schema_version")
    unknown = sorted(set(data) - {"packed_integer_multiplier", "packed_fp_multiplier", "scalar_fp_multiplier"})
    if unknown:
        raise kvfile.RecordFormatError(f"{path}: unknown keys {', '.join(unknown)}")
    try:
        return EstimatorProfile(**data)
    except ValueError as exc:
        raise kvfile.RecordFormatError(f"{path}: {exc}") from None


def estimate_bops(dump: CounterDump, profile: EstimatorProfile = EstimatorProfile()) -> int:
    missing = [name for name in REQUIRED_COUNTERS if name not in dump.counters]
    if missing:
        raise MissingCountersError(missing)
    c = dump.counters
    integer_all = c["Integer_Ins"] + profile.packed_integer_multiplier * c["SSE_Integer"]
    fp_all = (
        c["FP_Ins"]
        + profile.scalar_fp_multiplier * c["SSE_Scalar"]
        + profile.packed_fp_multiplier * c["SSE_Packed"]
    )
    return round(integer_all + fp_all)


def deviation(estimated: float, source_level: float) -> float:
    """Relative gap between a counter estimate and a source-level count."""
    if not source_level > 0:
        raise ValueError("source-level count must be positive")
    return abs(estimated - source_level) / source_level


_SPLIT = re.compile(r"\s*,\s*|\s+")


def _pairs(text: str, what: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = _SPLIT.split(line)
        if len(parts) != 2 or not all(parts):
            raise CounterFormatError(f"line {lineno}: malformed {what} line {raw.strip()!r}")
        yield lineno, parts[0], parts[1]


def parse_mapping(text: str) -> dict[str, str]:
    """Read a ``raw_event_name,logical_name`` mapping."""
    mapping: dict[str, str] = {}
    for lineno, raw, logical in _pairs(text, "mapping"):
        if raw in mapping and mapping[raw] != logical:
            raise CounterFormatError(f"line {lineno}: raw event {raw!r} mapped twice")
        mapping[raw] = logical
    return mapping


def default_mapping() -> dict[str, str]:
    """Mapping shipped for Westmere-family Xeons (best-effort event choice)."""
    text = resources.files("bops.data").joinpath("westmere.map").read_text(encoding="utf-8")
    return parse_mapping(text)


def identity_mapping(names=REQUIRED_COUNTERS) -> dict[str, str]:
    return {name: name for name in names}


def _header(text: str) -> dict[str, str]:
    meta = {}
    for raw in text.splitlines():
        m = re.match(r"\s*#\s*(\w+)\s*:\s*(.*?)\s*$", raw)
        if m:
            meta[m.group(1)] = m.group(2)
    return meta


def parse_counter_export(text: str, mapping: Mapping[str, str]) -> CounterDump:
    """Parse a counter export through ``mapping`` into logical counters.

    Raw events absent from the mapping are skipped and reported in
    ``CounterDump.warnings``.  A file yielding no mapped counter at all is
    rejected with :class:`MissingCountersError`.
    """
    meta = _header(text)
    version = meta.get("schema_version")
    if version is not None and version != str(kvfile.SCHEMA_VERSION):
        raise CounterFormatError(f"unsupported schema_version {version!r}")
    counters: dict[str, int] = {}
    source: dict[str, str] = {}
    warnings = []
    seen_raw = set()
    for lineno, raw, value in _pairs(text, "counter"):
        if raw in seen_raw:
            raise CounterFormatError(f"line {lineno}: raw event {raw!r} listed twice")
        seen_raw.add(raw)
        if not re.fullmatch(r"\d+", value):
            raise CounterFormatError(f"line {lineno}: value for {raw!r} is not a non-negative integer: {value!r}")
        logical = mapping.get(raw)
        if logical is None:
            warnings.append(f"unmapped event ignored: {raw}")
            continue
        if logical in counters:
            raise CounterFormatError(
                f"line {lineno}: duplicate logical counter {logical!r} (from {source[logical]!r} and {raw!r})"
            )
        counters[logical] = int(value)
        source[logical] = raw
    if not counters:
        raise MissingCountersError(REQUIRED_COUNTERS)
    duration = meta.get("duration_s")
    try:
        duration_s = float(duration) if duration is not None else None
    except ValueError:
        raise CounterFormatError(f"duration_s is not a number: {duration!r}") from None
    return CounterDump(
        counters=counters,
        machine=meta.get("machine", ""),
        workload=meta.get("workload", ""),
        duration_s=duration_s,
        warnings=tuple(warnings),
    )


def format_counter_export(dump: CounterDump) -> str:
    """Write ``dump`` in export format, using logical names as raw names."""
    lines = [f"# schema_version: {kvfile.SCHEMA_VERSION}"]
    if dump.machine:
        lines.append(f"# machine: {dump.machine}")
    if dump.workload:
        lines.append(f"# workload: {dump.workload}")
    if dump.duration_s is not None:
        lines.append(f"# duration_s: {dump.duration_s!r}")
    lines.extend(f"{name},{value}" for name, value in dump.counters.items())
    return "\n".join(lines) + "\n"
