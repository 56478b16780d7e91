"""BOPs taxonomy, tallies, machine descriptions and the scalar metric formulas.

BOPs (basic operations) are counted in three classes: arithmetic (including
bitwise and logic), comparing, and array addressing.  Every operation weighs
one normalized 64-bit unit, except N-dimensional array addressing which
weighs N.
"""

from __future__ import annotations

import enum
import math
import operator
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from . import kvfile

U64_MAX = 2**64 - 1


class TallyOverflowError(OverflowError):
    """A BOPs count left the unsigned 64-bit range."""


class EfficiencyWarning(UserWarning):
    """A measured rate exceeds the bound it is compared against."""


class OpKind(enum.Enum):
    ADD = "add"
    SUBTRACT = "subtract"
    MULTIPLY = "multiply"
    DIVIDE = "divide"
    BITWISE = "bitwise"
    LOGIC = "logic"
    COMPARE = "compare"
    ARRAY_ADDRESSING = "array_addressing"


@dataclass(frozen=True)
class BasicOpClass:
    kind: OpKind
    dimensions: int | None = None

    def __post_init__(self):
        if self.kind is OpKind.ARRAY_ADDRESSING:
            if not isinstance(self.dimensions, int) or self.dimensions < 1:
                raise ValueError(f"array addressing needs dimensions >= 1, got {self.dimensions!r}")
        elif self.dimensions is not None:
            raise ValueError(f"{self.kind.value} takes no dimensions")

    @classmethod
    def addressing(cls, dimensions: int) -> "BasicOpClass":
        return cls(OpKind.ARRAY_ADDRESSING, dimensions)


def normalized_weight(op: BasicOpClass) -> int:
    """Normalized BOPs for one execution of ``op``."""
    if op.kind is OpKind.ARRAY_ADDRESSING:
        return op.dimensions
    return 1


def vector_weight(width_bits: int) -> float:
    """Normalized BOPs for one packed operation over a ``width_bits`` register.

    Scalar operands up to 64 bits count as 1; wider packed operations count as
    width/64 (128-bit SSE -> 2, 256-bit AVX -> 4).
    """
    if width_bits <= 0:
        raise ValueError("width_bits must be positive")
    return max(1.0, width_bits / 64)


def _check_count(name: str, value: Any) -> int:
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    try:
        value = operator.index(value)
    except TypeError:
        raise TypeError(f"{name} must be an integer count, got {value!r}") from None
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    if value > U64_MAX:
        raise TallyOverflowError(f"{name}={value} exceeds 64-bit range")
    return value


@dataclass(frozen=True)
class BopsTally:
    """Normalized BOPs per class.  Sums are checked against the 64-bit range."""

    arithmetic: int = 0
    comparing: int = 0
    addressing: int = 0

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _check_count(f.name, getattr(self, f.name)))

    def total(self) -> int:
        total = self.arithmetic + self.comparing + self.addressing
        if total > U64_MAX:
            raise TallyOverflowError(f"tally total {total} exceeds 64-bit range")
        return total

    def __add__(self, other: "BopsTally") -> "BopsTally":
        if not isinstance(other, BopsTally):
            return NotImplemented
        return BopsTally(
            self.arithmetic + other.arithmetic,
            self.comparing + other.comparing,
            self.addressing + other.addressing,
        )

    def scaled(self, k: int) -> "BopsTally":
        return BopsTally(self.arithmetic * k, self.comparing * k, self.addressing * k)

    def as_dict(self) -> dict[str, int]:
        return {
            "arithmetic": self.arithmetic,
            "comparing": self.comparing,
            "addressing": self.addressing,
            "total": self.total(),
        }


_SPEC_REQUIRED = (
    "name",
    "num_cpu",
    "num_core",
    "frequency_hz",
    "bops_per_cycle",
    "mem_bandwidth_peak_bytes_per_s",
    "ilp_efficiency",
    "simd_scale",
)
SPEC_KEYS = frozenset(_SPEC_REQUIRED) | {"flops_per_cycle"}


@dataclass(frozen=True)
class MachineSpec:
    name: str
    num_cpu: int
    num_core: int
    frequency_hz: float
    bops_per_cycle: float
    mem_bandwidth_peak_bytes_per_s: float
    ilp_efficiency: float = 1.0
    simd_scale: float = 1.0
    flops_per_cycle: float | None = None

    def __post_init__(self):
        for name in ("num_cpu", "num_core"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for name in ("frequency_hz", "bops_per_cycle", "mem_bandwidth_peak_bytes_per_s"):
            if not _positive(getattr(self, name)):
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        if self.flops_per_cycle is not None and not _positive(self.flops_per_cycle):
            raise ValueError(f"flops_per_cycle must be strictly positive, got {self.flops_per_cycle!r}")
        for name in ("ilp_efficiency", "simd_scale"):
            value = getattr(self, name)
            if not _positive(value) or value > 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], source: str = "<spec>") -> "MachineSpec":
        data = dict(data)
        kvfile.check_version(data, source)
        data.pop("schema_version")
        unknown = sorted(set(data) - SPEC_KEYS)
        if unknown:
            raise kvfile.RecordFormatError(f"{source}: unknown keys {', '.join(unknown)}")
        missing = [k for k in _SPEC_REQUIRED if k not in data]
        if missing:
            raise kvfile.RecordFormatError(f"{source}: missing keys {', '.join(missing)}")
        data["name"] = str(data["name"])
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise kvfile.RecordFormatError(f"{source}: {exc}") from None

    def to_mapping(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        if out["flops_per_cycle"] is None:
            del out["flops_per_cycle"]
        return out


def _positive(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0


def load_spec(path: str | Path) -> MachineSpec:
    return MachineSpec.from_mapping(kvfile.load(path), source=str(path))


_MEASUREMENT_KEYS = frozenset(
    {"workload", "arithmetic", "comparing", "addressing", "total", "wall_time_s", "bytes_accessed", "threads"}
)


@dataclass(frozen=True)
class Measurement:
    """One workload run.  ``meta`` carries run provenance (seed, mode, ...)."""

    workload: str
    tally: BopsTally
    wall_time_s: float
    bytes_accessed: float = 0.0
    threads: int = 1
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not _positive(self.wall_time_s):
            raise ValueError(f"wall_time_s must be > 0, got {self.wall_time_s!r}")
        if not (isinstance(self.bytes_accessed, (int, float)) and self.bytes_accessed >= 0):
            raise ValueError(f"bytes_accessed must be >= 0, got {self.bytes_accessed!r}")
        if isinstance(self.threads, bool) or not isinstance(self.threads, int) or self.threads < 1:
            raise ValueError(f"threads must be a positive integer, got {self.threads!r}")

    def to_mapping(self) -> dict[str, Any]:
        return {
            "workload": self.workload,
            **self.tally.as_dict(),
            "wall_time_s": float(self.wall_time_s),
            "bytes_accessed": float(self.bytes_accessed),
            "threads": self.threads,
            **{f"meta.{k}": v for k, v in self.meta.items()},
        }

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], source: str = "<measurement>") -> "Measurement":
        data = dict(data)
        kvfile.check_version(data, source)
        data.pop("schema_version")
        meta = {k[5:]: data.pop(k) for k in list(data) if k.startswith("meta.")}
        unknown = sorted(set(data) - _MEASUREMENT_KEYS)
        if unknown:
            raise kvfile.RecordFormatError(f"{source}: unknown keys {', '.join(unknown)}")
        try:
            tally = BopsTally(data["arithmetic"], data["comparing"], data["addressing"])
            if "total" in data and data["total"] != tally.total():
                raise ValueError(f"total {data['total']} does not match class sum {tally.total()}")
            return cls(
                workload=str(data["workload"]),
                tally=tally,
                wall_time_s=float(data["wall_time_s"]),
                bytes_accessed=float(data.get("bytes_accessed", 0.0)),
                threads=int(data.get("threads", 1)),
                meta=meta,
            )
        except KeyError as exc:
            raise kvfile.RecordFormatError(f"{source}: missing key {exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            raise kvfile.RecordFormatError(f"{source}: {exc}") from None


def load_measurement(path: str | Path) -> Measurement:
    return Measurement.from_mapping(kvfile.load(path), source=str(path))


def peak_bops(spec: MachineSpec) -> float:
    return float(spec.num_cpu * spec.num_core * spec.frequency_hz * spec.bops_per_cycle)


def peak_flops(spec: MachineSpec) -> float:
    if spec.flops_per_cycle is None:
        raise ValueError(f"machine {spec.name!r} has no flops_per_cycle")
    return float(spec.num_cpu * spec.num_core * spec.frequency_hz * spec.flops_per_cycle)


def bops_rate(m: Measurement) -> float:
    """Achieved BOPS: total BOPs over wall time."""
    if not m.wall_time_s > 0:
        raise ValueError("wall time must be positive")
    return m.tally.total() / m.wall_time_s


def efficiency(real_rate: float, peak_rate: float) -> float:
    """``real_rate / peak_rate``.  Ratios above 1 are returned but warned about."""
    if not peak_rate > 0:
        raise ValueError(f"peak rate must be positive, got {peak_rate!r}")
    ratio = real_rate / peak_rate
    if ratio > 1:
        warnings.warn(
            f"measured rate {real_rate:.4g} exceeds bound {peak_rate:.4g}; "
            "measurement and machine spec look inconsistent",
            EfficiencyWarning,
            stacklevel=2,
        )
    return ratio


class UndefinedIntensityError(ValueError):
    """Operation intensity needs a positive byte count."""


def operation_intensity(m: Measurement) -> float:
    if not m.bytes_accessed > 0:
        raise UndefinedIntensityError(f"OI undefined for {m.workload!r}: bytes_accessed is 0")
    return m.tally.total() / m.bytes_accessed
