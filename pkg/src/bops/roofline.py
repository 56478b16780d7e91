"""DC-Roofline: attainable BOPS as a function of operation intensity.

The roof is ``min(oi * bandwidth, peak)``.  Ceilings lower either side:
compute ceilings (ILP, SIMD) cap the horizontal roof, memory ceilings
(prefetching off) tilt the diagonal down.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .core import MachineSpec, Measurement, bops_rate, operation_intensity, peak_bops, peak_flops

CSV_SCHEMA_VERSION = 1
RIDGE_RTOL = 1e-9
DEFAULT_OI_RANGE = (2.0**-4, 2.0**6)
DEFAULT_POINTS_PER_DECADE = 64


class Bound(enum.Enum):
    MEMORY = "memory-bound"
    COMPUTE = "compute-bound"
    RIDGE = "ridge"


class Attained(NamedTuple):
    rate: float
    bound: Bound


def _min_with_side(memory_side: float, compute_side: float) -> Attained:
    if math.isclose(memory_side, compute_side, rel_tol=RIDGE_RTOL, abs_tol=0.0):
        return Attained(min(memory_side, compute_side), Bound.RIDGE)
    if memory_side < compute_side:
        return Attained(memory_side, Bound.MEMORY)
    return Attained(compute_side, Bound.COMPUTE)


def attained_peak(spec: MachineSpec, oi: float) -> Attained:
    """Upper bound on BOPS for a workload of operation intensity ``oi``."""
    if oi < 0:
        raise ValueError("operation intensity must be >= 0")
    return _min_with_side(oi * spec.mem_bandwidth_peak_bytes_per_s, peak_bops(spec))


def ridge_point(spec: MachineSpec) -> float:
    """OI where the bandwidth diagonal meets the compute roof."""
    return peak_bops(spec) / spec.mem_bandwidth_peak_bytes_per_s


def attained_efficiency(real_rate: float, attained: float) -> float:
    if not attained > 0:
        raise ValueError("attained peak must be positive")
    return real_rate / attained


def compute_ceiling(spec: MachineSpec, *, ilp: bool = True, simd: bool = True) -> float:
    """Peak BOPS scaled by the machine spec's ILP efficiency and/or SIMD scale.

    ``ilp=True, simd=False`` gives the ILP ceiling; both flags give the SIMD
    ceiling stacked under it.
    """
    rate = peak_bops(spec)
    if ilp:
        rate *= spec.ilp_efficiency
    if simd:
        rate *= spec.simd_scale
    return rate


def attained_with_ceilings(ceiling_rate: float, bw_ceiling: float, oi: float) -> float:
    if oi < 0:
        raise ValueError("operation intensity must be >= 0")
    if not (ceiling_rate > 0 and bw_ceiling > 0):
        raise ValueError("ceiling rate and bandwidth must be positive")
    return min(ceiling_rate, bw_ceiling * oi)


def ceiling_efficiency(real_rate: float, attained_c: float) -> float:
    if not attained_c > 0:
        raise ValueError("attained ceiling bound must be positive")
    return real_rate / attained_c


def classic_flops_attained(spec: MachineSpec, oi_flops: float) -> Attained:
    """The FLOPS Roofline bound, for side-by-side comparison."""
    if oi_flops < 0:
        raise ValueError("operation intensity must be >= 0")
    return _min_with_side(oi_flops * spec.mem_bandwidth_peak_bytes_per_s, peak_flops(spec))


class CeilingKind(enum.Enum):
    COMPUTE = "compute"
    MEMORY = "memory"


@dataclass(frozen=True)
class Ceiling:
    name: str
    kind: CeilingKind
    compute_level: float | None = None
    bandwidth_level: float | None = None

    def __post_init__(self):
        if self.kind is CeilingKind.COMPUTE:
            ok = self.compute_level is not None and self.bandwidth_level is None and self.compute_level > 0
        else:
            ok = self.bandwidth_level is not None and self.compute_level is None and self.bandwidth_level > 0
        if not ok:
            raise ValueError(f"ceiling {self.name!r}: set exactly one positive level matching kind {self.kind.value}")

    @classmethod
    def compute(cls, name: str, level: float) -> "Ceiling":
        return cls(name, CeilingKind.COMPUTE, compute_level=level)

    @classmethod
    def memory(cls, name: str, bandwidth: float) -> "Ceiling":
        return cls(name, CeilingKind.MEMORY, bandwidth_level=bandwidth)

    def bound(self, spec: MachineSpec, oi: float) -> float:
        """The ceiling's polyline value at ``oi`` (the other side stays at its peak)."""
        if self.kind is CeilingKind.COMPUTE:
            return attained_with_ceilings(self.compute_level, spec.mem_bandwidth_peak_bytes_per_s, oi)
        return attained_with_ceilings(peak_bops(spec), self.bandwidth_level, oi)


CEILING_NAMES = ("ilp", "simd", "prefetch")


def standard_ceilings(spec: MachineSpec, names: Sequence[str] = CEILING_NAMES,
                      prefetch_bandwidth: float | None = None) -> list[Ceiling]:
    """Build ILP / SIMD / prefetching ceilings from a machine spec.

    The prefetching ceiling is the bandwidth with hardware prefetching off,
    which a machine spec does not carry; pass it as ``prefetch_bandwidth``.
    """
    out = []
    for name in names:
        key = name.strip().lower()
        if key == "ilp":
            out.append(Ceiling.compute("ILP", compute_ceiling(spec, ilp=True, simd=False)))
        elif key == "simd":
            out.append(Ceiling.compute("SIMD", compute_ceiling(spec, ilp=True, simd=True)))
        elif key in ("prefetch", "prefetching"):
            if prefetch_bandwidth is None:
                raise ValueError("the prefetch ceiling needs a bandwidth measured with prefetching off")
            out.append(Ceiling.memory("Prefetching", prefetch_bandwidth))
        else:
            raise ValueError(f"unknown ceiling {name!r} (choose from {', '.join(CEILING_NAMES)})")
    return out


@dataclass(frozen=True)
class WorkloadPoint:
    name: str
    oi: float
    rate: float

    @classmethod
    def from_measurement(cls, m: Measurement) -> "WorkloadPoint":
        return cls(m.workload, operation_intensity(m), bops_rate(m))


@dataclass(frozen=True)
class RooflineModel:
    spec: MachineSpec
    ceilings: tuple[Ceiling, ...] = ()
    points: tuple[WorkloadPoint, ...] = field(default=())

    def __post_init__(self):
        if self.spec is None:
            raise ValueError("roofline model needs a machine spec")
        peak = peak_bops(self.spec)
        bw = self.spec.mem_bandwidth_peak_bytes_per_s
        for c in self.ceilings:
            if c.kind is CeilingKind.COMPUTE and c.compute_level > peak * (1 + RIDGE_RTOL):
                raise ValueError(f"ceiling {c.name!r} lies above the peak roof")
            if c.kind is CeilingKind.MEMORY and c.bandwidth_level > bw * (1 + RIDGE_RTOL):
                raise ValueError(f"ceiling {c.name!r} lies above the peak bandwidth")
        compute = sorted((c for c in self.ceilings if c.kind is CeilingKind.COMPUTE),
                         key=lambda c: -c.compute_level)
        memory = sorted((c for c in self.ceilings if c.kind is CeilingKind.MEMORY),
                        key=lambda c: -c.bandwidth_level)
        object.__setattr__(self, "ceilings", tuple(compute + memory))
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def peak(self) -> float:
        return peak_bops(self.spec)

    @property
    def ridge(self) -> float:
        return ridge_point(self.spec)

    def roof(self, oi: float) -> float:
        return attained_peak(self.spec, oi).rate

    def above_roof(self) -> list[WorkloadPoint]:
        """Points measured faster than the roof allows (spec/measurement disagree)."""
        return [p for p in self.points if p.rate > self.roof(p.oi) * (1 + RIDGE_RTOL)]


def sample_grid(model: RooflineModel, oi_range: tuple[float, float] = DEFAULT_OI_RANGE,
                per_decade: int = DEFAULT_POINTS_PER_DECADE) -> list[float]:
    """Log-spaced OI samples, widened by powers of two to cover every point and
    the ridge, with every kink and point OI inserted so the sampled polylines
    are exact in log-log space."""
    lo, hi = oi_range
    special = [model.ridge] + [p.oi for p in model.points if p.oi > 0]
    bw = model.spec.mem_bandwidth_peak_bytes_per_s
    for c in model.ceilings:
        special.append(c.compute_level / bw if c.kind is CeilingKind.COMPUTE else model.peak / c.bandwidth_level)
    while min(special) < lo:
        lo /= 2
    while max(special) > hi:
        hi *= 2
    decades = math.log10(hi / lo)
    n = max(2, math.ceil(per_decade * decades) + 1)
    grid = [lo * (hi / lo) ** (k / (n - 1)) for k in range(n)]
    grid[0], grid[-1] = lo, hi
    return sorted(set(grid) | set(special))


def emit_csv(model: RooflineModel, oi_range: tuple[float, float] = DEFAULT_OI_RANGE,
             per_decade: int = DEFAULT_POINTS_PER_DECADE) -> str:
    """Roof, ceilings, ridge and workload points as ``series,oi,rate`` rows.

    The first line is ``# schema_version=1``.  Series names are ``roof``,
    ``ceiling:<name>``, ``ridge`` and ``point:<name>``.
    """
    buf = io.StringIO()
    buf.write(f"# schema_version={CSV_SCHEMA_VERSION}\n")
    buf.write("series,oi,rate\n")
    grid = sample_grid(model, oi_range, per_decade)
    for oi in grid:
        buf.write(f"roof,{oi!r},{model.roof(oi)!r}\n")
    for c in model.ceilings:
        for oi in grid:
            buf.write(f"ceiling:{c.name},{oi!r},{c.bound(model.spec, oi)!r}\n")
    buf.write(f"ridge,{model.ridge!r},{model.peak!r}\n")
    for p in model.points:
        buf.write(f"point:{p.name},{p.oi!r},{p.rate!r}\n")
    return buf.getvalue()


def read_csv(text: str) -> dict[str, list[tuple[float, float]]]:
    """Parse :func:`emit_csv` output into ``{series: [(oi, rate), ...]}``."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# schema_version={CSV_SCHEMA_VERSION}":
        raise ValueError("not a roofline CSV (missing or unsupported schema_version)")
    if lines[1].strip() != "series,oi,rate":
        raise ValueError("unexpected roofline CSV header")
    out: dict[str, list[tuple[float, float]]] = {}
    for line in lines[2:]:
        series, oi, rate = line.rsplit(",", 2)
        out.setdefault(series, []).append((float(oi), float(rate)))
    return out


def emit_plot(model: RooflineModel, fmt: str = "svg", **kwargs) -> str:
    """Render ``model`` as ``"csv"`` text or a ``"svg"`` document."""
    fmt = fmt.lower()
    if fmt == "csv":
        return emit_csv(model, **kwargs)
    if fmt == "svg":
        from .plotting import roofline_svg

        return roofline_svg(model, **kwargs)
    raise ValueError(f"unknown plot format {fmt!r}")
