"""Efficiency reports: one machine spec against one or more measurements.

Each row carries the real rate, efficiency against peak, the attained peak
for the workload's operation intensity, attained efficiency and efficiency
under a compute ceiling.  Text output rounds percentages half-up to whole
percent; the JSON and CSV forms keep raw ratios.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from . import kvfile
from .core import (EfficiencyWarning, MachineSpec, Measurement, UndefinedIntensityError, bops_rate, efficiency,
                   operation_intensity, peak_bops)
from .roofline import attained_efficiency, attained_peak, attained_with_ceilings, ceiling_efficiency, \
    compute_ceiling

CEILINGS = {
    "ilp": dict(ilp=True, simd=False),
    "simd": dict(ilp=True, simd=True),
    "none": None,
}


@dataclass(frozen=True)
class ReportRow:
    workload: str
    total_bops: int
    wall_time_s: float
    bytes_accessed: float
    peak: float
    real_rate: float
    efficiency: float
    oi: float | None
    attained_peak: float | None
    bound: str | None
    attained_efficiency: float | None
    ceiling: str
    ceiling_rate: float | None
    ceiling_attained: float | None
    ceiling_efficiency: float | None
    above_roof: bool


@dataclass(frozen=True)
class ReportBundle:
    machine: MachineSpec
    measurements: tuple[Measurement, ...]
    rows: tuple[ReportRow, ...]
    ceiling: str = "ilp"


def derive_row(spec: MachineSpec, m: Measurement, ceiling: str = "ilp") -> ReportRow:
    if ceiling not in CEILINGS:
        raise ValueError(f"unknown ceiling {ceiling!r} (choose from {', '.join(CEILINGS)})")
    peak = peak_bops(spec)
    real = bops_rate(m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EfficiencyWarning)
        eff = efficiency(real, peak)
    oi = attained = bound = att_eff = c_rate = c_att = c_eff = None
    above = False
    if m.bytes_accessed > 0:
        oi = operation_intensity(m)
        attained, side = attained_peak(spec, oi)
        bound = side.value
        if attained > 0:
            att_eff = attained_efficiency(real, attained)
        above = real > attained
        flags = CEILINGS[ceiling]
        if flags is not None:
            c_rate = compute_ceiling(spec, **flags)
            c_att = attained_with_ceilings(c_rate, spec.mem_bandwidth_peak_bytes_per_s, oi)
            if c_att > 0:
                c_eff = ceiling_efficiency(real, c_att)
    return ReportRow(
        workload=m.workload, total_bops=m.tally.total(), wall_time_s=m.wall_time_s,
        bytes_accessed=m.bytes_accessed, peak=peak, real_rate=real, efficiency=eff, oi=oi,
        attained_peak=attained, bound=bound, attained_efficiency=att_eff, ceiling=ceiling,
        ceiling_rate=c_rate, ceiling_attained=c_att, ceiling_efficiency=c_eff, above_roof=above,
    )


def build_report(spec: MachineSpec, measurements: Sequence[Measurement], ceiling: str = "ilp",
                 require_oi: bool = False) -> ReportBundle:
    """Derive one row per measurement.

    With ``require_oi`` a measurement lacking ``bytes_accessed`` is an error
    instead of producing "n/a" attained rows.
    """
    if not measurements:
        raise ValueError("report needs at least one measurement")
    if require_oi:
        for m in measurements:
            if not m.bytes_accessed > 0:
                raise UndefinedIntensityError(f"{m.workload}: bytes_accessed is 0, attained rows need an OI")
    rows = tuple(derive_row(spec, m, ceiling) for m in measurements)
    return ReportBundle(spec, tuple(measurements), rows, ceiling)


def recompute_mismatches(bundle: ReportBundle) -> list[str]:
    """Fields whose stored value differs from a fresh derivation (should be empty)."""
    bad = []
    for m, row in zip(bundle.measurements, bundle.rows, strict=True):
        fresh = asdict(derive_row(bundle.machine, m, bundle.ceiling))
        for key, value in asdict(row).items():
            if fresh[key] != value:
                bad.append(f"{row.workload}.{key}")
    return bad


def percent(ratio: float | None) -> str:
    """Whole-percent display, rounding half up."""
    if ratio is None:
        return "n/a"
    return f"{(Decimal(repr(ratio)) * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP)}%"


def si_rate(rate: float | None) -> str:
    """Rate with an SI suffix, three significant digits (``86.4G``)."""
    if rate is None:
        return "n/a"
    for scale, suffix in ((1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "K")):
        if abs(rate) >= scale:
            return f"{rate / scale:.3g}{suffix}"
    return f"{rate:.3g}"


def render_text(bundle: ReportBundle) -> str:
    rows = bundle.rows
    ceiling_label = {"ilp": "ILP", "simd": "SIMD"}.get(bundle.ceiling)
    lines = [
        ("", [r.workload for r in rows]),
        ("Peak BOPS", [si_rate(r.peak) for r in rows]),
        ("Real BOPS", [si_rate(r.real_rate) for r in rows]),
        ("BOPS Efficiency", [percent(r.efficiency) for r in rows]),
        ("OI (BOPs/byte)", [f"{r.oi:.3g}" if r.oi is not None else "n/a" for r in rows]),
        ("Attained Peak BOPS", [si_rate(r.attained_peak) for r in rows]),
        ("BOPS Attained Efficiency", [percent(r.attained_efficiency) for r in rows]),
    ]
    if ceiling_label:
        lines.append((f"{ceiling_label} Ceiling Efficiency", [percent(r.ceiling_efficiency) for r in rows]))
    label_w = max(len(label) for label, _ in lines)
    col_w = [max(len(cells[k]) for _, cells in lines) for k in range(len(rows))]
    out = [f"machine: {bundle.machine.name}"]
    for label, cells in lines:
        out.append("  ".join([label.ljust(label_w)] + [c.rjust(w) for c, w in zip(cells, col_w)]).rstrip())
    for r in rows:
        if r.above_roof:
            out.append(f"warning: {r.workload} measured above the roof (spec and measurement disagree)")
        if r.efficiency > 1:
            out.append(f"warning: {r.workload} efficiency above 100%")
    return "\n".join(out) + "\n"


def to_json(bundle: ReportBundle) -> str:
    doc = {
        "schema_version": kvfile.SCHEMA_VERSION,
        "machine": bundle.machine.to_mapping(),
        "ceiling": bundle.ceiling,
        "rows": [asdict(r) for r in bundle.rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def to_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={kvfile.SCHEMA_VERSION}\n")
    fields = list(asdict(bundle.rows[0]))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in bundle.rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in asdict(r).values()])
    return buf.getvalue()
