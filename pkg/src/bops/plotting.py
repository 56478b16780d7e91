"""Matplotlib rendering of roofline models and report bars.

Figures are built on bare ``Figure`` objects (no pyplot state) and written
as SVG with a fixed hash salt and no date stamp, so identical input gives
byte-identical files.
"""

from __future__ import annotations

import io

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .roofline import DEFAULT_OI_RANGE, DEFAULT_POINTS_PER_DECADE, CeilingKind, RooflineModel, sample_grid

_SVG_RC = {
    "svg.hashsalt": "bops",
    "svg.fonttype": "none",
    "path.simplify": False,
}
_CEILING_STYLES = ("--", ":", "-.", (0, (5, 2, 1, 2)))


def svg_bytes(fig: Figure) -> str:
    FigureCanvasSVG(fig)
    buf = io.StringIO()
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def roofline_figure(model: RooflineModel, oi_range=DEFAULT_OI_RANGE,
                    per_decade: int = DEFAULT_POINTS_PER_DECADE) -> Figure:
    grid = sample_grid(model, oi_range, per_decade)
    fig = Figure(figsize=(7.0, 4.8))
    ax = fig.add_subplot()
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=10)
    ax.plot(grid, [model.roof(x) for x in grid], color="black", linewidth=2, label="roof")
    for k, c in enumerate(model.ceilings):
        ys = [c.bound(model.spec, x) for x in grid]
        if c.kind is CeilingKind.COMPUTE:
            label = f"{c.name} ceiling ({c.compute_level / 1e9:.3g} GBOPS)"
        else:
            label = f"{c.name} ceiling ({c.bandwidth_level / 1e9:.3g} GB/s)"
        ax.plot(grid, ys, linestyle=_CEILING_STYLES[k % len(_CEILING_STYLES)], linewidth=1.2, label=label)
    ax.plot([model.ridge], [model.peak], marker="D", color="black", linestyle="none")
    ax.annotate(f"ridge OI={model.ridge:.3g}", (model.ridge, model.peak), textcoords="offset points",
                xytext=(6, 8), fontsize=8)
    flagged = {id(p) for p in model.above_roof()}
    for p in model.points:
        if p.oi <= 0 or p.rate <= 0:
            continue
        bad = id(p) in flagged
        ax.plot([p.oi], [p.rate], marker="x" if bad else "o", color="tab:red" if bad else "tab:blue",
                linestyle="none")
        ax.annotate(p.name + (" (above roof)" if bad else ""), (p.oi, p.rate), textcoords="offset points",
                    xytext=(5, -12), fontsize=8)
    ax.set_xlim(grid[0], grid[-1])
    ax.set_ylim(top=max([model.peak] + [p.rate for p in model.points]) * 2.5)
    ax.set_xlabel("operation intensity (BOPs/byte)")
    ax.set_ylabel("BOPS")
    ax.set_title(f"DC-Roofline: {model.spec.name}")
    ax.grid(True, which="major", linewidth=0.4)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    return fig


def roofline_svg(model: RooflineModel, oi_range=DEFAULT_OI_RANGE,
                 per_decade: int = DEFAULT_POINTS_PER_DECADE) -> str:
    return svg_bytes(roofline_figure(model, oi_range, per_decade))


def efficiency_figure(rows) -> Figure:
    """Grouped bars of efficiency and attained efficiency per workload."""
    fig = Figure(figsize=(6.0, 3.6))
    ax = fig.add_subplot()
    names = [r.workload for r in rows]
    xs = range(len(rows))
    ax.bar([x - 0.2 for x in xs], [100 * r.efficiency for r in rows], width=0.4, label="efficiency")
    ax.bar([x + 0.2 for x in xs], [100 * r.attained_efficiency if r.attained_efficiency is not None else 0
                                   for r in rows], width=0.4, label="attained efficiency")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names)
    ax.set_ylabel("percent")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig
