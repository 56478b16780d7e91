"""Command-line entry point.

Subcommands: count, run, measure, estimate, peak, roofline, report.

Exit codes: 0 success, 1 runtime or measurement error, 2 input or parse
error.  ``--json`` switches standard output to structured records;
``--quiet`` suppresses standard output and warnings (files given with
``--out``/``--csv``/``--out-dir`` are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__, kvfile
from .core import EfficiencyWarning, MachineSpec, load_measurement, load_spec, peak_bops, peak_flops

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


class _Output:
    def __init__(self, args):
        self.json = args.json
        self.quiet = args.quiet

    def record(self, record: dict) -> None:
        """Print a flat record as ``key=value`` lines, or JSON."""
        if self.quiet:
            return
        if self.json:
            print(json.dumps({"schema_version": kvfile.SCHEMA_VERSION, **record}, indent=2))
        else:
            for key, value in record.items():
                print(f"{key}={_text_value(value)}")

    def text(self, text: str) -> None:
        if not self.quiet:
            sys.stdout.write(text)

    def warn(self, message: str) -> None:
        if not self.quiet:
            print(f"warning: {message}", file=sys.stderr)


def _text_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value)
    return str(value)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path}: not valid UTF-8") from None


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _spec(path: str) -> MachineSpec:
    _read_text(path)
    return load_spec(path)


def _measurements(paths):
    out = []
    for path in paths:
        _read_text(path)
        out.append(load_measurement(path))
    return out


# count / run


def _parse_kernel(path: str):
    from .kernel import KernelParseError, parse

    source = _read_text(path)
    try:
        return parse(source)
    except KernelParseError as exc:
        raise InputError(exc.located(path)) from None


def cmd_count(args, out: _Output) -> int:
    from .kernel import count_static

    result = count_static(_parse_kernel(args.kernel))
    out.record({**result.tally.as_dict(), "exact": result.exact})
    if not result.exact:
        out.warn("count is inexact: unresolved loop bounds or data-dependent branches")
    return EXIT_OK


def _parse_binding(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise InputError(f"--set expects NAME=VALUE, got {text!r}")
    try:
        return name.strip(), json.loads(value)
    except json.JSONDecodeError:
        raise InputError(f"--set {name}: value {value!r} is not a number or JSON list") from None


def cmd_run(args, out: _Output) -> int:
    from .kernel import interpret

    program = _parse_kernel(args.kernel)
    inputs = {}
    if args.inputs:
        try:
            inputs.update(json.loads(_read_text(args.inputs)))
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.inputs}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    inputs.update(_parse_binding(b) for b in args.set)
    try:
        result = interpret(program, inputs, max_ops=args.max_ops)
    except ValueError as exc:  # inputs not matching declarations
        raise InputError(str(exc)) from None
    record = result.tally.as_dict()
    if out.json:
        record["state"] = result.state
    else:
        record.update({f"state.{k}": v for k, v in result.state.items()})
    out.record(record)
    return EXIT_OK


# measure


def _emit_measurement(m, args, out: _Output) -> None:
    fmt = "json" if args.json else "text"
    text = kvfile.dumps(m.to_mapping(), fmt)
    if args.out:
        _write(args.out, text)
    out.text(text)


def cmd_measure(args, out: _Output) -> int:
    from .workloads import Mode, RunConfig, Workload, measure_stream_triad, run_sort

    try:
        if args.workload == "sort":
            cfg = RunConfig(Workload.SORT, args.n, seed=args.seed, threads=args.threads, mode=Mode(args.mode))
            reference = load_measurement(args.reference) if args.reference else None
            m = run_sort(cfg, reference)
        else:
            cfg = RunConfig(Workload.STREAM_TRIAD, args.n, threads=args.threads, iterations=args.iters,
                            cache_bytes=args.cache_bytes)
            m = measure_stream_triad(cfg)
    except (ValueError, kvfile.RecordFormatError) as exc:
        raise InputError(str(exc)) from None
    _emit_measurement(m, args, out)
    return EXIT_OK


# estimate


def cmd_estimate(args, out: _Output) -> int:
    from .estimator import (CounterFormatError, EstimatorProfile, default_mapping, deviation, estimate_bops, identity_mapping,
                            load_profile, parse_counter_export, parse_mapping)

    if args.mapping == "identity":
        mapping = identity_mapping()
    elif args.mapping:
        mapping = parse_mapping(_read_text(args.mapping))
    else:
        mapping = default_mapping()
    if args.profile:
        _read_text(args.profile)
        profile = load_profile(args.profile)
    elif args.vector_width:
        profile = EstimatorProfile.for_vector_width(args.vector_width)
    else:
        profile = EstimatorProfile()
    try:
        dump = parse_counter_export(_read_text(args.counters), mapping)
    except CounterFormatError as exc:
        raise InputError(f"{args.counters}: {exc}") from None
    for w in dump.warnings:
        out.warn(w)
    try:
        est = estimate_bops(dump, profile)
    except CounterFormatError as exc:
        raise InputError(f"{args.counters}: {exc}") from None
    record = {"approximate_bops": est}
    if dump.workload:
        record["workload"] = dump.workload
    if dump.duration_s:
        record["approximate_bops_rate"] = est / dump.duration_s
    if args.reference is not None:
        dev = deviation(est, args.reference)
        record["source_level_bops"] = args.reference
        record["deviation"] = dev
        record["within_threshold"] = dev <= args.threshold
    out.record(record)
    return EXIT_OK


# peak


def cmd_peak(args, out: _Output) -> int:
    from .roofline import compute_ceiling, ridge_point

    spec = _spec(args.spec)
    record = {
        "machine": spec.name,
        "peak_bops": peak_bops(spec),
        "mem_bandwidth_peak_bytes_per_s": spec.mem_bandwidth_peak_bytes_per_s,
        "ridge_oi": ridge_point(spec),
        "ilp_ceiling": compute_ceiling(spec, ilp=True, simd=False),
        "simd_ceiling": compute_ceiling(spec, ilp=True, simd=True),
    }
    if spec.flops_per_cycle is not None:
        record["peak_flops"] = peak_flops(spec)
    out.record(record)
    return EXIT_OK


# roofline


def _model(spec, measurements, ceilings: str, prefetch_bandwidth):
    from .roofline import RooflineModel, WorkloadPoint, standard_ceilings

    names = [c for c in ceilings.split(",") if c.strip()] if ceilings else []
    try:
        cs = standard_ceilings(spec, names, prefetch_bandwidth)
        points = [WorkloadPoint.from_measurement(m) for m in measurements]
        return RooflineModel(spec, tuple(cs), tuple(points))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _classic(spec, oi_flops: float) -> dict:
    from .roofline import classic_flops_attained

    try:
        rate, side = classic_flops_attained(spec, oi_flops)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return {"flops_oi": oi_flops, "flops_attained": rate, "flops_bound": side.value}


def cmd_roofline(args, out: _Output) -> int:
    from .roofline import attained_peak, emit_csv, emit_plot

    spec = _spec(args.spec)
    model = _model(spec, _measurements(args.points), args.ceilings, args.prefetch_bandwidth)
    if args.out:
        _write(args.out, emit_plot(model, "svg"))
    if args.csv:
        _write(args.csv, emit_csv(model))
    for p in model.above_roof():
        out.warn(f"{p.name} lies above the roof at OI {p.oi:.4g}; spec and measurement disagree")
    record = {"machine": spec.name, "peak_bops": model.peak, "ridge_oi": model.ridge}
    for c in model.ceilings:
        level = c.compute_level if c.compute_level is not None else c.bandwidth_level
        record[f"ceiling.{c.name}"] = level
    for p in model.points:
        rate, side = attained_peak(spec, p.oi)
        record[f"point.{p.name}.oi"] = p.oi
        record[f"point.{p.name}.rate"] = p.rate
        record[f"point.{p.name}.attained_peak"] = rate
        record[f"point.{p.name}.bound"] = side.value
    if args.flops_oi is not None:
        record.update(_classic(spec, args.flops_oi))
    out.record(record)
    return EXIT_OK


# report


def cmd_report(args, out: _Output) -> int:
    from .core import UndefinedIntensityError
    from .plotting import efficiency_figure, svg_bytes
    from .report import build_report, recompute_mismatches, render_text, to_csv, to_json
    from .roofline import emit_csv, emit_plot

    spec = _spec(args.spec)
    measurements = _measurements(args.measurements)
    try:
        bundle = build_report(spec, measurements, ceiling=args.ceiling, require_oi=args.require_oi)
    except UndefinedIntensityError as exc:
        raise InputError(str(exc)) from None
    bad = recompute_mismatches(bundle)
    if bad:
        raise RuntimeError(f"derived values do not recompute: {', '.join(bad)}")
    if args.out_dir:
        d = Path(args.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        _write(d / "report.json", to_json(bundle))
        _write(d / "report.csv", to_csv(bundle))
        _write(d / "report.txt", render_text(bundle))
        _write(d / "efficiency.svg", svg_bytes(efficiency_figure(bundle.rows)))
        with_oi = [m for m in measurements if m.bytes_accessed > 0]
        model = _model(spec, with_oi, args.ceilings, args.prefetch_bandwidth)
        _write(d / "roofline.svg", emit_plot(model, "svg"))
        _write(d / "roofline.csv", emit_csv(model))
    if out.json:
        out.text(to_json(bundle))
    else:
        out.text(render_text(bundle))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="structured JSON on standard output")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="no standard output, no warnings")

    parser = argparse.ArgumentParser(prog="bops", description="BOPS metric toolkit and DC-Roofline model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--json", action="store_true", help="structured JSON on standard output")
    parser.add_argument("--quiet", action="store_true", help="no standard output, no warnings")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("count", parents=[common], help="static BOPs count of a kernel file")
    p.add_argument("kernel")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("run", parents=[common], help="interpret a kernel file and count dynamically")
    p.add_argument("kernel")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                   help="bind an input scalar (or array as JSON list); repeatable")
    p.add_argument("--inputs", help="JSON object of input bindings")
    p.add_argument("--max-ops", type=int, default=10**9, help="operation budget (default 1e9)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("measure", parents=[common], help="run an instrumented workload")
    msub = p.add_subparsers(dest="workload", required=True, metavar="WORKLOAD")
    s = msub.add_parser("sort", parents=[common], help="threaded quicksort + merge")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--mode", choices=("counting", "timing"), default="counting")
    s.add_argument("--reference", help="counting-mode record supplying the tally for a timing run")
    s.add_argument("--out", help="also write the Measurement record here")
    s.set_defaults(func=cmd_measure)
    s = msub.add_parser("stream", parents=[common], help="Stream-triad bandwidth probe")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--iters", type=int, default=10)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--cache-bytes", type=int,
                   help="last-level cache size; arrays must exceed 4x this (checked when given)")
    s.add_argument("--out", help="also write the Measurement record here")
    s.set_defaults(func=cmd_measure)

    p = sub.add_parser("estimate", parents=[common], help="approximate BOPs from counter exports")
    p.add_argument("--counters", required=True)
    p.add_argument("--mapping", help="event mapping file, or 'identity' (default: shipped Westmere map)")
    p.add_argument("--profile", help="estimator profile record")
    p.add_argument("--vector-width", type=int, help="packed unit width in bits (sets multipliers to width/64)")
    p.add_argument("--reference", type=float, help="source-level BOPs to compute the deviation against")
    p.add_argument("--threshold", type=float, default=0.08, help="acceptable deviation (default 0.08)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("peak", parents=[common], help="peak BOPS, ridge point and ceilings of a spec")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_peak)

    for name, func, helptext in (("roofline", cmd_roofline, "DC-Roofline model, plot and CSV"),
                                 ("report", cmd_report, "efficiency report for measurements")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--spec", required=True)
        p.add_argument("--ceilings", default="ilp,simd", help="comma list of ilp, simd, prefetch")
        p.add_argument("--prefetch-bandwidth", type=float, help="bytes/s with hardware prefetching off")
        p.set_defaults(func=func)
    roofline_p, report_p = sub.choices["roofline"], sub.choices["report"]
    roofline_p.add_argument("--points", nargs="*", default=[], help="measurement records to plot")
    roofline_p.add_argument("--out", help="SVG output path")
    roofline_p.add_argument("--csv", help="CSV output path")
    roofline_p.add_argument("--flops-oi", type=float, help="also evaluate the classic FLOPS roofline at this OI")
    report_p.add_argument("--measurements", nargs="+", required=True)
    report_p.add_argument("--ceiling", choices=("ilp", "simd", "none"), default="ilp",
                          help="compute ceiling for the ceiling-efficiency row")
    report_p.add_argument("--require-oi", action="store_true",
                          help="fail when a measurement has no bytes_accessed")
    report_p.add_argument("--out-dir", help="write report.json/csv/txt and SVG figures here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    out = _Output(args)
    from .estimator import CounterFormatError
    from .kernel import KernelRuntimeError
    from .workloads import SortVerificationError

    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore", EfficiencyWarning)
        try:
            return args.func(args, out)
        except (InputError, ValueError, CounterFormatError) as exc:
            print(f"bops {args.command}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except KernelRuntimeError as exc:
            print(f"bops {args.command}: {exc.located(args.kernel)}", file=sys.stderr)
            return EXIT_RUNTIME
        except (SortVerificationError, RuntimeError, MemoryError, OSError, OverflowError) as exc:
            print(f"bops {args.command}: {exc}", file=sys.stderr)
            return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
