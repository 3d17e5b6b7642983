"""Command-line interface: ``generate``, ``smooth``, ``compare``, ``bench``.

Exit codes: 0 success, 2 usage or validation error, 3 I/O failure, 4 input
parse error, 5 numeric failure.  Every output file is written to a temporary
name in its target directory and atomically renamed, so failed runs leave no
partial outputs behind.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import baseline, fitter, synth
from . import io as spectrum_io
from .basis import ManyKnotBasis
from .exceptions import (
    CannotRefineError,
    DegenerateShiftsError,
    InvalidRegionError,
    RankDeficiencyError,
    SpectrumFormatError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_NUMERIC = 5

METHOD_MANY_KNOT = "many-knot"
METHOD_LSQ = "bspline-lsq"


def _parse_region(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected START:END, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integer START:END, got {text!r}") from exc


def _parse_peak(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected CENTER:AMPLITUDE:WIDTH, got {text!r}"
        )
    try:
        center, amplitude, width = (float(part) for part in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected numeric CENTER:AMPLITUDE:WIDTH, got {text!r}"
        ) from exc
    try:
        return synth.PeakSpec(center, amplitude, width)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_levels(text):
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from exc
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty level range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected LO..HI or a comma-separated list, got {text!r}"
        ) from exc


def _atomic_write(path, writer):
    """Write via ``writer(file_object)`` to a temp file, then rename."""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    fd, tmp_name = tempfile.mkstemp(dir=parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            writer(handle)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _resolve_region(args, spectrum):
    if args.region is not None:
        start, end = args.region
        region = fitter.Region(start, end)
    else:
        region = fitter.Region.full(spectrum)
    region.require_within(spectrum)
    return region


def _smoothed_counts(spectrum, region, curve):
    channels = np.arange(region.start, region.end + 1, dtype=float)
    counts = spectrum.counts.copy()
    # Clamp at zero: the CSV format (and physics) forbids negative counts,
    # while the plot data keeps the unclamped samples.
    counts[region.start : region.end + 1] = np.maximum(curve(channels), 0.0)
    return fitter.Spectrum(spectrum.channels.copy(), counts), curve(channels)


def _cmd_generate(args):
    peaks = tuple(args.peaks) if args.peaks else synth.DEFAULT_PEAKS
    config = synth.SynthConfig(
        seed=args.seed, n_channels=args.channels, baseline=args.baseline, peaks=peaks
    )
    spectrum = synth.synthesize(config)
    truth = synth.truth_curve(config) if args.truth_out else None
    _atomic_write(args.out, lambda fh: spectrum_io.write_spectrum(spectrum, fh))
    if truth is not None:
        _atomic_write(args.truth_out, lambda fh: spectrum_io.write_spectrum(truth, fh))
    return EXIT_OK


def _single_level_report(args, record, region, elapsed):
    levels = (spectrum_io.LevelSummary(record.level, record.knot_count, record.chi_square),)
    return spectrum_io.FitReportDocument(
        method=args.method,
        basis_order=args.order if args.method == METHOD_MANY_KNOT else 3,
        region_start=region.start,
        region_end=region.end,
        levels=levels,
        selected_level=record.level,
        n_points=region.n_channels,
        timing={"fit_seconds": elapsed},
    )


def _cmd_smooth(args):
    spectrum = spectrum_io.read_spectrum(args.input)
    region = _resolve_region(args, spectrum)
    basis = ManyKnotBasis.for_order(args.order)
    started = time.perf_counter()
    if args.method == METHOD_LSQ:
        if args.level is None:
            print("error: --method bspline-lsq requires --level", file=sys.stderr)
            return EXIT_USAGE
        grid = fitter.grid_at_level(region, args.level)
        lsq = baseline.lsq_fit(spectrum, grid, region)
        elapsed = time.perf_counter() - started
        curve = lsq.curve
        report = spectrum_io.FitReportDocument(
            method=METHOD_LSQ,
            basis_order=3,
            region_start=region.start,
            region_end=region.end,
            levels=(
                spectrum_io.LevelSummary(
                    args.level, grid.knot_count, lsq.residual_chi_square
                ),
            ),
            selected_level=args.level,
            n_points=region.n_channels,
            timing={"fit_seconds": elapsed},
        )
    elif args.level is not None:
        record = fitter.smooth_at_level(spectrum, region, args.level, basis)
        elapsed = time.perf_counter() - started
        curve = record.curve
        report = _single_level_report(args, record, region, elapsed)
    else:
        result = fitter.fit(spectrum, region, basis)
        elapsed = time.perf_counter() - started
        curve = result.selected.curve
        report = spectrum_io.report_from_fit(
            result,
            METHOD_MANY_KNOT,
            args.order,
            region,
            timing={"fit_seconds": elapsed},
        )
    smoothed, raw_samples = _smoothed_counts(spectrum, region, curve)
    window = slice(region.start, region.end + 1)
    rms = float(np.sqrt(np.mean((raw_samples - spectrum.counts[window]) ** 2)))
    report = dataclasses.replace(report, rms_vs_raw=rms)

    truth = spectrum_io.read_spectrum(args.truth) if args.truth else None
    _atomic_write(args.out, lambda fh: spectrum_io.write_spectrum(smoothed, fh))
    _atomic_write(args.report, lambda fh: spectrum_io.write_fit_report(report, fh))
    if args.plot:
        _atomic_write(
            args.plot,
            lambda fh: spectrum_io.write_plot_data(
                spectrum,
                smoothed.counts,
                fh,
                truth=None if truth is None else truth.counts,
            ),
        )
    if args.svg:
        _atomic_write(
            args.svg,
            lambda fh: spectrum_io.write_plot_svg(
                spectrum,
                smoothed.counts,
                fh,
                truth=None if truth is None else truth.counts,
            ),
        )
    return EXIT_OK


def _cmd_compare(args):
    spectrum = spectrum_io.read_spectrum(args.input)
    region = _resolve_region(args, spectrum)
    basis = ManyKnotBasis.for_order(args.order)

    started = time.perf_counter()
    if args.level is not None:
        record = fitter.smooth_at_level(spectrum, region, args.level, basis)
        mks_levels = (
            spectrum_io.LevelSummary(record.level, record.knot_count, record.chi_square),
        )
        selected = record
    else:
        result = fitter.fit(spectrum, region, basis)
        mks_levels = tuple(
            spectrum_io.LevelSummary(r.level, r.knot_count, r.chi_square)
            for r in result.levels
        )
        selected = result.selected
    mks_elapsed = time.perf_counter() - started

    grid = fitter.grid_at_level(region, selected.level)
    started = time.perf_counter()
    lsq = baseline.lsq_fit(spectrum, grid, region)
    lsq_elapsed = time.perf_counter() - started

    channels = np.arange(region.start, region.end + 1, dtype=float)
    mks_samples = selected.curve(channels)
    lsq_samples = lsq.curve(channels)
    rms_difference = float(np.sqrt(np.mean((mks_samples - lsq_samples) ** 2)))

    mks_doc = spectrum_io.FitReportDocument(
        method=METHOD_MANY_KNOT,
        basis_order=args.order,
        region_start=region.start,
        region_end=region.end,
        levels=mks_levels,
        selected_level=selected.level,
        n_points=region.n_channels,
        timing={"fit_seconds": mks_elapsed},
    )
    lsq_doc = spectrum_io.FitReportDocument(
        method=METHOD_LSQ,
        basis_order=3,
        region_start=region.start,
        region_end=region.end,
        levels=(
            spectrum_io.LevelSummary(
                selected.level, grid.knot_count, lsq.residual_chi_square
            ),
        ),
        selected_level=selected.level,
        n_points=region.n_channels,
        timing={"fit_seconds": lsq_elapsed},
    )

    _atomic_write(
        args.report,
        lambda fh: spectrum_io.write_compare_report(mks_doc, lsq_doc, rms_difference, fh),
    )
    if args.mks_out:
        smoothed, _ = _smoothed_counts(spectrum, region, selected.curve)
        _atomic_write(args.mks_out, lambda fh: spectrum_io.write_spectrum(smoothed, fh))
    if args.lsq_out:
        smoothed, _ = _smoothed_counts(spectrum, region, lsq.curve)
        _atomic_write(args.lsq_out, lambda fh: spectrum_io.write_spectrum(smoothed, fh))
    return EXIT_OK


def _cmd_bench(args):
    if args.repeats < 3:
        print("error: --repeats must be at least 3", file=sys.stderr)
        return EXIT_USAGE
    if args.input:
        spectrum = spectrum_io.read_spectrum(args.input)
    else:
        if args.seed is None:
            print("error: --seed is required when no --in is given", file=sys.stderr)
            return EXIT_USAGE
        peaks = tuple(args.peaks) if args.peaks else synth.DEFAULT_PEAKS
        spectrum = synth.synthesize(
            synth.SynthConfig(
                seed=args.seed,
                n_channels=args.channels,
                baseline=args.baseline,
                peaks=peaks,
            )
        )
    region = _resolve_region(args, spectrum)
    report = baseline.bench_compare(spectrum, region, args.levels, args.repeats)
    _atomic_write(args.out, lambda fh: spectrum_io.write_bench_report(report, fh))
    if args.tsv:
        _atomic_write(args.tsv, lambda fh: spectrum_io.write_bench_tsv(report, fh))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mkspline",
        description="Many-knot spline smoothing for noisy spectroscopic data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic spectrum CSV")
    gen.add_argument("--seed", type=int, required=True, help="noise seed (required; runs are deterministic)")
    gen.add_argument("--out", required=True, help="output spectrum CSV")
    gen.add_argument("--channels", type=int, default=1024, help="number of channels")
    gen.add_argument("--baseline", type=float, default=20.0, help="flat baseline level")
    gen.add_argument(
        "--peaks",
        action="append",
        type=_parse_peak,
        metavar="CENTER:AMPLITUDE:WIDTH",
        help="Gaussian peak; repeatable (default: the stock three peaks)",
    )
    gen.add_argument("--truth-out", help="also write the noise-free spectrum CSV")
    gen.set_defaults(handler=_cmd_generate)

    smooth = sub.add_parser("smooth", help="smooth a spectrum CSV")
    smooth.add_argument("--in", dest="input", required=True, help="input spectrum CSV")
    smooth.add_argument("--out", required=True, help="smoothed spectrum CSV")
    smooth.add_argument("--report", required=True, help="fit report JSON")
    smooth.add_argument(
        "--method",
        choices=(METHOD_MANY_KNOT, METHOD_LSQ),
        default=METHOD_MANY_KNOT,
        help="smoothing method (default many-knot)",
    )
    smooth.add_argument("--region", type=_parse_region, metavar="START:END", help="inclusive channel range (default: all)")
    smooth.add_argument("--order", type=int, default=2, help="many-knot basis order (default 2)")
    smooth.add_argument(
        "--level",
        type=int,
        help="run a single grid level; required for bspline-lsq, optional for many-knot",
    )
    smooth.add_argument("--plot", metavar="TSV", help="also write per-channel plot data")
    smooth.add_argument("--svg", metavar="SVG", help="also write a standalone SVG chart")
    smooth.add_argument("--truth", help="truth spectrum CSV; adds a truth column to --plot/--svg")
    smooth.set_defaults(handler=_cmd_smooth)

    compare = sub.add_parser("compare", help="run both methods on the same grid")
    compare.add_argument("--in", dest="input", required=True, help="input spectrum CSV")
    compare.add_argument("--report", required=True, help="joint report JSON")
    compare.add_argument("--region", type=_parse_region, metavar="START:END")
    compare.add_argument("--order", type=int, default=2)
    compare.add_argument(
        "--level",
        type=int,
        help="grid level for both methods (default: the level the many-knot fit selects)",
    )
    compare.add_argument("--mks-out", help="many-knot smoothed spectrum CSV")
    compare.add_argument("--lsq-out", help="least-squares smoothed spectrum CSV")
    compare.set_defaults(handler=_cmd_compare)

    bench = sub.add_parser("bench", help="time both methods across grid levels")
    bench.add_argument("--in", dest="input", help="input spectrum CSV")
    bench.add_argument("--seed", type=int, help="synthesize the input instead (required without --in)")
    bench.add_argument("--channels", type=int, default=4096, help="channels for a synthesized input")
    bench.add_argument("--baseline", type=float, default=20.0)
    bench.add_argument(
        "--peaks", action="append", type=_parse_peak, metavar="CENTER:AMPLITUDE:WIDTH"
    )
    bench.add_argument("--region", type=_parse_region, metavar="START:END")
    bench.add_argument(
        "--levels",
        type=_parse_levels,
        default=[0, 1, 2, 3, 4],
        metavar="LO..HI",
        help="grid levels to time (default 0..4)",
    )
    bench.add_argument("--repeats", type=int, default=5, help="timings per level, median kept (min 3)")
    bench.add_argument("--out", required=True, help="bench report JSON")
    bench.add_argument("--tsv", help="also write a tab-separated timing table")
    bench.set_defaults(handler=_cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except SpectrumFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RankDeficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CannotRefineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidRegionError, DegenerateShiftsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
