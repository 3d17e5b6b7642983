"""Readers and writers for spectra, fit reports, bench reports and plots.

Stable formats:

* Spectrum CSV — first line exactly ``channel,count``, then one
  ``<integer>,<decimal>`` row per channel.  UTF-8; written with LF line
  endings, CRLF accepted on input.  No comments, no missing rows.  Counts
  are stored as reals with full round-trip precision, so smoothed curves
  sampled per channel share the format.  Parsers reject, never repair.
* Fit report — one JSON object (see :class:`FitReportDocument`); optional
  fields are omitted, not null-filled, and chi-squares keep at least 12
  significant digits.
* Bench report — one JSON object with an environment note and per-level
  entries; a tab-separated companion table is available for plotting.
* Plot data — tab-separated ``channel  raw  smooth`` (plus ``truth`` when
  available) with a single header line, and optionally a standalone SVG
  line chart.
"""

from __future__ import annotations

import dataclasses
import json
import re
from pathlib import Path

import numpy as np

from .baseline import BenchEntry, BenchReport
from .exceptions import (
    MalformedLineError,
    NegativeCountError,
    NonContiguousChannelsError,
    SpectrumFormatError,
)
from .fitter import Spectrum

SPECTRUM_HEADER = "channel,count"

_CHANNEL_RE = re.compile(r"^[0-9]+$")
_COUNT_RE = re.compile(r"^-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?$")


# ---------------------------------------------------------------------------
# shared plumbing


def _read_text(source):
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _write_text(sink, payload):
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(payload, encoding="utf-8", newline="")
        return
    try:
        sink.write(payload)
    except TypeError:
        sink.write(payload.encode("utf-8"))


def _format_count(value):
    return repr(float(value))


# ---------------------------------------------------------------------------
# spectrum CSV


def read_spectrum(source):
    """Parse a spectrum CSV; every defect is rejected with its line number."""
    text = _read_text(source)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [line[:-1] if line.endswith("\r") else line for line in lines]
    if not lines:
        raise MalformedLineError(f"empty input, expected header {SPECTRUM_HEADER!r}", line=1)
    if lines[0] != SPECTRUM_HEADER:
        raise MalformedLineError(
            f"expected header {SPECTRUM_HEADER!r}, got {lines[0]!r}", line=1
        )
    channels = []
    counts = []
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split(",")
        if len(parts) != 2:
            raise MalformedLineError(f"expected '<channel>,<count>', got {raw!r}", line=lineno)
        if not _CHANNEL_RE.match(parts[0]):
            raise MalformedLineError(f"bad channel {parts[0]!r}", line=lineno)
        if not _COUNT_RE.match(parts[1]):
            raise MalformedLineError(f"bad count {parts[1]!r}", line=lineno)
        channel = int(parts[0])
        count = float(parts[1])
        if count < 0.0:
            raise NegativeCountError(f"negative count {parts[1]}", line=lineno)
        expected = channels[-1] + 1 if channels else 0
        if channel != expected:
            raise NonContiguousChannelsError(
                f"expected channel {expected}, got {channel}", line=lineno
            )
        channels.append(channel)
        counts.append(count)
    if len(channels) < 5:
        raise SpectrumFormatError(f"a spectrum needs at least 5 channels, got {len(channels)}")
    return Spectrum(np.array(channels, dtype=np.int64), np.array(counts))


def write_spectrum(spectrum, sink):
    """Write a spectrum CSV with LF endings and round-trip precision."""
    rows = [SPECTRUM_HEADER]
    for channel, count in zip(spectrum.channels, spectrum.counts):
        rows.append(f"{int(channel)},{_format_count(count)}")
    _write_text(sink, "\n".join(rows) + "\n")


# ---------------------------------------------------------------------------
# fit report


@dataclasses.dataclass(frozen=True)
class LevelSummary:
    """Serializable summary of one refinement level."""

    level: int
    knot_count: int
    chi_square: float


@dataclasses.dataclass(frozen=True)
class FitReportDocument:
    """The structured result of one smoothing run.

    ``rms_vs_raw`` and ``timing`` are optional and omitted from the
    serialized form when absent.
    """

    method: str
    basis_order: int
    region_start: int
    region_end: int
    levels: tuple
    selected_level: int
    n_points: int
    rms_vs_raw: float | None = None
    timing: dict | None = None

    def to_dict(self):
        doc = {
            "method": self.method,
            "basis_order": self.basis_order,
            "region": {"start": self.region_start, "end": self.region_end},
            "levels": [
                {
                    "level": entry.level,
                    "knot_count": entry.knot_count,
                    "chi_square": entry.chi_square,
                }
                for entry in self.levels
            ],
            "selected_level": self.selected_level,
            "n_points": self.n_points,
        }
        if self.rms_vs_raw is not None:
            doc["rms_vs_raw"] = self.rms_vs_raw
        if self.timing is not None:
            doc["timing"] = dict(self.timing)
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            levels = tuple(
                LevelSummary(
                    int(entry["level"]),
                    int(entry["knot_count"]),
                    float(entry["chi_square"]),
                )
                for entry in doc["levels"]
            )
            return cls(
                method=str(doc["method"]),
                basis_order=int(doc["basis_order"]),
                region_start=int(doc["region"]["start"]),
                region_end=int(doc["region"]["end"]),
                levels=levels,
                selected_level=int(doc["selected_level"]),
                n_points=int(doc["n_points"]),
                rms_vs_raw=float(doc["rms_vs_raw"]) if "rms_vs_raw" in doc else None,
                timing=dict(doc["timing"]) if "timing" in doc else None,
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"invalid fit report: {exc}") from exc


def report_from_fit(result, method, basis_order, region, rms_vs_raw=None, timing=None):
    """Build the serializable report for a multiresolution fit result."""
    levels = tuple(
        LevelSummary(record.level, record.knot_count, record.chi_square)
        for record in result.levels
    )
    return FitReportDocument(
        method=method,
        basis_order=basis_order,
        region_start=region.start,
        region_end=region.end,
        levels=levels,
        selected_level=result.selected_level,
        n_points=result.n_points,
        rms_vs_raw=rms_vs_raw,
        timing=timing,
    )


def write_fit_report(document, sink):
    # json serializes floats via repr: 17 significant digits, parses back
    # to the identical value.
    _write_text(sink, json.dumps(document.to_dict(), indent=2) + "\n")


def read_fit_report(source):
    try:
        doc = json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid fit report: {exc}") from exc
    return FitReportDocument.from_dict(doc)


def write_compare_report(mks_document, lsq_document, rms_difference, sink):
    """Joint report for a two-method run on the same region and grid."""
    doc = {
        "many_knot": mks_document.to_dict(),
        "bspline_lsq": lsq_document.to_dict(),
        "rms_difference": float(rms_difference),
    }
    _write_text(sink, json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# bench report


def write_bench_report(report, sink):
    doc = {
        "environment_note": report.environment_note,
        "entries": [dataclasses.asdict(entry) for entry in report.entries],
    }
    _write_text(sink, json.dumps(doc, indent=2) + "\n")


def read_bench_report(source):
    try:
        doc = json.loads(_read_text(source))
        entries = tuple(BenchEntry(**entry) for entry in doc["entries"])
        return BenchReport(entries, str(doc["environment_note"]))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"invalid bench report: {exc}") from exc


def write_bench_tsv(report, sink):
    """Tab-separated timing table (failed entries are skipped)."""
    rows = ["knot_count\tmks_time_seconds\tlsq_time_seconds"]
    for entry in report.entries:
        if entry.error is not None:
            continue
        rows.append(
            f"{entry.knot_count}\t{entry.mks_time_seconds!r}\t{entry.lsq_time_seconds!r}"
        )
    _write_text(sink, "\n".join(rows) + "\n")


# ---------------------------------------------------------------------------
# plot data


def write_plot_data(spectrum, smooth, sink, truth=None):
    """Tab-separated per-channel columns: channel, raw, smooth[, truth]."""
    smooth = np.asarray(smooth, dtype=float)
    if smooth.shape != spectrum.counts.shape:
        raise ValueError(
            f"smooth column length {smooth.shape[0]} does not match "
            f"{len(spectrum)} channels"
        )
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        if truth.shape != spectrum.counts.shape:
            raise ValueError(
                f"truth column length {truth.shape[0]} does not match "
                f"{len(spectrum)} channels"
            )
    header = "channel\traw\tsmooth" + ("\ttruth" if truth is not None else "")
    rows = [header]
    for i, channel in enumerate(spectrum.channels):
        row = f"{int(channel)}\t{_format_count(spectrum.counts[i])}\t{_format_count(smooth[i])}"
        if truth is not None:
            row += f"\t{_format_count(truth[i])}"
        rows.append(row)
    _write_text(sink, "\n".join(rows) + "\n")


def write_plot_svg(spectrum, smooth, sink, truth=None):
    """Standalone SVG line chart of raw, smoothed and optional truth curves."""
    from matplotlib.figure import Figure

    smooth = np.asarray(smooth, dtype=float)
    if smooth.shape != spectrum.counts.shape:
        raise ValueError("smooth column length does not match the spectrum")
    fig = Figure(figsize=(9.0, 5.0))
    ax = fig.subplots()
    ax.plot(spectrum.channels, spectrum.counts, color="0.65", lw=0.7, label="raw")
    if truth is not None:
        ax.plot(spectrum.channels, np.asarray(truth, dtype=float), "k--", lw=1.0, label="truth")
    ax.plot(spectrum.channels, smooth, color="tab:red", lw=1.4, label="smooth")
    ax.set_xlabel("channel")
    ax.set_ylabel("counts")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(sink, format="svg")
