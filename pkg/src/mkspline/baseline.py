"""Cubic B-spline least-squares baseline and the runtime comparison harness.

The baseline fits, on the same knot grids the multiresolution smoother uses,
a cubic B-spline curve by unweighted linear least squares.  The normal
equations are assembled densely and solved by an in-repo Cholesky
factorization, deliberately honest rather than maximally optimized, so the
cost comparison against solve-free many-knot construction stays meaningful:
the baseline's cost grows superlinearly with knot count while single-level
many-knot construction grows linearly.
"""

from __future__ import annotations

import dataclasses
import gc
import platform
import time

import numpy as np

from . import _kernels
from .basis import ManyKnotBasis
from .exceptions import MkSplineError, RankDeficiencyError
from .fitter import (
    _require_grid_in_region,
    chi_square,
    construct_curve,
    grid_at_level,
    knot_averages,
)

_CUBIC_SHIFTS = np.zeros(1)
_CUBIC_COEFFS = np.ones(1)


def _extended_positions(grid):
    # One ghost knot per side: a cubic basis two spacings out is identically
    # zero on the region, so further ghosts would add all-zero columns.
    p = grid.positions
    h = grid.spacing
    ext = np.empty(p.shape[0] + 2)
    ext[0] = p[0] - h
    ext[1:-1] = p
    ext[-1] = p[-1] + h
    return ext


def design_matrix(spectrum, grid, region):
    """Dense design matrix of scaled cubic B-spline values.

    One row per channel in the region, one column per knot of the grid
    extended by one ghost knot beyond each edge.  Entries are exactly zero
    outside a basis function's support, and each row sums to one (partition
    of unity).
    """
    region.require_within(spectrum)
    _require_grid_in_region(grid, region)
    xs = np.arange(region.start, region.end + 1, dtype=float)
    return _kernels.cubic_design(xs, _extended_positions(grid), grid.spacing)


@dataclasses.dataclass(eq=False)
class BSplineCurve:
    """Evaluable cubic B-spline combination on an extended knot grid."""

    positions: np.ndarray
    spacing: float
    coefficients: np.ndarray

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        flat = np.ascontiguousarray(np.atleast_1d(arr))
        out = _kernels.curve_eval(
            flat,
            self.positions,
            self.coefficients,
            self.spacing,
            3,
            _CUBIC_SHIFTS,
            _CUBIC_COEFFS,
        )
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)


@dataclasses.dataclass(eq=False)
class LsqFit:
    """Least-squares result: coefficients, evaluable curve and chi-square."""

    grid: object
    coefficients: np.ndarray
    curve: BSplineCurve
    residual_chi_square: float


def lsq_fit(spectrum, grid, region):
    """Fit a cubic B-spline to the region by unweighted least squares.

    Raises
    ------
    RankDeficiencyError
        When the region holds fewer channels than there are coefficients, or
        the normal matrix is otherwise rank deficient — too many knots for
        the data.
    """
    region.require_within(spectrum)
    _require_grid_in_region(grid, region)
    positions = _extended_positions(grid)
    n = region.n_channels
    m = positions.shape[0]
    if n < m:
        raise RankDeficiencyError(
            f"{n} channels cannot determine {m} coefficients; use fewer knots"
        )
    y = spectrum.counts[region.start : region.end + 1]
    coefficients, chi, ok = _kernels.lsq_solve(
        float(region.start), n, positions, grid.spacing, y
    )
    if not ok:
        raise RankDeficiencyError("normal matrix is rank deficient; use fewer knots")
    curve = BSplineCurve(positions, grid.spacing, coefficients)
    return LsqFit(grid, coefficients, curve, float(chi))


@dataclasses.dataclass(frozen=True)
class BenchEntry:
    """Timed comparison at one grid level; ``error`` marks a failed entry."""

    level: int
    knot_count: int
    mks_time_seconds: float | None
    lsq_time_seconds: float | None
    mks_chi_square: float | None
    lsq_chi_square: float | None
    error: str | None = None


@dataclasses.dataclass(frozen=True)
class BenchReport:
    """Per-level timing entries plus a note describing the setup."""

    entries: tuple
    environment_note: str


def environment_note():
    return (
        "baseline: fixed-knot linear least-squares cubic B-spline, dense normal "
        "equations with in-repo Cholesky; single-threaded wall-clock medians; "
        f"kernel backend={_kernels.BACKEND}; python {platform.python_version()}; "
        f"numpy {np.__version__}; {platform.platform()}"
    )


def bench_compare(spectrum, region, levels, repeats, basis=None):
    """Time single-level many-knot construction against lsq on each grid.

    Both methods run strictly sequentially in one thread; per level the
    median of ``repeats`` wall-clock timings is recorded (``repeats`` must be
    at least 3).  The timed many-knot operation is the single-level pipeline
    on a prebuilt grid (knot averages, curve construction, chi-square); the
    timed baseline operation is :func:`lsq_fit` on the same grid.  Each
    level first runs once untimed, which builds its grid, warms every code
    path and records the chi-square columns; the timed repeats then run back
    to back, and the median shrugs off stray scheduler hiccups.  Cycle
    collection is paused while timing (as ``timeit`` does) so a collection
    cannot land inside a sample.  Chi-squares make reruns comparable:
    timings vary, the chi-square columns do not.  A level that fails
    (e.g. rank deficiency) is recorded as a failed entry without aborting
    the rest.
    """
    if repeats < 3:
        raise ValueError(f"repeats must be at least 3, got {repeats}")
    region.require_within(spectrum)
    if basis is None:
        basis = ManyKnotBasis.quadric()
    level_list = sorted({int(level) for level in levels})
    if not level_list:
        raise ValueError("no levels to benchmark")
    if level_list[0] < 0:
        raise ValueError(f"levels must be nonnegative, got {level_list[0]}")
    _kernels.warm_up()
    entries = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for level in level_list:
            knot_count = 4 * 2**level + 1
            try:
                grid = grid_at_level(region, level)
                values = knot_averages(spectrum, grid, region)
                curve = construct_curve(grid, values, basis, region)
                mks_chi = chi_square(spectrum, curve, region)
                lsq = lsq_fit(spectrum, grid, region)
            except MkSplineError as exc:
                entries.append(
                    BenchEntry(level, knot_count, None, None, None, None, str(exc))
                )
                continue
            mks_samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                values = knot_averages(spectrum, grid, region)
                curve = construct_curve(grid, values, basis, region)
                chi_square(spectrum, curve, region)
                mks_samples.append(time.perf_counter() - t0)
            lsq_samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                lsq_fit(spectrum, grid, region)
                lsq_samples.append(time.perf_counter() - t0)
            entries.append(
                BenchEntry(
                    level,
                    knot_count,
                    float(np.median(mks_samples)),
                    float(np.median(lsq_samples)),
                    mks_chi,
                    lsq.residual_chi_square,
                )
            )
    finally:
        if gc_was_enabled:
            gc.enable()
    return BenchReport(tuple(entries), environment_note())


def loglog_slope(knot_counts, times, min_time=1e-4):
    """Least-squares slope of log(time) against log(knot count).

    Entries faster than ``min_time`` seconds are dropped: they sit at the
    resolution floor of the clock and flatten the fit.
    """
    knots = np.asarray(knot_counts, dtype=float)
    times = np.asarray(times, dtype=float)
    if knots.shape != times.shape:
        raise ValueError("knot_counts and times must have the same length")
    mask = times >= min_time
    if int(mask.sum()) < 2:
        raise ValueError("need at least two timing points above the threshold")
    return float(np.polyfit(np.log(knots[mask]), np.log(times[mask]), 1)[0])
