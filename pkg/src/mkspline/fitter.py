"""Multiresolution spectrum smoothing with a cardinal spline basis.

The pipeline places five equally spaced knots across the region of interest,
assigns each knot the mean of the counts within half a spacing, and sums the
knots' scaled basis functions — cardinality makes the curve pass through the
knot values, so no system is solved at any level.  Midpoint knots are then
inserted (halving the spacing) until the spacing reaches one channel, and a
chi-square is recorded per level.  The selected level is the coarsest whose
chi-square does not exceed the number of fitted channels — the smoothest
curve still statistically consistent with counting noise — falling back to
the finest level when none qualifies.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import _kernels
from .basis import ManyKnotBasis
from .exceptions import CannotRefineError, InvalidRegionError

#: Knots in the level-0 grid.
INITIAL_KNOTS = 5

#: Refinement stops once the knot spacing is at or below one channel.
MIN_SPACING = 1.0


@dataclasses.dataclass(eq=False)
class Spectrum:
    """A spectrum as ordered channel/count pairs.

    Channels are 0-based, contiguous integers; counts are nonnegative reals
    (raw data are integers, smoothed curves are not).  At least five channels
    are required — fewer cannot hold the initial knot grid.
    """

    channels: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        channels = np.ascontiguousarray(np.asarray(self.channels, dtype=np.int64))
        counts = np.ascontiguousarray(np.asarray(self.counts, dtype=float))
        if channels.ndim != 1 or counts.ndim != 1:
            raise ValueError("channels and counts must be one-dimensional")
        if channels.shape[0] != counts.shape[0]:
            raise ValueError(
                f"length mismatch: {channels.shape[0]} channels vs "
                f"{counts.shape[0]} counts"
            )
        n = channels.shape[0]
        if n < INITIAL_KNOTS:
            raise ValueError(f"a spectrum needs at least {INITIAL_KNOTS} channels, got {n}")
        if not np.array_equal(channels, np.arange(n, dtype=np.int64)):
            raise ValueError("channels must be the contiguous run 0..n-1")
        if not np.all(np.isfinite(counts)):
            raise ValueError("counts must be finite")
        if np.any(counts < 0.0):
            raise ValueError("counts must be nonnegative")
        self.channels = channels
        self.counts = counts

    @classmethod
    def from_counts(cls, counts):
        counts = np.asarray(counts, dtype=float)
        return cls(np.arange(counts.shape[0], dtype=np.int64), counts)

    def __len__(self):
        return self.channels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return np.array_equal(self.channels, other.channels) and np.array_equal(
            self.counts, other.counts
        )


@dataclasses.dataclass(frozen=True)
class Region:
    """Inclusive channel range ``[start, end]`` to smooth.

    Must span at least four channels so the initial five-knot grid fits at
    unit spacing or wider.
    """

    start: int
    end: int

    def __post_init__(self):
        for name in ("start", "end"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidRegionError(f"region {name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.start < 0:
            raise InvalidRegionError(f"region start must be nonnegative, got {self.start}")
        if self.end <= self.start:
            raise InvalidRegionError(
                f"region end must exceed start, got [{self.start}, {self.end}]"
            )
        if self.length < INITIAL_KNOTS - 1:
            raise InvalidRegionError(
                f"region [{self.start}, {self.end}] is too short: {INITIAL_KNOTS} "
                f"knots need a span of at least {INITIAL_KNOTS - 1} channels"
            )

    @property
    def length(self):
        return self.end - self.start

    @property
    def n_channels(self):
        return self.end - self.start + 1

    @classmethod
    def full(cls, spectrum):
        return cls(0, len(spectrum) - 1)

    def require_within(self, spectrum):
        if self.end > len(spectrum) - 1:
            raise InvalidRegionError(
                f"region [{self.start}, {self.end}] exceeds the last channel "
                f"{len(spectrum) - 1}"
            )


@dataclasses.dataclass(frozen=True, eq=False)
class KnotGrid:
    """Equally spaced knots spanning a region at one refinement level.

    Level ``m`` has ``4 * 2**m + 1`` knots; the first and last sit exactly on
    the region edges.
    """

    level: int
    positions: np.ndarray
    spacing: float

    def __post_init__(self):
        if isinstance(self.level, bool) or not isinstance(self.level, (int, np.integer)):
            raise ValueError(f"grid level must be an integer, got {self.level!r}")
        level = int(self.level)
        if level < 0:
            raise ValueError(f"grid level must be nonnegative, got {level}")
        positions = np.ascontiguousarray(np.asarray(self.positions, dtype=float))
        expected = 4 * 2**level + 1
        if positions.shape != (expected,):
            raise ValueError(
                f"level {level} must have {expected} knots, got {positions.shape[0]}"
            )
        spacing = float(self.spacing)
        if not spacing > 0.0:
            raise ValueError(f"knot spacing must be positive, got {spacing}")
        if np.max(np.abs(np.diff(positions) - spacing)) > 1e-9:
            raise ValueError("knot positions must be equally spaced by the stated spacing")
        positions.setflags(write=False)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "spacing", spacing)

    @property
    def knot_count(self):
        return self.positions.shape[0]


def grid_at_level(region, level):
    """Directly construct the knot grid of the given refinement level."""
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise ValueError(f"grid level must be an integer, got {level!r}")
    level = int(level)
    if level < 0:
        raise ValueError(f"grid level must be nonnegative, got {level}")
    intervals = 4 * 2**level
    spacing = region.length / intervals
    positions = region.start + spacing * np.arange(intervals + 1)
    return KnotGrid(level, positions, spacing)


def initial_grid(region):
    """The level-0 grid: five knots, spacing one quarter of the region."""
    return grid_at_level(region, 0)


def refine_grid(grid):
    """Insert a midpoint between every pair of adjacent knots.

    Permitted only while the spacing exceeds one channel; the refined grid
    may land below unit spacing, in which case it is the terminal level.
    """
    if grid.spacing <= MIN_SPACING:
        raise CannotRefineError(
            f"grid spacing {grid.spacing} is already at or below {MIN_SPACING}"
        )
    level = grid.level + 1
    intervals = 4 * 2**level
    spacing = grid.spacing / 2.0
    positions = grid.positions[0] + spacing * np.arange(intervals + 1)
    return KnotGrid(level, positions, spacing)


def _require_grid_in_region(grid, region):
    if grid.positions[0] < region.start or grid.positions[-1] > region.end:
        raise ValueError(
            f"grid spanning [{grid.positions[0]}, {grid.positions[-1]}] lies "
            f"outside region [{region.start}, {region.end}]"
        )


def knot_averages(spectrum, grid, region):
    """Mean counts around each knot: channels with ``|c - p| <= spacing/2``.

    Windows are clipped to the region; at unit spacing with integer knots
    each window reduces to the single coincident channel.  A window holding
    no integer channel (possible below unit spacing) falls back to the
    nearest in-region channel.
    """
    region.require_within(spectrum)
    _require_grid_in_region(grid, region)
    return _kernels.window_means(
        spectrum.counts,
        region.start,
        region.end,
        grid.positions,
        grid.spacing / 2.0,
    )


@dataclasses.dataclass(eq=False)
class SmoothCurve:
    """Curve built by summing every knot's scaled, shifted basis function.

    Two ghost knots carrying the nearest interior value are appended beyond
    each region edge so that constants survive to the boundary.  Cardinality
    of the basis makes the curve interpolate the knot values.
    """

    grid: KnotGrid
    knot_values: np.ndarray
    basis: ManyKnotBasis
    region: Region

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.knot_values, dtype=float))
        if values.shape != self.grid.positions.shape:
            raise ValueError(
                f"expected {self.grid.knot_count} knot values, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("knot values must be finite")
        self.knot_values = values
        h = self.grid.spacing
        p = self.grid.positions
        m = p.shape[0]
        ext_p = np.empty(m + 4)
        ext_p[0] = p[0] - 2.0 * h
        ext_p[1] = p[0] - h
        ext_p[2:-2] = p
        ext_p[-2] = p[-1] + h
        ext_p[-1] = p[-1] + 2.0 * h
        ext_v = np.empty(m + 4)
        ext_v[0] = values[0]
        ext_v[1] = values[0]
        ext_v[2:-2] = values
        ext_v[-2] = values[-1]
        ext_v[-1] = values[-1]
        self._ext_positions = ext_p
        self._ext_values = ext_v

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        flat = np.ascontiguousarray(np.atleast_1d(arr))
        out = _kernels.curve_eval(
            flat,
            self._ext_positions,
            self._ext_values,
            self.grid.spacing,
            self.basis.order,
            self.basis.shifts,
            self.basis.coeffs,
        )
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)


def construct_curve(grid, values, basis, region):
    """Assemble the smooth curve for one level from its knot values."""
    _require_grid_in_region(grid, region)
    return SmoothCurve(grid, values, basis, region)


def poisson_sigma(counts):
    """Counting-noise scale per channel: ``sqrt(max(count, 1))``."""
    return np.sqrt(np.maximum(np.asarray(counts, dtype=float), 1.0))


def chi_square(spectrum, curve, region):
    """Sum of squared residuals weighted by the counting-noise sigma.

    Computed as ``(y - s)**2 / max(y, 1)``, dividing by the variance rather
    than squaring a ratio against :func:`poisson_sigma`; the two forms agree
    and this one skips the square root.
    """
    region.require_within(spectrum)
    channels = np.arange(region.start, region.end + 1, dtype=float)
    y = spectrum.counts[region.start : region.end + 1]
    fitted = np.asarray(curve(channels), dtype=float)
    resid = y - fitted
    return float(resid @ (resid / np.maximum(y, 1.0)))


@dataclasses.dataclass(frozen=True, eq=False)
class LevelRecord:
    """One refinement level: its grid size, goodness of fit and curve."""

    level: int
    knot_count: int
    chi_square: float
    curve: SmoothCurve


@dataclasses.dataclass(frozen=True, eq=False)
class FitResult:
    """All computed levels plus the selected one."""

    levels: tuple
    selected_level: int
    n_points: int
    criterion_threshold: float

    @property
    def selected(self):
        for record in self.levels:
            if record.level == self.selected_level:
                return record
        raise LookupError(f"no record for level {self.selected_level}")


def select_level(level_chi_pairs, threshold):
    """Pick the coarsest level whose chi-square is within the threshold.

    ``level_chi_pairs`` is an iterable of ``(level, chi_square)``.  When no
    level qualifies the finest one is returned.
    """
    pairs = [(int(level), float(chi)) for level, chi in level_chi_pairs]
    if not pairs:
        raise ValueError("no levels to select from")
    eligible = [level for level, chi in pairs if chi <= threshold]
    if eligible:
        return min(eligible)
    return max(level for level, _ in pairs)


def _level_record(spectrum, region, grid, basis):
    values = knot_averages(spectrum, grid, region)
    curve = construct_curve(grid, values, basis, region)
    return LevelRecord(grid.level, grid.knot_count, chi_square(spectrum, curve, region), curve)


def smooth_at_level(spectrum, region, level, basis=None):
    """Single-level smoothing: averages, curve and chi-square at one grid."""
    region.require_within(spectrum)
    if basis is None:
        basis = ManyKnotBasis.quadric()
    return _level_record(spectrum, region, grid_at_level(region, level), basis)


def fit(spectrum, region=None, basis=None, stop_when_satisfied=False):
    """Run the full multiresolution pipeline over a region.

    Every refinement level is computed (set ``stop_when_satisfied`` to stop
    at the first level meeting the selection criterion), then the coarsest
    level with ``chi_square <= n_points`` is selected, the finest when none
    qualifies.

    Parameters
    ----------
    spectrum : Spectrum
    region : Region, optional
        Defaults to the whole spectrum.
    basis : ManyKnotBasis, optional
        Defaults to the canonical quadratic basis.
    stop_when_satisfied : bool
        Stop refining once a level meets the criterion instead of computing
        the full ladder.  Off by default; the selection is identical either
        way whenever it triggers.

    Returns
    -------
    FitResult
    """
    if region is None:
        region = Region.full(spectrum)
    region.require_within(spectrum)
    if basis is None:
        basis = ManyKnotBasis.quadric()
    n_points = region.n_channels
    records = []
    grid = initial_grid(region)
    while True:
        record = _level_record(spectrum, region, grid, basis)
        records.append(record)
        if stop_when_satisfied and record.chi_square <= n_points:
            break
        if grid.spacing <= MIN_SPACING:
            break
        grid = refine_grid(grid)
    selected = select_level(
        [(record.level, record.chi_square) for record in records], float(n_points)
    )
    return FitResult(tuple(records), selected, n_points, float(n_points))
