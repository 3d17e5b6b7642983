"""Many-knot spline smoothing for noisy spectroscopic data.

A cardinal spline basis lets multiresolution smoothing run solve-free: knot
coefficients are windowed means of the data, curves are direct summations,
and a chi-square criterion picks the coarsest statistically acceptable knot
grid.  A cubic B-spline least-squares baseline, a deterministic synthetic
spectrum generator, CSV/JSON/plot IO and a benchmark harness round out the
package.
"""

from .basis import (
    CARDINALITY_TOL,
    DEFAULT_SHIFTS,
    SUPPORTED_ORDERS,
    ManyKnotBasis,
    SupportInterval,
    bspline_value,
    derive_coefficients,
    shifted_average,
)
from .baseline import (
    BenchEntry,
    BenchReport,
    BSplineCurve,
    LsqFit,
    bench_compare,
    design_matrix,
    loglog_slope,
    lsq_fit,
)
from .exceptions import (
    CannotRefineError,
    DegenerateShiftsError,
    InvalidRegionError,
    MalformedLineError,
    MkSplineError,
    NegativeCountError,
    NonContiguousChannelsError,
    RankDeficiencyError,
    SpectrumFormatError,
)
from .fitter import (
    FitResult,
    KnotGrid,
    LevelRecord,
    Region,
    SmoothCurve,
    Spectrum,
    chi_square,
    construct_curve,
    fit,
    grid_at_level,
    initial_grid,
    knot_averages,
    poisson_sigma,
    refine_grid,
    select_level,
    smooth_at_level,
)
from .synth import DEFAULT_PEAKS, PeakSpec, SynthConfig, default_config, synthesize, truth_curve

__version__ = "0.1.0"

__all__ = [
    "BenchEntry",
    "BenchReport",
    "BSplineCurve",
    "CannotRefineError",
    "CARDINALITY_TOL",
    "DEFAULT_PEAKS",
    "DEFAULT_SHIFTS",
    "DegenerateShiftsError",
    "FitResult",
    "InvalidRegionError",
    "KnotGrid",
    "LevelRecord",
    "LsqFit",
    "MalformedLineError",
    "ManyKnotBasis",
    "MkSplineError",
    "NegativeCountError",
    "NonContiguousChannelsError",
    "PeakSpec",
    "RankDeficiencyError",
    "Region",
    "SmoothCurve",
    "Spectrum",
    "SpectrumFormatError",
    "SupportInterval",
    "SUPPORTED_ORDERS",
    "SynthConfig",
    "bench_compare",
    "bspline_value",
    "chi_square",
    "construct_curve",
    "default_config",
    "derive_coefficients",
    "design_matrix",
    "fit",
    "grid_at_level",
    "initial_grid",
    "knot_averages",
    "loglog_slope",
    "lsq_fit",
    "poisson_sigma",
    "refine_grid",
    "select_level",
    "shifted_average",
    "smooth_at_level",
    "synthesize",
    "truth_curve",
]
