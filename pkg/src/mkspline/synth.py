"""Deterministic synthetic spectra: Gaussian peaks on a flat baseline.

Noise follows the counting statistics of the truth curve: each channel gets
a standard normal deviate scaled by the square root of the noise-free value,
is rounded to the nearest integer and clamped at zero.  The deviates come
from numpy's PCG64 generator (``numpy.random.default_rng``) seeded with the
config seed — the generator is part of the output contract and must not be
swapped silently, or every stored golden spectrum changes.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .fitter import INITIAL_KNOTS, Spectrum


@dataclasses.dataclass(frozen=True)
class PeakSpec:
    """One Gaussian peak: ``amplitude * exp(-(c - center)^2 / (2 width^2))``."""

    center: float
    amplitude: float
    width: float

    def __post_init__(self):
        for name in ("center", "amplitude", "width"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"peak {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.amplitude <= 0.0:
            raise ValueError(f"peak amplitude must be positive, got {self.amplitude}")
        if self.width <= 0.0:
            raise ValueError(f"peak width must be positive, got {self.width}")


DEFAULT_PEAKS = (
    PeakSpec(200.0, 400.0, 8.0),
    PeakSpec(512.0, 900.0, 12.0),
    PeakSpec(800.0, 250.0, 6.0),
)


@dataclasses.dataclass(frozen=True)
class SynthConfig:
    """Recipe for one synthetic spectrum.

    The truth curve depends only on ``n_channels``, ``baseline`` and
    ``peaks``; the seed enters through the noise alone.
    """

    seed: int
    n_channels: int = 1024
    baseline: float = 20.0
    peaks: tuple = DEFAULT_PEAKS

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if isinstance(self.n_channels, bool) or not isinstance(
            self.n_channels, (int, np.integer)
        ):
            raise ValueError(f"n_channels must be an integer, got {self.n_channels!r}")
        object.__setattr__(self, "n_channels", int(self.n_channels))
        if self.n_channels < INITIAL_KNOTS:
            raise ValueError(
                f"n_channels must be at least {INITIAL_KNOTS}, got {self.n_channels}"
            )
        baseline = float(self.baseline)
        if not np.isfinite(baseline) or baseline < 0.0:
            raise ValueError(f"baseline must be finite and nonnegative, got {baseline!r}")
        object.__setattr__(self, "baseline", baseline)
        peaks = tuple(self.peaks)
        for peak in peaks:
            if not isinstance(peak, PeakSpec):
                raise ValueError(f"peaks must be PeakSpec instances, got {peak!r}")
        object.__setattr__(self, "peaks", peaks)


def default_config(seed):
    """The stock three-peak recipe on 1024 channels."""
    return SynthConfig(seed=seed)


def _truth_values(config):
    channels = np.arange(config.n_channels, dtype=float)
    values = np.full(config.n_channels, config.baseline)
    for peak in config.peaks:
        z = (channels - peak.center) / peak.width
        values += peak.amplitude * np.exp(-0.5 * z * z)
    return values


def truth_curve(config):
    """The noise-free spectrum for a config; independent of the seed."""
    return Spectrum.from_counts(_truth_values(config))


def synthesize(config):
    """Draw the noisy spectrum for a config.

    Deterministic: equal configs give bitwise-equal spectra.
    """
    truth = _truth_values(config)
    deviates = np.random.default_rng(config.seed).standard_normal(config.n_channels)
    noisy = np.rint(truth + np.sqrt(np.maximum(truth, 0.0)) * deviates)
    return Spectrum.from_counts(np.maximum(noisy, 0.0))
