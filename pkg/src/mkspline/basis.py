"""Centered cardinal B-splines and the many-knot spline basis built on them.

The many-knot basis of degree ``k`` combines a centered B-spline with
symmetric shifted averages of itself,

    q(x) = t[0] * B_k(x) + sum_i t[i] * (B_k(x + a[i]) + B_k(x - a[i])) / 2,

with coefficients ``t`` chosen so the combination is *cardinal* on the
integer grid: q(0) = 1 and q(j) = 0 at every other integer.  Cardinality is
what makes smoothing solve-free — knot coefficients are read directly off
the data instead of coming out of a linear system.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import _kernels
from .exceptions import DegenerateShiftsError

SUPPORTED_ORDERS = (1, 2, 3)

#: Absolute tolerance for the cardinality (delta-interpolation) invariant.
CARDINALITY_TOL = 1e-10

#: Shift vectors giving a cardinal basis for each supported order.  The
#: quadratic entry is the canonical choice; the others are usable defaults
#: for callers that do not supply their own.
DEFAULT_SHIFTS = {1: (0.0,), 2: (0.0, 0.5), 3: (0.0, 0.25, 0.75)}

_COND_LIMIT = 1e12


def _check_order(order):
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ValueError(f"B-spline order must be an integer, got {order!r}")
    if order not in SUPPORTED_ORDERS:
        raise ValueError(
            f"unsupported B-spline order {order}; supported orders are {SUPPORTED_ORDERS}"
        )
    return int(order)


def _normalize_shifts(order, shifts):
    arr = np.atleast_1d(np.asarray(shifts, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != order:
        raise ValueError(f"expected {order} shifts, got {shifts!r}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"shifts must be finite, got {shifts!r}")
    if arr[0] != 0.0:
        raise ValueError(f"the first shift must be 0, got {arr[0]!r}")
    if np.any(arr < 0.0):
        raise ValueError(f"shifts must be nonnegative, got {shifts!r}")
    if arr.shape[0] > 1 and np.any(np.diff(arr) <= 0.0):
        raise DegenerateShiftsError(
            f"shifts must be strictly increasing, got {tuple(arr)}"
        )
    return np.ascontiguousarray(arr)


def bspline_value(order, x):
    """Evaluate the centered cardinal B-spline of degree ``order``.

    The spline is the (order+1)-fold convolution of the unit box: an even,
    nonnegative piecewise polynomial supported on
    ``[-(order+1)/2, (order+1)/2]`` with unit integral, exactly zero outside
    the support.

    Parameters
    ----------
    order : int
        Polynomial degree, one of 1, 2, 3.
    x : float or array_like
        Evaluation point or points.

    Returns
    -------
    float or numpy.ndarray
        Spline value(s); a scalar input gives a float back.
    """
    order = _check_order(order)
    arr = np.asarray(x, dtype=float)
    out = _kernels.omega_numpy(order, arr)
    if arr.ndim == 0:
        return float(out)
    return out


def shifted_average(order, shift, x):
    """Symmetric average ``(B(x + shift) + B(x - shift)) / 2``.

    Reduces to :func:`bspline_value` when ``shift`` is zero.  Even in ``x``
    for any shift.
    """
    order = _check_order(order)
    shift = float(shift)
    if not np.isfinite(shift) or shift < 0.0:
        raise ValueError(f"shift must be finite and nonnegative, got {shift!r}")
    if shift == 0.0:
        return bspline_value(order, x)
    arr = np.asarray(x, dtype=float)
    out = 0.5 * (
        _kernels.omega_numpy(order, arr + shift)
        + _kernels.omega_numpy(order, arr - shift)
    )
    if arr.ndim == 0:
        return float(out)
    return out


def derive_coefficients(order, shifts):
    """Coefficients making the shifted-average combination cardinal.

    Imposes value 1 at the origin and 0 at the integers ``1..order-1`` —
    ``order`` linear conditions on the ``order`` unknowns.  Evenness supplies
    the negative integers and the compact support the rest, so the solution
    interpolates the delta sequence on the whole integer grid.

    Returns
    -------
    numpy.ndarray
        Coefficient vector ``t`` with ``len(t) == order``.

    Raises
    ------
    DegenerateShiftsError
        If the condition system is singular or numerically unusable, e.g.
        for duplicate shifts.
    """
    order = _check_order(order)
    shifts = _normalize_shifts(order, shifts)
    system = np.empty((order, order))
    for row in range(order):
        for col in range(order):
            system[row, col] = shifted_average(order, float(shifts[col]), float(row))
    rhs = np.zeros(order)
    rhs[0] = 1.0
    if not np.all(np.isfinite(system)) or np.linalg.cond(system) > _COND_LIMIT:
        raise DegenerateShiftsError(
            f"cardinality system for shifts {tuple(shifts)} is singular"
        )
    try:
        coeffs = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateShiftsError(
            f"cardinality system for shifts {tuple(shifts)} is singular"
        ) from exc
    return coeffs


@dataclasses.dataclass(frozen=True)
class SupportInterval:
    """Closed symmetric interval outside which a basis is exactly zero."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi) or self.lo != -self.hi:
            raise ValueError(f"support must be symmetric about 0, got {self!r}")

    @property
    def half_width(self):
        return self.hi


@dataclasses.dataclass(frozen=True, eq=False)
class ManyKnotBasis:
    """A cardinal many-knot basis: degree, shift vector and coefficients.

    Instances are validated on construction; in particular the cardinality
    invariant (1 at 0, 0 at every other integer, within
    :data:`CARDINALITY_TOL`) must hold, which rules out arbitrary coefficient
    vectors.  Use :meth:`cardinal` to derive coefficients from shifts, or
    :meth:`quadric` for the canonical degree-2 basis.
    """

    order: int
    shifts: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        order = _check_order(self.order)
        shifts = _normalize_shifts(order, self.shifts)
        coeffs = np.ascontiguousarray(np.asarray(self.coeffs, dtype=float))
        if coeffs.shape != (order,):
            raise ValueError(
                f"expected {order} coefficients, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        shifts.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "coeffs", coeffs)
        self._validate_cardinality()

    def _validate_cardinality(self):
        top = int(np.floor(self.support().hi))
        for j in range(top + 1):
            want = 1.0 if j == 0 else 0.0
            got = self(float(j))
            if abs(got - want) > CARDINALITY_TOL:
                raise ValueError(
                    f"basis is not cardinal: value {got!r} at integer {j}"
                )

    @classmethod
    def cardinal(cls, order, shifts):
        """Build a basis whose coefficients are derived from the shifts."""
        return cls(order, np.asarray(shifts, dtype=float), derive_coefficients(order, shifts))

    @classmethod
    def quadric(cls):
        """The canonical degree-2 basis with shifts (0, 1/2)."""
        return cls.cardinal(2, DEFAULT_SHIFTS[2])

    @classmethod
    def for_order(cls, order):
        """A cardinal basis of the given degree using the default shifts."""
        order = _check_order(order)
        return cls.cardinal(order, DEFAULT_SHIFTS[order])

    def support(self):
        """Interval outside which the basis vanishes identically."""
        half = (self.order + 1) / 2.0 + float(self.shifts[-1])
        return SupportInterval(-half, half)

    def __call__(self, x):
        """Evaluate the basis at scalar or array ``x``."""
        arr = np.asarray(x, dtype=float)
        out = _kernels.basis_numpy(self.order, self.shifts, self.coeffs, arr)
        if arr.ndim == 0:
            return float(out)
        return out

    def __repr__(self):
        return (
            f"ManyKnotBasis(order={self.order}, shifts={tuple(self.shifts)}, "
            f"coeffs={tuple(self.coeffs)})"
        )
