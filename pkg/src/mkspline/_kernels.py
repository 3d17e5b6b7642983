"""Hot numeric kernels, compiled with numba when available.

Two complete implementations live side by side: loop kernels compiled with
``numba.njit`` and vectorized pure-numpy equivalents.  The numpy path is
selected automatically when numba cannot be imported, or explicitly by
setting ``MKSPLINE_NO_NUMBA=1`` in the environment before first import.  Both
paths produce the same results (``tests/test_kernels.py``); the script
``benchmarks/kernel_bench.py`` times one against the other.

Splines are evaluated through their positive-part forms, e.g.
``omega3(x) = ((2-|x|)+^3 - 4(1-|x|)+^3) / 6``, which expand to the same
piecewise polynomials as the usual case analysis but keep the inner loops
branch-free.

Kernels expect contiguous float64 arrays and do no validation of their own;
the public wrappers in :mod:`mkspline.basis`, :mod:`mkspline.fitter` and
:mod:`mkspline.baseline` normalise inputs first.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "MKSPLINE_NO_NUMBA"

# Pivot threshold for the Cholesky factorization, relative to the largest
# diagonal entry of the normal matrix.
_PIVOT_RTOL = 1e-12


def _numba_disabled():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


if _numba_disabled():
    _numba = None
else:
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba = None

USING_NUMBA = _numba is not None
BACKEND = "numba" if USING_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations


def omega_numpy(order, x):
    """Centered cardinal B-spline of degree ``order`` (1..3), vectorized."""
    ax = np.abs(x)
    if order == 1:
        return np.maximum(1.0 - ax, 0.0)
    if order == 2:
        u = np.maximum(1.5 - ax, 0.0)
        v = np.maximum(0.5 - ax, 0.0)
        return 0.5 * (u * u - 3.0 * v * v)
    u = np.maximum(2.0 - ax, 0.0)
    v = np.maximum(1.0 - ax, 0.0)
    return (u * u * u - 4.0 * v * v * v) / 6.0


def basis_numpy(order, shifts, coeffs, t):
    """Many-knot basis value at scaled offsets ``t``."""
    acc = coeffs[0] * omega_numpy(order, t)
    for i in range(1, len(shifts)):
        a = shifts[i]
        acc = acc + coeffs[i] * 0.5 * (
            omega_numpy(order, t + a) + omega_numpy(order, t - a)
        )
    return acc


def curve_eval_numpy(xs, positions, values, spacing, order, shifts, coeffs):
    """Accumulate every knot's scaled basis over all evaluation points."""
    out = np.zeros(xs.shape[0])
    inv_h = 1.0 / spacing
    for j in range(positions.shape[0]):
        t = (xs - positions[j]) * inv_h
        out += values[j] * basis_numpy(order, shifts, coeffs, t)
    return out


def window_means_numpy(counts, start, end, positions, half_width):
    """Mean of the counts in the closed window ``|c - p| <= half_width``.

    Windows are clipped to ``[start, end]``; a window holding no integer
    channel falls back to the channel nearest the knot.
    """
    lo = np.maximum(np.ceil(positions - half_width), start).astype(np.int64)
    hi = np.minimum(np.floor(positions + half_width), end).astype(np.int64)
    width = hi - lo + 1
    sums = np.concatenate(([0.0], np.cumsum(counts)))
    lo_c = np.clip(lo, 0, counts.shape[0] - 1)
    hi_c = np.clip(hi, lo_c - 1, counts.shape[0] - 1)
    means = (sums[hi_c + 1] - sums[lo_c]) / np.maximum(width, 1)
    nearest = np.clip(np.rint(positions), start, end).astype(np.int64)
    return np.where(width >= 1, means, counts[nearest])


def cubic_design_numpy(xs, positions, spacing):
    """Dense matrix of scaled cubic B-spline values, one column per knot."""
    t = (xs[:, None] - positions[None, :]) * (1.0 / spacing)
    return omega_numpy(3, t)


def normal_system_numpy(design, y):
    """Normal matrix and right-hand side of the unweighted least squares."""
    return design.T @ design, design.T @ y


def cholesky_solve_numpy(matrix, rhs):
    """Solve an SPD system by an in-repo Cholesky factorization.

    Returns ``(x, ok)``; ``ok`` is False when a pivot falls at or below the
    rank-deficiency threshold, in which case ``x`` is meaningless.
    """
    m = matrix.shape[0]
    scale = float(np.max(np.diagonal(matrix))) if m else 0.0
    if scale <= 0.0:
        return rhs.copy(), False
    tol = scale * _PIVOT_RTOL
    lower = np.zeros_like(matrix)
    for j in range(m):
        pivot = matrix[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= tol:
            return rhs.copy(), False
        d = np.sqrt(pivot)
        lower[j, j] = d
        lower[j + 1 :, j] = (matrix[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / d
    fwd = np.empty(m)
    for i in range(m):
        fwd[i] = (rhs[i] - lower[i, :i] @ fwd[:i]) / lower[i, i]
    x = np.empty(m)
    for i in range(m - 1, -1, -1):
        x[i] = (fwd[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x, True


def lsq_solve_numpy(start, n, positions, spacing, y):
    """Full least-squares pass: design, normal system, solve, weighted chi2.

    Returns ``(coefficients, chi_square, ok)``.  Kept as one call so both
    backends expose the same fused entry point for :func:`baseline.lsq_fit`.
    """
    xs = start + np.arange(n, dtype=np.float64)
    design = cubic_design_numpy(xs, positions, spacing)
    matrix, rhs = normal_system_numpy(design, y)
    x, ok = cholesky_solve_numpy(matrix, rhs)
    if not ok:
        return x, 0.0, False
    resid = y - design @ x
    chi = float(np.sum(resid * resid / np.maximum(y, 1.0)))
    return x, chi, True


# ---------------------------------------------------------------------------
# numba implementations

if USING_NUMBA:
    _njit = _numba.njit

    @_njit(cache=True)
    def _omega_scalar(order, x):
        ax = abs(x)
        if order == 1:
            return max(1.0 - ax, 0.0)
        if order == 2:
            u = max(1.5 - ax, 0.0)
            v = max(0.5 - ax, 0.0)
            return 0.5 * (u * u - 3.0 * v * v)
        u = max(2.0 - ax, 0.0)
        v = max(1.0 - ax, 0.0)
        return (u * u * u - 4.0 * v * v * v) / 6.0

    @_njit(cache=True, fastmath=True)
    def curve_eval_jit(xs, positions, values, spacing, order, shifts, coeffs):
        n = xs.shape[0]
        out = np.zeros(n)
        inv_h = 1.0 / spacing
        for j in range(positions.shape[0]):
            p = positions[j]
            for s in range(shifts.shape[0]):
                a = shifts[s]
                if a == 0.0:
                    # A zero shift is its own mirror image, so the symmetric
                    # average collapses to a single plain spline term.
                    if order == 1:
                        c = values[j] * coeffs[s]
                        for r in range(n):
                            t = (xs[r] - p) * inv_h
                            out[r] += c * max(1.0 - abs(t), 0.0)
                    elif order == 2:
                        c = 0.5 * values[j] * coeffs[s]
                        for r in range(n):
                            ax = abs((xs[r] - p) * inv_h)
                            u = max(1.5 - ax, 0.0)
                            v = max(0.5 - ax, 0.0)
                            out[r] += c * (u * u - 3.0 * v * v)
                    else:
                        c = values[j] * coeffs[s] / 6.0
                        for r in range(n):
                            ax = abs((xs[r] - p) * inv_h)
                            u = max(2.0 - ax, 0.0)
                            v = max(1.0 - ax, 0.0)
                            out[r] += c * (u * u * u - 4.0 * v * v * v)
                elif order == 1:
                    c = 0.5 * values[j] * coeffs[s]
                    for r in range(n):
                        t = (xs[r] - p) * inv_h
                        u1 = max(1.0 - abs(t + a), 0.0)
                        u2 = max(1.0 - abs(t - a), 0.0)
                        out[r] += c * (u1 + u2)
                elif order == 2:
                    c = 0.25 * values[j] * coeffs[s]
                    for r in range(n):
                        t = (xs[r] - p) * inv_h
                        a1 = abs(t + a)
                        a2 = abs(t - a)
                        u1 = max(1.5 - a1, 0.0)
                        v1 = max(0.5 - a1, 0.0)
                        u2 = max(1.5 - a2, 0.0)
                        v2 = max(0.5 - a2, 0.0)
                        out[r] += c * (
                            u1 * u1 - 3.0 * v1 * v1 + u2 * u2 - 3.0 * v2 * v2
                        )
                else:
                    c = values[j] * coeffs[s] / 12.0
                    for r in range(n):
                        t = (xs[r] - p) * inv_h
                        a1 = abs(t + a)
                        a2 = abs(t - a)
                        u1 = max(2.0 - a1, 0.0)
                        v1 = max(1.0 - a1, 0.0)
                        u2 = max(2.0 - a2, 0.0)
                        v2 = max(1.0 - a2, 0.0)
                        out[r] += c * (
                            (u1 * u1 * u1 - 4.0 * v1 * v1 * v1)
                            + (u2 * u2 * u2 - 4.0 * v2 * v2 * v2)
                        )
        return out

    @_njit(cache=True)
    def window_means_jit(counts, start, end, positions, half_width):
        m = positions.shape[0]
        out = np.empty(m)
        for j in range(m):
            p = positions[j]
            lo = int(np.ceil(p - half_width))
            hi = int(np.floor(p + half_width))
            if lo < start:
                lo = start
            if hi > end:
                hi = end
            if lo > hi:
                c = int(np.rint(p))
                if c < start:
                    c = start
                elif c > end:
                    c = end
                out[j] = counts[c]
            else:
                total = 0.0
                for c in range(lo, hi + 1):
                    total += counts[c]
                out[j] = total / (hi - lo + 1)
        return out

    @_njit(cache=True)
    def cubic_design_jit(xs, positions, spacing):
        n = xs.shape[0]
        m = positions.shape[0]
        design = np.empty((n, m))
        inv_h = 1.0 / spacing
        for r in range(n):
            x = xs[r]
            for j in range(m):
                design[r, j] = _omega_scalar(3, (x - positions[j]) * inv_h)
        return design

    @_njit(cache=True)
    def normal_system_jit(design, y):
        n, m = design.shape
        matrix = np.zeros((m, m))
        rhs = np.zeros(m)
        for r in range(n):
            yr = y[r]
            for i in range(m):
                v = design[r, i]
                rhs[i] += v * yr
                for j in range(i, m):
                    matrix[i, j] += v * design[r, j]
        for i in range(m):
            for j in range(i + 1, m):
                matrix[j, i] = matrix[i, j]
        return matrix, rhs

    @_njit(cache=True)
    def cholesky_solve_jit(matrix, rhs):
        m = matrix.shape[0]
        scale = 0.0
        for i in range(m):
            if matrix[i, i] > scale:
                scale = matrix[i, i]
        if scale <= 0.0:
            return rhs.copy(), False
        tol = scale * _PIVOT_RTOL
        lower = np.zeros_like(matrix)
        for j in range(m):
            pivot = matrix[j, j]
            for k in range(j):
                pivot -= lower[j, k] * lower[j, k]
            if pivot <= tol:
                return rhs.copy(), False
            d = np.sqrt(pivot)
            lower[j, j] = d
            for i in range(j + 1, m):
                s = matrix[i, j]
                for k in range(j):
                    s -= lower[i, k] * lower[j, k]
                lower[i, j] = s / d
        fwd = np.empty(m)
        for i in range(m):
            s = rhs[i]
            for k in range(i):
                s -= lower[i, k] * fwd[k]
            fwd[i] = s / lower[i, i]
        x = np.empty(m)
        for i in range(m - 1, -1, -1):
            s = fwd[i]
            for k in range(i + 1, m):
                s -= lower[k, i] * x[k]
            x[i] = s / lower[i, i]
        return x, True

    @_njit(cache=True, fastmath=True)
    def lsq_solve_jit(start, n, positions, spacing, y):
        m = positions.shape[0]
        inv_h = 1.0 / spacing
        span = 2.0 * spacing
        # Rows of the transposed design matrix.  Entries beyond the spline's
        # support are zero by definition, so each row gets its supported
        # stretch evaluated and the flanks zeroed; design-times-vector
        # products below (rhs, fitted) run over the supported stretch only,
        # while the normal-equation dots still run over the full dense rows.
        design_t = np.empty((m, n))
        los = np.empty(m, dtype=np.int64)
        his = np.empty(m, dtype=np.int64)
        for i in range(m):
            p = positions[i]
            lo = int(np.ceil(p - span - start))
            hi = int(np.floor(p + span - start))
            if lo < 0:
                lo = 0
            if hi > n - 1:
                hi = n - 1
            los[i] = lo
            his[i] = hi
            row = design_t[i]
            row[:lo] = 0.0
            row[hi + 1 :] = 0.0
            # Stepping the argument avoids a per-channel int-to-float
            # conversion that would otherwise dominate the vector body.
            t = (start + lo - p) * inv_h
            for r in range(lo, hi + 1):
                ax = abs(t)
                u = max(2.0 - ax, 0.0)
                v = max(1.0 - ax, 0.0)
                row[r] = (u * u * u - 4.0 * v * v * v) / 6.0
                t += inv_h
        matrix = np.empty((m, m))
        rhs = np.empty(m)
        for i in range(m):
            row_i = design_t[i]
            acc = 0.0
            for r in range(los[i], his[i] + 1):
                acc += row_i[r] * y[r]
            rhs[i] = acc
            # Two columns per sweep so both accumulators stay in registers
            # and each load of row_i feeds two products.
            j = i
            while j + 1 < m:
                row_j = design_t[j]
                row_k = design_t[j + 1]
                s0 = 0.0
                s1 = 0.0
                for r in range(n):
                    b = row_i[r]
                    s0 += b * row_j[r]
                    s1 += b * row_k[r]
                matrix[i, j] = s0
                matrix[j, i] = s0
                matrix[i, j + 1] = s1
                matrix[j + 1, i] = s1
                j += 2
            if j < m:
                row_j = design_t[j]
                s0 = 0.0
                for r in range(n):
                    s0 += row_i[r] * row_j[r]
                matrix[i, j] = s0
                matrix[j, i] = s0
        x, ok = cholesky_solve_jit(matrix, rhs)
        chi = 0.0
        if ok:
            fitted = np.zeros(n)
            for i in range(m):
                xi = x[i]
                row_i = design_t[i]
                for r in range(los[i], his[i] + 1):
                    fitted[r] += xi * row_i[r]
            for r in range(n):
                yr = y[r]
                d = yr - fitted[r]
                chi += d * d / max(yr, 1.0)
        return x, chi, ok

else:  # pragma: no cover - exercised via the env flag in a subprocess
    curve_eval_jit = None
    window_means_jit = None
    cubic_design_jit = None
    normal_system_jit = None
    cholesky_solve_jit = None
    lsq_solve_jit = None


# ---------------------------------------------------------------------------
# active backend

if USING_NUMBA:
    curve_eval = curve_eval_jit
    window_means = window_means_jit
    cubic_design = cubic_design_jit
    normal_system = normal_system_jit
    cholesky_solve = cholesky_solve_jit
    lsq_solve = lsq_solve_jit
else:
    curve_eval = curve_eval_numpy
    window_means = window_means_numpy
    cubic_design = cubic_design_numpy
    normal_system = normal_system_numpy
    cholesky_solve = cholesky_solve_numpy
    lsq_solve = lsq_solve_numpy


def warm_up():
    """Run every active kernel once so jit compilation stays out of timings."""
    xs = np.linspace(-2.0, 2.0, 8)
    positions = np.array([0.0, 1.0])
    values = np.array([1.0, 2.0])
    shifts = np.array([0.0, 0.5])
    coeffs = np.array([2.0, -1.0])
    curve_eval(xs, positions, values, 1.0, 2, shifts, coeffs)
    window_means(np.ones(8), 0, 7, positions, 0.5)
    design = cubic_design(xs, positions, 1.0)
    matrix, rhs = normal_system(design, np.ones(8))
    cholesky_solve(matrix + np.eye(2), rhs)
    lsq_solve(0.0, 8, np.array([1.0, 3.0, 5.0]), 2.0, np.ones(8))
