"""Time the numba kernels against their pure-numpy fallbacks.

Run from the repository root after installing the package:

    python benchmarks/kernel_bench.py
    python benchmarks/kernel_bench.py --channels 8192 --level 6 --repeats 7

The same workloads run through both backends; the table reports median
wall-clock times and the speedup of the jit path.  Setting
``MKSPLINE_NO_NUMBA=1`` disables the jit path entirely, in which case only
the numpy column is populated.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mkspline import _kernels
from mkspline.basis import ManyKnotBasis


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _workloads(channels, level):
    rng = np.random.default_rng(7)
    basis = ManyKnotBasis.quadric()
    intervals = 4 * 2**level
    spacing = (channels - 1) / intervals
    positions = spacing * np.arange(intervals + 1)
    ext_positions = np.concatenate(
        ([-2 * spacing, -spacing], positions, [positions[-1] + spacing, positions[-1] + 2 * spacing])
    )
    ext_values = rng.uniform(10.0, 1000.0, ext_positions.shape[0])
    xs = np.arange(channels, dtype=float)
    counts = rng.uniform(10.0, 1000.0, channels)
    lsq_positions = np.concatenate(([-spacing], positions, [positions[-1] + spacing]))
    design = _kernels.cubic_design_numpy(xs, lsq_positions, spacing)
    matrix, rhs = _kernels.normal_system_numpy(design, counts)
    matrix = matrix + 1e-9 * np.eye(matrix.shape[0])

    return [
        (
            "curve_eval",
            lambda k: k[0](xs, ext_positions, ext_values, spacing, 2, basis.shifts, basis.coeffs),
            (_kernels.curve_eval_jit, _kernels.curve_eval_numpy),
        ),
        (
            "window_means",
            lambda k: k[0](counts, 0, channels - 1, positions, spacing / 2.0),
            (_kernels.window_means_jit, _kernels.window_means_numpy),
        ),
        (
            "cubic_design",
            lambda k: k[0](xs, lsq_positions, spacing),
            (_kernels.cubic_design_jit, _kernels.cubic_design_numpy),
        ),
        (
            "normal_system",
            lambda k: k[0](design, counts),
            (_kernels.normal_system_jit, _kernels.normal_system_numpy),
        ),
        (
            "cholesky_solve",
            lambda k: k[0](matrix, rhs),
            (_kernels.cholesky_solve_jit, _kernels.cholesky_solve_numpy),
        ),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--channels", type=int, default=4096)
    parser.add_argument("--level", type=int, default=6, help="knot grid level (4*2^level+1 knots)")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    knots = 4 * 2**args.level + 1
    print(f"channels={args.channels} level={args.level} ({knots} knots) repeats={args.repeats}")
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, run, (jit_fn, numpy_fn) in _workloads(args.channels, args.level):
        if jit_fn is not None:
            run((jit_fn,))  # compile before timing
            jit_ms = _median_time(lambda: run((jit_fn,)), args.repeats) * 1e3
        else:
            jit_ms = None
        numpy_ms = _median_time(lambda: run((numpy_fn,)), args.repeats) * 1e3
        jit_text = f"{jit_ms:12.3f}" if jit_ms is not None else f"{'n/a':>12}"
        speedup = f"{numpy_ms / jit_ms:9.1f}x" if jit_ms else f"{'n/a':>10}"
        print(f"{name:<16}{jit_text}{numpy_ms:12.3f}{speedup}")


if __name__ == "__main__":
    main()
