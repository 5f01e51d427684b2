#!/usr/bin/env python3
"""Benchmark the numba kernel path against the pure-numpy fallback.

Both implementations live side by side in ``statbundle._kernels``; this
script times them head to head over a range of problem sizes and prints a
speedup table.  Run after installing the package:

    python benchmarks/bench_kernels.py            # full sweep
    python benchmarks/bench_kernels.py --quick    # small sizes only

Set STATBUNDLE_NO_NUMBA=1 to check what the fallback-only configuration
looks like (the comparison column is then skipped).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from statbundle import _kernels as K

VECTOR_SIZES = (100, 10_000, 1_000_000)
TABLE_SHAPES = ((10, 10), (100, 100), (1000, 1000))
QUICK_VECTOR_SIZES = (100, 10_000)
QUICK_TABLE_SHAPES = ((10, 10), (100, 100))
STAT_DIM = 3


def vector_args(n: int):
    rng = np.random.default_rng(n)
    a = rng.uniform(0.1, 2.0, n)
    b = rng.uniform(0.1, 2.0, n)
    c = rng.uniform(0.1, 2.0, n)
    d = rng.uniform(0.1, 2.0, n)
    u = rng.normal(0.0, 2.0, n)
    return {
        "dot3": (a, b, c),
        "dot4": (a, b, c, d),
        "log_mean_exp": (u, a),
        "kl_sum": (a, b, c),
    }


def table_args(shape: tuple[int, int]):
    rng = np.random.default_rng(shape)
    q = rng.uniform(0.1, 2.0, shape)
    v = rng.normal(size=shape)
    mu2 = rng.uniform(0.2, 1.5, shape[1])
    stats = rng.normal(size=(STAT_DIM, *shape))
    coef = rng.normal(size=STAT_DIM)
    return {
        "row_margin": (q, mu2),
        "cond_expect": (v, q, mu2),
        "lincomb": (stats, coef),
        "stats_expect": (stats, q),
        "cond_expect_stats": (stats, q, mu2),
    }


def best_time(fn, args) -> float:
    """Seconds per call, best of five auto-scaled repeats."""
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=5, number=number)) / number


def fmt_time(seconds: float) -> str:
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.2f} us"
    return f"{seconds * 1e3:8.3f} ms"


def run(quick: bool) -> None:
    print(f"active backend: {K.backend()}")
    if K.NUMBA_ENABLED:
        K.warmup()
        header = f"{'kernel':<18} {'size':>12} {'numpy':>12} {'numba':>12} {'speedup':>8}"
    else:
        header = f"{'kernel':<18} {'size':>12} {'numpy':>12}"
        print("numba path inactive; timing the numpy fallback only")
    print(header)
    print("-" * len(header))

    vec_sizes = QUICK_VECTOR_SIZES if quick else VECTOR_SIZES
    tbl_shapes = QUICK_TABLE_SHAPES if quick else TABLE_SHAPES

    cases = [(n, vector_args(n)) for n in vec_sizes]
    cases += [(shape, table_args(shape)) for shape in tbl_shapes]

    for size, argmap in cases:
        for name, args in argmap.items():
            ref = getattr(K, f"{name}_numpy")
            t_ref = best_time(ref, args)
            label = f"{size}" if isinstance(size, int) else f"{size[0]}x{size[1]}"
            if K.NUMBA_ENABLED:
                t_jit = best_time(getattr(K, name), args)
                print(
                    f"{name:<18} {label:>12} {fmt_time(t_ref):>12} "
                    f"{fmt_time(t_jit):>12} {t_ref / t_jit:>7.2f}x"
                )
            else:
                print(f"{name:<18} {label:>12} {fmt_time(t_ref):>12}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="skip the largest sizes")
    run(parser.parse_args().quick)


if __name__ == "__main__":
    main()
