"""Timing comparison of the numba kernels vs the numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [repeats]

The same kernels back the per-TXOP hot path (fading mix, SUS selection,
ZF gains); WLANSIM_BACKEND=numpy forces the fallback package-wide.
"""
import sys
import time

import numpy as np

from wlansim import _kernels as K


def bench(fn, args, repeats):
    fn(*args)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    rng = np.random.default_rng(0)
    ap = np.array([20.0, 20.0, 3.0])
    pos = rng.uniform(0, 40, size=(32, 3))
    steer = K.NUMPY_IMPL["steering_rows"](ap, 4, 4, 0.5, pos)
    gauss = (rng.standard_normal((32, 16)) + 1j * rng.standard_normal((32, 16))) / np.sqrt(2)
    k_lin = 10 ** (rng.normal(9, 3.5, 32) / 10)
    rows = K.NUMPY_IMPL["ricean_rows"](steer, gauss, k_lin)
    sel, n = K.NUMPY_IMPL["sus_select"](rows, 0.3, 16)
    cases = [
        ("steering_rows", (ap, 4, 4, 0.5, pos)),
        ("ricean_rows", (steer, gauss, k_lin)),
        ("sus_select", (rows, 0.3, 16)),
        ("zf_gains", (np.ascontiguousarray(rows[sel[:n]]),)),
    ]
    print(f"{'kernel':<16} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, args in cases:
        t_np = bench(K.NUMPY_IMPL[name], args, repeats)
        if K.NUMBA_IMPL is not None:
            t_nb = bench(K.NUMBA_IMPL[name], args, repeats)
            print(f"{name:<16} {t_np * 1e6:>10.2f}us {t_nb * 1e6:>10.2f}us "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<16} {t_np * 1e6:>10.2f}us {'n/a':>12} {'':>9}")


if __name__ == "__main__":
    main()
