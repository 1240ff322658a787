#!/usr/bin/env python3
"""Benchmark the pair-sum backends (compiled extension vs numpy fallback).

The O(M^2) quadratic forms and O(M T) kernel maps are the hot loops of the
matrix-kernel checks; this script times both implementations on growing
point clouds and prints a table plus the speedup.

Usage: python benchmarks/bench_pairsum.py [--sizes 250,500,1000,2000]
"""

import argparse
import time

import numpy as np

from potlab.backend import implementations


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="250,500,1000,2000")
    parser.add_argument("--dim", type=int, default=2, choices=(2, 3))
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    impls = implementations()
    if len(impls) < 2:
        print("note: compiled backend unavailable, timing numpy only")
    rng = np.random.default_rng(0)

    header = f"{'M':>6} | " + " | ".join(f"{name + ' form':>12} | {name + ' bessel':>14}"
                                         for name, _ in impls)
    print(header)
    print("-" * len(header))
    for m in sizes:
        pos = np.ascontiguousarray(rng.uniform(-4, 4, (m, args.dim)))
        vec = np.ascontiguousarray(rng.normal(size=(m, args.dim)))
        row = [f"{m:>6}"]
        times = {}
        for name, mod in impls:
            t_form = time_call(mod.pair_quadratic_form, pos, vec, 0.5, 0.02)
            t_bess = time_call(mod.pair_quadratic_form_bessel, pos, vec, 0.02)
            times[name] = (t_form, t_bess)
            row.append(f"{t_form * 1e3:>10.2f}ms | {t_bess * 1e3:>12.2f}ms")
        print(" | ".join(row))
        if len(times) == 2:
            s1 = times["numpy"][0] / times["cython"][0]
            s2 = times["numpy"][1] / times["cython"][1]
            print(f"{'':>6}   speedup (cython over numpy): form {s1:.1f}x, "
                  f"bessel {s2:.1f}x")


if __name__ == "__main__":
    main()
