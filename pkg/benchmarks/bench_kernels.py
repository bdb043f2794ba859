"""Benchmark the compiled kernels against the numpy fallback.

Times pairwise_cosine, prim_mst, and rss_scan on synthetic inputs for both
backends and prints a table with per-kernel speedups.  The compiled extension
is optional; without it only the pure backend is reported.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 200,500,1000] [--repeats 5]
                                        [--dim 64] [--threads 1]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from idsel.kernels import pure

try:
    from idsel.kernels import _core as compiled
except ImportError:
    compiled = None


def unit_rows(n: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rows = rng.normal(size=(n, dim))
    rows /= np.linalg.norm(rows, axis=1, keepdims=True)
    return np.ascontiguousarray(rows)


def best_of(repeats: int, fn) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workloads(n: int, dim: int, threads: int):
    unit = unit_rows(n, dim, seed=n)
    sim = pure.pairwise_cosine(unit)
    dist = np.clip(1.0 - sim, 0.0, None)
    core = np.ascontiguousarray(np.partition(dist, 5, axis=1)[:, 5])
    return [
        ("pairwise_cosine", lambda impl: impl.pairwise_cosine(unit, threads=threads)),
        ("prim_mst", lambda impl: impl.prim_mst(dist, core)),
        ("rss_scan", lambda impl: impl.rss_scan(sim)),
    ]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,500,1000")
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s]

    if compiled is None:
        print("compiled extension not built; timing the pure backend only\n")

    header = f"{'kernel':<16} {'n':>5} {'pure (ms)':>10} {'compiled (ms)':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        for name, call in workloads(n, args.dim, args.threads):
            pure_ms = best_of(args.repeats, lambda: call(pure)) * 1e3
            if compiled is None:
                print(f"{name:<16} {n:>5} {pure_ms:>10.2f} {'-':>13} {'-':>8}")
                continue
            ours = np.asarray(call(compiled), dtype=np.float64)
            theirs = np.asarray(call(pure), dtype=np.float64)
            if ours.shape != theirs.shape or not np.allclose(
                ours, theirs, atol=1e-9
            ):
                raise SystemExit(f"{name}: backends disagree at n={n}")
            compiled_ms = best_of(args.repeats, lambda: call(compiled)) * 1e3
            speedup = pure_ms / compiled_ms if compiled_ms else float("inf")
            print(
                f"{name:<16} {n:>5} {pure_ms:>10.2f} {compiled_ms:>13.2f} {speedup:>7.1f}x"
            )


if __name__ == "__main__":
    main()
