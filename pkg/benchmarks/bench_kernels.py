#!/usr/bin/env python3
"""Time the numba kernels against the pure-NumPy reference path.

Usage:
    python benchmarks/bench_kernels.py [--quick]

The first numba call includes JIT compilation; a warmup run is timed
separately so steady-state numbers are comparable. Select the package
backend at runtime with POLYLAB_KERNELS=numba|numpy.
"""

import argparse
import time

import numpy as np

from polylab.kernels import _numpy_impl

try:
    from polylab.kernels import _numba_impl
except ImportError:
    _numba_impl = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_relax(quick):
    n = 60 if quick else 200
    iters = 100 if quick else 500
    rng = np.random.default_rng(0)
    coords = rng.normal(size=(n, 3)) * 3.0
    bond_u = np.arange(n - 1, dtype=np.int64)
    bond_v = np.arange(1, n, dtype=np.int64)
    rest = np.full(n - 1, 1.5)
    args = (coords, bond_u, bond_v, rest, 1.1, 1.0, 0.02, iters)
    t_np, ref = timeit(_numpy_impl.relax_coordinates, *args)
    row = f"relax_coordinates  n={n:4d} iters={iters:4d}   numpy {t_np:8.4f}s"
    if _numba_impl is not None:
        _numba_impl.relax_coordinates(*args)   # JIT warmup
        t_nb, out = timeit(_numba_impl.relax_coordinates, *args)
        assert np.allclose(ref, out, atol=1e-9)
        row += f"   numba {t_nb:8.4f}s   speedup {t_np / t_nb:6.1f}x"
    print(row)


def bench_tanimoto(quick):
    n = 200 if quick else 800
    words = 32
    rng = np.random.default_rng(1)
    packed = rng.integers(0, 2 ** 63, size=(n, words), dtype=np.uint64)
    t_np, ref = timeit(_numpy_impl.pairwise_tanimoto_packed, packed, packed)
    row = f"pairwise_tanimoto  n={n:4d} words={words:3d}   numpy {t_np:8.4f}s"
    if _numba_impl is not None:
        _numba_impl.pairwise_tanimoto_packed(packed[:4], packed[:4])
        t_nb, out = timeit(_numba_impl.pairwise_tanimoto_packed, packed,
                           packed)
        assert np.allclose(ref, out)
        row += f"   numba {t_nb:8.4f}s   speedup {t_np / t_nb:6.1f}x"
    print(row)


def bench_hnsw_search(quick):
    n = 2000 if quick else 10000
    dim, deg, ef = 32, 32, 128
    rng = np.random.default_rng(2)
    vectors = rng.normal(size=(n, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    neighbors = rng.integers(0, n, size=(n, deg)).astype(np.int32)
    counts = np.full(n, deg, dtype=np.int32)
    queries = rng.normal(size=(50, dim))
    queries /= np.linalg.norm(queries, axis=1, keepdims=True)
    entries = np.array([0], dtype=np.int64)

    def run(impl):
        total = 0.0
        for q in queries:
            visited = np.zeros(n, dtype=np.uint8)
            visited[entries] = 1
            entry_sims = vectors[entries] @ q
            t0 = time.perf_counter()
            impl.hnsw_search_layer(vectors, neighbors, counts, entries,
                                   entry_sims, q, ef, visited)
            total += time.perf_counter() - t0
        return total

    t_np = run(_numpy_impl)
    row = f"hnsw_search_layer  n={n:5d} ef={ef:4d}   numpy {t_np:8.4f}s"
    if _numba_impl is not None:
        run(_numba_impl)   # warmup
        t_nb = run(_numba_impl)
        row += f"   numba {t_nb:8.4f}s   speedup {t_np / t_nb:6.1f}x"
    print(row)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()
    if _numba_impl is None:
        print("numba unavailable: reporting numpy path only")
    bench_relax(args.quick)
    bench_tanimoto(args.quick)
    bench_hnsw_search(args.quick)


if __name__ == "__main__":
    main()
