"""Numba and NumPy kernel backends must agree; the package must expose
whichever the environment selected."""

import numpy as np
import pytest

from polylab import kernels
from polylab.kernels import _numpy_impl

try:
    from polylab.kernels import _numba_impl
except ImportError:       # pragma: no cover - numba always present in CI
    _numba_impl = None

needs_numba = pytest.mark.skipif(_numba_impl is None,
                                 reason="numba unavailable")


def test_backend_selected():
    assert kernels.BACKEND in ("numba", "numpy")


@needs_numba
def test_relax_agreement(rng):
    n = 12
    coords = rng.normal(size=(n, 3)) * 2.0
    bond_u = np.arange(n - 1, dtype=np.int64)
    bond_v = np.arange(1, n, dtype=np.int64)
    rest = np.full(n - 1, 1.5)
    a = _numpy_impl.relax_coordinates(coords, bond_u, bond_v, rest,
                                      1.1, 1.0, 0.02, 50)
    b = _numba_impl.relax_coordinates(coords, bond_u, bond_v, rest,
                                      1.1, 1.0, 0.02, 50)
    assert np.allclose(a, b, atol=1e-10)


@needs_numba
def test_tanimoto_agreement(rng):
    a = rng.integers(0, 2 ** 63, size=(7, 4), dtype=np.uint64)
    b = rng.integers(0, 2 ** 63, size=(5, 4), dtype=np.uint64)
    x = _numpy_impl.pairwise_tanimoto_packed(a, b)
    y = _numba_impl.pairwise_tanimoto_packed(a, b)
    assert np.allclose(x, y, atol=1e-15)
    z = np.zeros((2, 4), dtype=np.uint64)
    assert _numba_impl.pairwise_tanimoto_packed(z, z)[0, 0] == 1.0


@needs_numba
def test_hnsw_search_agreement(rng):
    n, dim, deg = 50, 6, 6
    vectors = rng.normal(size=(n, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    neighbors = np.zeros((n, deg), dtype=np.int32)
    counts = np.zeros(n, dtype=np.int32)
    for i in range(n):
        sims = vectors @ vectors[i]
        sims[i] = -np.inf
        top = np.argsort(-sims)[:deg]
        neighbors[i] = top
        counts[i] = deg
    query = rng.normal(size=dim)
    query /= np.linalg.norm(query)
    entries = np.array([0], dtype=np.int64)
    entry_sims = vectors[entries] @ query

    va = np.zeros(n, dtype=np.uint8)
    va[entries] = 1
    ids_a, sims_a = _numpy_impl.hnsw_search_layer(
        vectors, neighbors, counts, entries, entry_sims, query, 10, va)
    vb = np.zeros(n, dtype=np.uint8)
    vb[entries] = 1
    ids_b, sims_b = _numba_impl.hnsw_search_layer(
        vectors, neighbors, counts, entries, entry_sims.copy(), query,
        10, vb)
    assert set(ids_a.tolist()) == set(ids_b.tolist())
    assert np.allclose(sorted(sims_a), sorted(sims_b), atol=1e-12)


def test_numpy_backend_env_flag(tmp_path):
    import subprocess
    import sys

    code = ("import polylab.kernels as k; print(k.BACKEND)")
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"POLYLAB_KERNELS": "numpy", "PATH": "/usr/bin:/bin"},
        capture_output=True, text=True, cwd="/root/pkg")
    assert out.stdout.strip() == "numpy"
