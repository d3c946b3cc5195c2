"""Hot numeric kernels with two interchangeable backends.

The package-wide backend is chosen once at import time from the
``POLYLAB_KERNELS`` environment variable: ``numba`` (default when numba
imports cleanly) or ``numpy`` (pure-NumPy reference path, also the
fallback when numba is unavailable). ``benchmarks/bench_kernels.py``
times the two paths against each other.
"""

import os

_requested = os.environ.get("POLYLAB_KERNELS", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"POLYLAB_KERNELS must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested in ("", "numba"):
    try:
        from . import _numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _numpy_impl as _impl

        BACKEND = "numpy"
else:
    from . import _numpy_impl as _impl

    BACKEND = "numpy"

relax_coordinates = _impl.relax_coordinates
pairwise_tanimoto_packed = _impl.pairwise_tanimoto_packed
hnsw_search_layer = _impl.hnsw_search_layer

__all__ = [
    "BACKEND",
    "relax_coordinates",
    "pairwise_tanimoto_packed",
    "hnsw_search_layer",
]
