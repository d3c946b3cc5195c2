"""Finite-difference verification oracle for the autodiff engine."""

import numpy as np

from .diff import DiffArray, backward


def grad_check(f, x, eps=1e-5):
    """Max relative error between analytic and central-difference grads.

    ``f`` maps a DiffArray leaf to a scalar DiffArray. The relative
    error per coordinate is |analytic - numeric| / max(1e-8,
    |analytic| + |numeric|); the max over coordinates is returned.
    """
    x = np.asarray(x, dtype=np.float64)
    leaf = DiffArray(x.copy(), requires_grad=True)
    loss = f(leaf)
    backward(loss)
    analytic = leaf.grad.copy()

    numeric = np.zeros_like(x)
    flat = x.ravel()
    num_flat = numeric.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f(DiffArray(x.copy())).value)
        flat[i] = orig - eps
        lo = float(f(DiffArray(x.copy())).value)
        flat[i] = orig
        num_flat[i] = (hi - lo) / (2.0 * eps)

    denom = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denom))
