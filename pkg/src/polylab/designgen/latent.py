"""Latent conditioning: memory tokens and noise perturbation."""

from dataclasses import dataclass

import numpy as np

from .. import tensorcore as tc


class NonUnitNormError(ValueError):
    pass


class DegenerateError(ValueError):
    pass


K_MEMORY = 4


@dataclass
class MemoryBlock:
    rows: tc.DiffArray          # (K, d_model)

    @property
    def k(self):
        return self.rows.value.shape[0]


def init_memory_params(store, d_latent, d_model, rng, k=K_MEMORY):
    store.add("gen.Wcond", tc.glorot(rng, d_latent, d_model))
    store.add("gen.mem_pos", tc.normal_embed(rng, k, d_model))


def build_memory(g, store, k=K_MEMORY):
    """m = W_cond g; row k is m + p_k."""
    vec = g if isinstance(g, tc.DiffArray) else tc.constant(
        np.asarray(g, dtype=np.float64))
    norm = float(np.linalg.norm(vec.value))
    if abs(norm - 1.0) > 1e-6:
        raise NonUnitNormError(f"latent norm {norm:.6f} != 1")
    m = tc.matmul(tc.reshape(vec, (1, vec.value.shape[0])),
                  store["gen.Wcond"])                      # (1, d_model)
    rows = tc.add(store["gen.mem_pos"], m)                 # (K, d_model)
    if rows.value.shape[0] != k:
        raise ValueError(
            f"memory table has {rows.value.shape[0]} rows, expected {k}")
    return MemoryBlock(rows=rows)


def perturb_latent(g, sigma, rng):
    """Unit-norm resample of g + N(0, sigma^2 I); sigma=0 is the identity."""
    g = np.asarray(g, dtype=np.float64)
    if abs(np.linalg.norm(g) - 1.0) > 1e-6:
        raise NonUnitNormError("latent must be unit-norm")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0.0:
        return g.copy()
    for _ in range(2):
        noisy = g + rng.normal(0.0, sigma, size=g.shape)
        norm = np.linalg.norm(noisy)
        if norm > 1e-12:
            return noisy / norm
    raise DegenerateError("perturbed latent collapsed to zero twice")
