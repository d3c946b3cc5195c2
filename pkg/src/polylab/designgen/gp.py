"""Gaussian-process regression oracle with an RBF kernel."""

from dataclasses import dataclass

import numpy as np


class SingularKernelError(ValueError):
    pass


@dataclass
class GpOracle:
    train_x: np.ndarray          # (n, d) latents
    alpha: np.ndarray            # (K + noise I)^-1 y
    length_scale: float
    signal_var: float
    noise_var: float
    jitter: float                # extra diagonal needed for the factorization


def rbf_kernel(a, b, length_scale=1.0, signal_var=1.0):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    sq = (np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :]
          - 2.0 * (a @ b.T))
    sq = np.maximum(sq, 0.0)
    return signal_var * np.exp(-0.5 * sq / (length_scale ** 2))


def gp_fit(latents, targets, length_scale=1.0, signal_var=1.0,
           noise_var=1e-4):
    """Fit the posterior-mean solve factor; jitter escalates x10 to 1e-2."""
    x = np.asarray(latents, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 training points")
    k = rbf_kernel(x, x, length_scale, signal_var)
    jitter = 0.0
    while True:
        try:
            chol = np.linalg.cholesky(
                k + (noise_var + jitter) * np.eye(x.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter = 1e-6 if jitter == 0.0 else jitter * 10.0
            if jitter > 1e-2:
                raise SingularKernelError(
                    "kernel matrix not positive definite after jitter "
                    "escalation to 1e-2") from None
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))
    return GpOracle(train_x=x.copy(), alpha=alpha,
                    length_scale=length_scale, signal_var=signal_var,
                    noise_var=noise_var, jitter=jitter)


def gp_predict(oracle, latent):
    """Posterior mean at one latent (or a batch) in standardized units."""
    q = np.atleast_2d(np.asarray(latent, dtype=np.float64))
    k_star = rbf_kernel(q, oracle.train_x, oracle.length_scale,
                        oracle.signal_var)
    mean = k_star @ oracle.alpha
    return float(mean[0]) if mean.shape[0] == 1 else mean
