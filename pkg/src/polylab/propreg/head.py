"""Two-layer MLP regression head over fused polymer embeddings."""

from dataclasses import dataclass

import numpy as np

from .. import tensorcore as tc


@dataclass
class RegressionConfig:
    hidden: int = 64            # paper width 300
    p_drop: float = 0.1
    lr: float = 1e-4
    weight_decay: float = 0.0
    epochs: int = 100
    patience: int = 10
    batch: int = 32
    val_fraction: float = 0.1
    seed: int = 0
    schedule: str = "cosine"
    train_projection: bool = True

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def init_head_params(store, d_in, hidden, rng, prefix="head"):
    store.add(f"{prefix}.W1", tc.glorot(rng, d_in, hidden))
    store.add(f"{prefix}.b1", np.zeros(hidden))
    store.add(f"{prefix}.W2", tc.glorot(rng, hidden, 1))
    store.add(f"{prefix}.b2", np.zeros(1))


def head_param_count(d_in, hidden):
    return d_in * hidden + hidden + hidden + 1


def head_forward(x, store, prefix="head", training=False, p_drop=0.1,
                 rng=None):
    """(n, d) embeddings -> (n, 1) scaled predictions."""
    h = tc.relu(tc.add(tc.matmul(x, store[f"{prefix}.W1"]),
                       store[f"{prefix}.b1"]))
    if training and p_drop > 0.0:
        h = tc.dropout(h, p_drop, rng, training=True)
    return tc.add(tc.matmul(h, store[f"{prefix}.W2"]),
                  store[f"{prefix}.b2"])


def mse_loss(pred, target_values):
    diff = tc.sub(pred, tc.constant(np.asarray(target_values,
                                               dtype=np.float64)))
    n = diff.value.size
    return tc.scale(tc.asum(tc.mul(diff, diff)), 1.0 / n)
