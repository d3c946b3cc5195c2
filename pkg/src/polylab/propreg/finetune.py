"""Downstream training with the projection + head allowlist.

Encoders stay frozen: pooled hidden states are computed once as
constants, and only parameters under ``proj.`` and ``head.`` namespaces
receive optimizer updates.
"""

import numpy as np

from .. import tensorcore as tc
from ..encoders import fuse_all
from .head import RegressionConfig, head_forward, init_head_params, mse_loss
from .scaler import TargetScaler
from .train import InsufficientDataError, pooled_states

TRAINABLE_PREFIXES = ("proj.", "head.")


def collect_pooled(records, enc_cfg, store):
    """Frozen pooled H per modality, stacked as plain arrays."""
    pooled = {"D": [], "G": [], "S": [], "T": []}
    for rec in records:
        outs = pooled_states(rec, enc_cfg, store)
        for tag in pooled:
            pooled[tag].append(outs[tag].h.value.copy())
    return {tag: np.stack(rows) for tag, rows in pooled.items()}


def _fused_from_pooled(pooled, rows, store, d_shared):
    parts = []
    for tag in "DGST":
        h = tc.constant(pooled[tag][rows])
        hidden = tc.relu(tc.add(tc.matmul(h, store[f"proj.{tag}.W1"]),
                                store[f"proj.{tag}.b1"]))
        raw = tc.add(tc.matmul(hidden, store[f"proj.{tag}.W2"]),
                     store[f"proj.{tag}.b2"])
        parts.append(tc.l2_normalize(raw))
    return fuse_all(parts)


def train_regressor(records, enc_cfg, store, targets, config=None,
                    head_prefix="head"):
    """Optimize projections + head on frozen encoder outputs.

    Returns (scaler, history). `store` gains/updates head parameters;
    encoder parameters are untouched (verified bitwise by tests).
    """
    config = config or RegressionConfig()
    targets = np.asarray(targets, dtype=np.float64)
    n = len(records)
    if n < 20:
        raise InsufficientDataError(f"{n} samples < 20 minimum")

    pooled = collect_pooled(records, enc_cfg, store)
    rng = np.random.default_rng([config.seed, 51])
    order = rng.permutation(n)
    n_val = max(1, int(round(config.val_fraction * n)))
    val_idx = order[:n_val]
    train_idx = order[n_val:]

    scaler = TargetScaler.fit(targets[train_idx])
    y_scaled = scaler.transform(targets)

    if f"{head_prefix}.W1" not in store:
        init_head_params(store, enc_cfg.d_shared, config.hidden,
                         np.random.default_rng([config.seed, 52]),
                         prefix=head_prefix)
    trainable = [nm for nm in store.names()
                 if nm.startswith(TRAINABLE_PREFIXES[0])
                 or nm.startswith(head_prefix)]

    steps_per_epoch = max(1, (len(train_idx) + config.batch - 1)
                          // config.batch)
    opt = tc.OptimizerState(lr=config.lr, weight_decay=config.weight_decay,
                            schedule=config.schedule,
                            horizon=config.epochs * steps_per_epoch)
    drop_rng = np.random.default_rng([config.seed, 53])

    best_val = float("inf")
    best = {nm: store[nm].value.copy() for nm in trainable}
    since_best = 0
    history = []
    for epoch in range(config.epochs):
        ep_order = np.random.default_rng(
            [config.seed, 54, epoch]).permutation(len(train_idx))
        for start in range(0, len(ep_order), config.batch):
            rows = train_idx[ep_order[start:start + config.batch]]
            g = _fused_from_pooled(pooled, rows, store, enc_cfg.d_shared)
            pred = head_forward(g, store, prefix=head_prefix, training=True,
                                p_drop=config.p_drop, rng=drop_rng)
            loss = mse_loss(pred, y_scaled[rows][:, None])
            tc.backward(loss)
            params = {nm: store[nm].value for nm in trainable}
            tc.optimizer_step(params, store.grads(trainable), opt)

        g_val = _fused_from_pooled(pooled, val_idx, store, enc_cfg.d_shared)
        val_pred = head_forward(g_val, store, prefix=head_prefix,
                                training=False)
        val_mse = float(np.mean(
            (val_pred.value[:, 0] - y_scaled[val_idx]) ** 2))
        history.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best = {nm: store[nm].value.copy() for nm in trainable}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break
    for nm, arr in best.items():
        store[nm].value[...] = arr
    return scaler, history
