"""Head training, metric evaluation, and fivefold cross-validation."""

from dataclasses import dataclass, field

import numpy as np

from .. import tensorcore as tc
from ..encoders import (
    encode_fingerprint,
    encode_geometry,
    encode_graph,
    encode_sequence,
    fuse_all,
    project,
)
from .head import RegressionConfig, head_forward, init_head_params, mse_loss
from .scaler import TargetScaler


class MissingViewError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class ZeroVarianceError(ValueError):
    """R^2 undefined for constant targets; MAE/RMSE ride along."""

    def __init__(self, mae, rmse):
        super().__init__("targets have zero variance; R^2 undefined")
        self.mae = mae
        self.rmse = rmse


@dataclass
class CvReport:
    property_name: str
    units: str
    k: int
    folds: list                      # per-fold {"r2","mae","rmse"}
    fold_assignments: list           # fold index per sample
    mean: dict = field(default_factory=dict)
    sd: dict = field(default_factory=dict)

    def finalize(self):
        for metric in ("r2", "mae", "rmse"):
            vals = [f[metric] for f in self.folds]
            self.mean[metric] = float(np.mean(vals))
            self.sd[metric] = float(np.std(vals))
        return self

    def to_tsv(self):
        lines = ["fold\tr2\tmae\trmse"]
        for i, f in enumerate(self.folds):
            lines.append(f"{i}\t{f['r2']!r}\t{f['mae']!r}\t{f['rmse']!r}")
        lines.append(f"mean\t{self.mean['r2']!r}\t{self.mean['mae']!r}"
                     f"\t{self.mean['rmse']!r}")
        lines.append(f"sd\t{self.sd['r2']!r}\t{self.sd['mae']!r}"
                     f"\t{self.sd['rmse']!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {"property": self.property_name, "units": self.units,
                "k": self.k, "folds": self.folds, "mean": self.mean,
                "sd": self.sd, "fold_assignments": self.fold_assignments}


def pooled_states(record, enc_cfg, store):
    """Frozen-encoder pooled H per modality for one record."""
    if not record.has_all_views():
        raise MissingViewError(
            f"record {record.psmiles!r} is missing materialized views")
    out_d = encode_sequence(record.tokens.ids, enc_cfg, store)
    out_g = encode_graph(record.graph, enc_cfg, store)
    out_s = encode_geometry(record.graph, record.conformer, enc_cfg, store)
    out_t = encode_fingerprint(record.fingerprint.bits.astype(np.int64),
                               enc_cfg, store)
    return {"D": out_d, "G": out_g, "S": out_s, "T": out_t}


def fused_embed(record, enc_cfg, store):
    """Unit-norm fused embedding g of all four projected views."""
    outs = pooled_states(record, enc_cfg, store)
    parts = [project(outs[tag], store) for tag in "DGST"]
    return fuse_all(parts).value.copy()


def embed_dataset(records, enc_cfg, store):
    return np.stack([fused_embed(r, enc_cfg, store) for r in records])


def train_head(embeddings, targets, config=None, store=None,
               head_prefix="head"):
    """Fit scaler + MLP head on fixed embedding vectors.

    Returns (store holding head params, TargetScaler, history list of
    per-epoch validation MSE in scaled space).
    """
    config = config or RegressionConfig()
    embeddings = np.asarray(embeddings, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    n = embeddings.shape[0]
    if n < 20:
        raise InsufficientDataError(f"{n} samples < 20 minimum")
    if not np.all(np.isfinite(targets)):
        raise InsufficientDataError("targets contain non-finite values")

    rng = np.random.default_rng([config.seed, 31])
    order = rng.permutation(n)
    n_val = max(1, int(round(config.val_fraction * n)))
    val_idx = order[:n_val]
    train_idx = order[n_val:]

    scaler = TargetScaler.fit(targets[train_idx])
    y_scaled = scaler.transform(targets)

    if store is None:
        store = tc.ParamStore()
    if f"{head_prefix}.W1" not in store:
        init_head_params(store, embeddings.shape[1], config.hidden,
                         np.random.default_rng([config.seed, 32]),
                         prefix=head_prefix)

    head_names = [nm for nm in store.names() if nm.startswith(head_prefix)]
    steps_per_epoch = max(1, (len(train_idx) + config.batch - 1)
                          // config.batch)
    opt = tc.OptimizerState(lr=config.lr, weight_decay=config.weight_decay,
                            schedule=config.schedule,
                            horizon=config.epochs * steps_per_epoch)
    drop_rng = np.random.default_rng([config.seed, 33])

    best_val = float("inf")
    best_snapshot = {nm: store[nm].value.copy() for nm in head_names}
    since_best = 0
    history = []
    for epoch in range(config.epochs):
        ep_rng = np.random.default_rng([config.seed, 34, epoch])
        ep_order = ep_rng.permutation(len(train_idx))
        for start in range(0, len(ep_order), config.batch):
            rows = train_idx[ep_order[start:start + config.batch]]
            x = tc.constant(embeddings[rows])
            pred = head_forward(x, store, prefix=head_prefix, training=True,
                                p_drop=config.p_drop, rng=drop_rng)
            loss = mse_loss(pred, y_scaled[rows][:, None])
            tc.backward(loss)
            params = {nm: store[nm].value for nm in head_names}
            tc.optimizer_step(params, store.grads(head_names), opt)

        val_pred = head_forward(tc.constant(embeddings[val_idx]), store,
                                prefix=head_prefix, training=False)
        val_mse = float(np.mean(
            (val_pred.value[:, 0] - y_scaled[val_idx]) ** 2))
        history.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best_snapshot = {nm: store[nm].value.copy()
                             for nm in head_names}
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break
    for nm, arr in best_snapshot.items():
        store[nm].value[...] = arr
    return store, scaler, history


def predict(store, scaler, embeddings, head_prefix="head"):
    """Predictions in original units for (n, d) embeddings."""
    pred = head_forward(tc.constant(np.asarray(embeddings,
                                               dtype=np.float64)),
                        store, prefix=head_prefix, training=False)
    return scaler.inverse(pred.value[:, 0])


def evaluate(store, scaler, embeddings, targets, head_prefix="head"):
    """R^2 / MAE / RMSE in original units on an evaluation set."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.size == 0:
        raise InsufficientDataError("empty evaluation set")
    preds = predict(store, scaler, embeddings, head_prefix=head_prefix)
    return regression_metrics(targets, preds)


def regression_metrics(targets, preds):
    targets = np.asarray(targets, dtype=np.float64)
    preds = np.asarray(preds, dtype=np.float64)
    residuals = targets - preds
    mae = float(np.mean(np.abs(residuals)))
    rmse = float(np.sqrt(np.mean(residuals ** 2)))
    ss_tot = float(np.sum((targets - targets.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVarianceError(mae=mae, rmse=rmse)
    ss_res = float(np.sum(residuals ** 2))
    return {"r2": 1.0 - ss_res / ss_tot, "mae": mae, "rmse": rmse}


def fold_assignments(n, k, seed):
    """Deterministic shuffled fold index per sample; sizes differ by <= 1."""
    if n < k:
        raise InsufficientDataError(f"{n} samples < {k} folds")
    rng = np.random.default_rng([seed, 41])
    order = rng.permutation(n)
    folds = np.empty(n, dtype=np.int64)
    for pos, idx in enumerate(order):
        folds[idx] = pos % k
    return folds


def cross_validate(embeddings, targets, property_name="y", units="",
                   k=5, seed=0, config=None):
    """Per-fold train/evaluate over deterministic shuffled folds."""
    config = config or RegressionConfig()
    embeddings = np.asarray(embeddings, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    n = embeddings.shape[0]
    assign = fold_assignments(n, k, seed)
    report = CvReport(property_name=property_name, units=units, k=k,
                      folds=[], fold_assignments=[int(i) for i in assign])
    for fold in range(k):
        test_mask = assign == fold
        train_mask = ~test_mask
        fold_store = tc.ParamStore()
        fold_cfg = RegressionConfig(**{**config.to_dict(),
                                       "seed": config.seed + fold})
        fold_store, scaler, _ = train_head(embeddings[train_mask],
                                           targets[train_mask],
                                           config=fold_cfg,
                                           store=fold_store)
        metrics = evaluate(fold_store, scaler, embeddings[test_mask],
                           targets[test_mask])
        report.folds.append(metrics)
    return report.finalize()
