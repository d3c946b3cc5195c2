"""Reconstruction and contrastive losses plus the total objective."""

from dataclasses import dataclass, field

import numpy as np

from .. import tensorcore as tc


class EmptyMaskError(ValueError):
    pass


class NonUnitNormError(ValueError):
    pass


class NonPositiveTemperatureError(ValueError):
    pass


class CountMismatchError(ValueError):
    pass


@dataclass
class LossReport:
    l_contrast: float
    l_mlm: dict = field(default_factory=dict)   # modality tag -> value
    l_node: float = 0.0
    l_recon: float = 0.0
    l_total: float = 0.0
    lam: float = 1.0


def mlm_loss(targets, states, masked_indices, head_w, head_b):
    """Mean NLL of the true unit classes at masked positions only."""
    masked = np.asarray(sorted(masked_indices), dtype=np.int64)
    if masked.size == 0:
        raise EmptyMaskError("no masked positions; skip this term")
    picked = tc.gather_rows(states, masked)
    logits = tc.add(tc.matmul(picked, head_w), head_b)
    logp = tc.log_softmax_rows(logits)
    target_ids = np.asarray(targets, dtype=np.int64)[masked]
    chosen = tc.take_along_rows(logp, target_ids[:, None])
    return tc.scale(tc.asum(chosen), -1.0 / masked.size)


def node_recon_loss(z_targets, node_states, masked_atoms, head_w, head_b):
    """Masked-atom atomic-number prediction; same shape as mlm_loss."""
    return mlm_loss(z_targets, node_states, masked_atoms, head_w, head_b)


def _check_unit_rows(arr, name):
    norms = np.sqrt((arr ** 2).sum(axis=1))
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise NonUnitNormError(
            f"{name} rows must be unit-norm (max dev "
            f"{np.max(np.abs(norms - 1.0)):.2e})")


def infonce(anchors, targets, tau=0.07):
    """Anchor-target InfoNCE with log-sum-exp stabilization.

    Accepts (B, d) DiffArrays or plain arrays with unit-norm rows;
    returns a scalar DiffArray.
    """
    if tau <= 0:
        raise NonPositiveTemperatureError(f"temperature {tau} must be > 0")
    a = anchors if isinstance(anchors, tc.DiffArray) else tc.constant(anchors)
    t = targets if isinstance(targets, tc.DiffArray) else tc.constant(targets)
    if a.value.ndim != 2 or t.value.ndim != 2 or a.value.shape != t.value.shape:
        raise CountMismatchError(
            f"anchors {a.value.shape} vs targets {t.value.shape}")
    _check_unit_rows(a.value, "anchor")
    _check_unit_rows(t.value, "target")
    b = a.value.shape[0]
    sim = tc.scale(tc.matmul(a, tc.transpose(t)), 1.0 / tau)
    logp = tc.log_softmax_rows(sim)
    diag = tc.take_along_rows(logp, np.arange(b, dtype=np.int64)[:, None])
    return tc.scale(tc.asum(diag), -1.0 / b)


def total_loss(l_contrast, recon_losses, lam=1.0):
    """Combine contrast and mean reconstruction into the total objective.

    ``recon_losses`` maps modality tags to scalar DiffArrays (or floats);
    an empty set contributes zero. Returns (total DiffArray, LossReport).
    """
    contrast = (l_contrast if isinstance(l_contrast, tc.DiffArray)
                else tc.constant(float(l_contrast)))
    tags = sorted(recon_losses)
    report = LossReport(l_contrast=float(contrast.value), lam=lam)
    if tags:
        acc = None
        for tag in tags:
            term = recon_losses[tag]
            term = (term if isinstance(term, tc.DiffArray)
                    else tc.constant(float(term)))
            report.l_mlm[tag] = float(term.value)
            acc = term if acc is None else tc.add(acc, term)
        recon = tc.scale(acc, 1.0 / len(tags))
    else:
        recon = tc.constant(0.0)
    node_terms = [report.l_mlm[t] for t in ("G", "S") if t in report.l_mlm]
    report.l_node = float(np.mean(node_terms)) if node_terms else 0.0
    report.l_recon = float(recon.value)
    total = tc.add(contrast, tc.scale(recon, lam))
    report.l_total = float(total.value)
    return total, report


def retrieval_eval(anchors, targets):
    """Matched-pair retrieval metrics over unit-norm embedding rows.

    Top-1 accuracy is the fraction of anchors whose nearest target by
    cosine is their own; macro F1 averages the F1 of the induced binary
    match / non-match predictions over both classes.
    """
    anchors = np.asarray(anchors, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if anchors.shape != targets.shape:
        raise CountMismatchError(
            f"anchors {anchors.shape} vs targets {targets.shape}")
    _check_unit_rows(anchors, "anchor")
    _check_unit_rows(targets, "target")
    b = anchors.shape[0]
    sims = anchors @ targets.T
    nearest = np.argmax(sims, axis=1)
    hits = int(np.sum(nearest == np.arange(b)))
    top1 = hits / b

    # induced binary predictions over all (i, j) pairs
    tp = hits
    fp = b - hits          # each anchor names exactly one target
    fn = b - hits
    tn = b * b - tp - fp - fn
    f1_match = (2 * tp / (2 * tp + fp + fn)) if (2 * tp + fp + fn) else 0.0
    f1_non = (2 * tn / (2 * tn + fp + fn)) if (2 * tn + fp + fn) else 0.0
    return {"top1": top1, "macro_f1": 0.5 * (f1_match + f1_non)}
