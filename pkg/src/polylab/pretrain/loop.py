"""Two-stage pretraining: unimodal reconstruction warmup, then joint
anchor-target contrastive training with reconstruction regularizers."""

from dataclasses import dataclass, field

import numpy as np

from .. import tensorcore as tc
from ..chemcore import TokenVocabulary
from ..encoders import (
    encode_fingerprint,
    encode_geometry,
    encode_graph,
    encode_sequence,
    fuse_anchor,
    graph_z_indices,
    project,
)
from .corrupt import corrupt_bits, corrupt_tokens, corrupt_z_indices
from .losses import (
    EmptyMaskError,
    infonce,
    mlm_loss,
    node_recon_loss,
    retrieval_eval,
    total_loss,
)


class EmptyCorpusError(ValueError):
    pass


@dataclass
class PretrainConfig:
    p_mask: float = 0.15
    tau: float = 0.07
    lam: float = 1.0
    epochs: int = 25
    patience: int = 10
    batch: int = 16
    accum: int = 4
    seed: int = 0
    lr: float = 1e-4
    weight_decay: float = 1e-2
    val_fraction: float = 0.1
    warmup_epochs: int = 1
    proj_lr_scale: float = 1.0   # projection heads may train faster
    contrast_p_mask: float = 0.0  # light augmentation on the contrast pass
    # reconstruction always sees corrupted views; the anchor-target pair
    # is computed from clean views unless this is set False (desk-scale
    # corpora leave too few steps to average out corruption noise)
    contrast_on_clean: bool = True

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class EpochStats:
    epoch: int
    l_contrast: float
    l_mlm: dict
    l_recon: float
    l_total: float
    val_total: float
    retrieval_top1: float


@dataclass
class PretrainHistory:
    epochs: list = field(default_factory=list)
    best_epoch: int = -1
    best_val: float = float("inf")

    def to_tsv(self):
        cols = ["epoch", "l_contrast", "l_mlm_D", "l_mlm_G", "l_mlm_S",
                "l_mlm_T", "l_recon", "l_total", "val_total",
                "retrieval_top1"]
        lines = ["\t".join(cols)]
        for e in self.epochs:
            row = [str(e.epoch), f"{e.l_contrast!r}"]
            for tag in "DGST":
                row.append(f"{e.l_mlm.get(tag, 0.0)!r}")
            row += [f"{e.l_recon!r}", f"{e.l_total!r}", f"{e.val_total!r}",
                    f"{e.retrieval_top1!r}"]
            lines.append("\t".join(row))
        return "\n".join(lines) + "\n"


def corpus_element_indices(records, enc_cfg):
    zs = set()
    for rec in records:
        zs.update(int(z) for z in graph_z_indices(rec.graph, enc_cfg))
    return sorted(zs)


def record_train_losses(record, enc_cfg, store, vocab, element_indices,
                        p_mask, rng, contrast_on_clean=True,
                        contrast_p_mask=0.0):
    """Corrupt all four views, encode, and collect per-record terms.

    Returns (anchor (d,), target (d,), recon dict tag -> scalar DiffArray).
    With ``contrast_on_clean`` the anchor/target pair comes from a
    separate clean forward pass; otherwise it reuses the corrupted one.
    """
    recon = {}
    ids_cor, plan_d = corrupt_tokens(record.tokens.ids, vocab, p_mask, rng)
    out_d = encode_sequence(ids_cor, enc_cfg, store)
    if plan_d.masked:
        recon["D"] = mlm_loss(list(record.tokens.ids), out_d.states,
                              plan_d.masked, store["enc.D.recon_W"],
                              store["enc.D.recon_b"])

    z_true = graph_z_indices(record.graph, enc_cfg)
    zg_cor, plan_g = corrupt_z_indices(z_true, element_indices,
                                       enc_cfg.z_mask_index, p_mask, rng)
    out_g = encode_graph(record.graph, enc_cfg, store, z_indices=zg_cor)
    if plan_g.masked:
        recon["G"] = node_recon_loss(z_true, out_g.states, plan_g.masked,
                                     store["enc.G.recon_W"],
                                     store["enc.G.recon_b"])

    zs_cor, plan_s = corrupt_z_indices(z_true, element_indices,
                                       enc_cfg.z_mask_index, p_mask, rng)
    out_s = encode_geometry(record.graph, record.conformer, enc_cfg, store,
                            z_indices=zs_cor, masked_atoms=plan_s.masked)
    if plan_s.masked:
        recon["S"] = node_recon_loss(z_true, out_s.states, plan_s.masked,
                                     store["enc.S.recon_W"],
                                     store["enc.S.recon_b"])

    bits_cor, plan_t = corrupt_bits(record.fingerprint.bits, p_mask, rng)
    out_t = encode_fingerprint(bits_cor, enc_cfg, store)
    if plan_t.masked:
        recon["T"] = mlm_loss(record.fingerprint.bits.astype(np.int64),
                              out_t.states, plan_t.masked,
                              store["enc.T.recon_W"],
                              store["enc.T.recon_b"])

    if contrast_on_clean:
        if contrast_p_mask > 0.0:
            ids2, _ = corrupt_tokens(record.tokens.ids, vocab,
                                     contrast_p_mask, rng)
            zg2, _ = corrupt_z_indices(z_true, element_indices,
                                       enc_cfg.z_mask_index,
                                       contrast_p_mask, rng)
            zs2, plan2 = corrupt_z_indices(z_true, element_indices,
                                           enc_cfg.z_mask_index,
                                           contrast_p_mask, rng)
            bits2, _ = corrupt_bits(record.fingerprint.bits,
                                    contrast_p_mask, rng)
        else:
            ids2 = record.tokens.ids
            zg2 = zs2 = None
            plan2 = None
            bits2 = record.fingerprint.bits.astype(np.int64)
        out_d = encode_sequence(ids2, enc_cfg, store)
        out_g = encode_graph(record.graph, enc_cfg, store, z_indices=zg2)
        out_s = encode_geometry(record.graph, record.conformer, enc_cfg,
                                store, z_indices=zs2,
                                masked_atoms=(plan2.masked if plan2
                                              else ()))
        out_t = encode_fingerprint(np.asarray(bits2, dtype=np.int64),
                                   enc_cfg, store)
    anchor = fuse_anchor(project(out_d, store), project(out_g, store),
                         project(out_s, store))
    target = project(out_t, store)
    return anchor, target, recon


def encode_record_clean(record, enc_cfg, store):
    """Anchor and target embeddings of the uncorrupted record (values)."""
    out_d = encode_sequence(record.tokens.ids, enc_cfg, store)
    out_g = encode_graph(record.graph, enc_cfg, store)
    out_s = encode_geometry(record.graph, record.conformer, enc_cfg, store)
    out_t = encode_fingerprint(record.fingerprint.bits.astype(np.int64),
                               enc_cfg, store)
    anchor = fuse_anchor(project(out_d, store), project(out_g, store),
                         project(out_s, store))
    target = project(out_t, store)
    return anchor.value.copy(), target.value.copy()


def _batch_loss(batch, enc_cfg, store, vocab, element_indices, cfg, rng):
    anchors, targets = [], []
    recon_terms = {}
    for rec in batch:
        a, t, recon = record_train_losses(
            rec, enc_cfg, store, vocab, element_indices, cfg.p_mask, rng,
            contrast_on_clean=cfg.contrast_on_clean,
            contrast_p_mask=cfg.contrast_p_mask)
        anchors.append(tc.reshape(a, (1, enc_cfg.d_shared)))
        targets.append(tc.reshape(t, (1, enc_cfg.d_shared)))
        for tag, term in recon.items():
            recon_terms.setdefault(tag, []).append(term)
    anchor_mat = tc.concat(anchors, axis=0)
    target_mat = tc.concat(targets, axis=0)
    l_contrast = infonce(anchor_mat, target_mat, tau=cfg.tau)
    recon_means = {
        tag: tc.scale(_sum_terms(terms), 1.0 / len(terms))
        for tag, terms in recon_terms.items()
    }
    return total_loss(l_contrast, recon_means, lam=cfg.lam)


def _sum_terms(terms):
    acc = terms[0]
    for t in terms[1:]:
        acc = tc.add(acc, t)
    return acc


def _unimodal_warmup(records, enc_cfg, store, vocab, element_indices, cfg):
    """Stage 1: each encoder trains alone on its reconstruction loss."""
    stages = {
        "D": ("enc.D",),
        "G": ("enc.G",),
        "S": ("enc.S",),
        "T": ("enc.T",),
    }
    for tag, namespaces in stages.items():
        opt = tc.OptimizerState(lr=cfg.lr, weight_decay=cfg.weight_decay)
        for epoch in range(cfg.warmup_epochs):
            rng = np.random.default_rng([cfg.seed, 101, epoch,
                                         ord(tag)])
            order = np.random.default_rng([cfg.seed, 102, epoch,
                                           ord(tag)]).permutation(
                                               len(records))
            for start in range(0, len(order), cfg.batch):
                batch = [records[i] for i in order[start:start + cfg.batch]]
                terms = []
                for rec in batch:
                    try:
                        _, _, recon = record_train_losses(
                            rec, enc_cfg, store, vocab, element_indices,
                            cfg.p_mask, rng)
                    except EmptyMaskError:
                        continue
                    if tag in recon:
                        terms.append(recon[tag])
                if not terms:
                    continue
                loss = tc.scale(_sum_terms(terms), 1.0 / len(terms))
                tc.backward(loss)
                names = [n for n in store.names()
                         if any(n.startswith(p) for p in namespaces)]
                params = {n: store[n].value for n in names}
                grads = store.grads(names)
                tc.optimizer_step(params, grads, opt)


def _validation_stats(val_records, enc_cfg, store, vocab, element_indices,
                      cfg):
    rng = np.random.default_rng([cfg.seed, 999])  # same corruption per epoch
    reports = []
    for start in range(0, len(val_records), cfg.batch):
        batch = val_records[start:start + cfg.batch]
        _, report = _batch_loss(batch, enc_cfg, store, vocab,
                                element_indices, cfg, rng)
        reports.append(report.l_total)
    anchors, targets = [], []
    for rec in val_records:
        a, t = encode_record_clean(rec, enc_cfg, store)
        anchors.append(a)
        targets.append(t)
    retrieval = retrieval_eval(np.stack(anchors), np.stack(targets))
    return float(np.mean(reports)), retrieval["top1"]


def fit(records, enc_cfg, cfg=None, vocab=None):
    """Train encoders + projections; returns (store, PretrainHistory).

    The returned store holds the best-validation parameters. History
    rows carry the per-epoch loss decomposition, validation total, and
    matched-pair retrieval top-1 on the validation split.
    """
    from ..encoders import init_all_params

    cfg = cfg or PretrainConfig()
    if not records:
        raise EmptyCorpusError("pretraining corpus is empty")
    for rec in records:
        if not rec.has_all_views():
            raise EmptyCorpusError(
                f"record {rec.psmiles!r} is missing materialized views")
    vocab = vocab or TokenVocabulary.default()

    split_rng = np.random.default_rng([cfg.seed, 11])
    order = split_rng.permutation(len(records))
    n_val = max(1, int(round(cfg.val_fraction * len(records)))) \
        if len(records) > 1 else 0
    val_idx = set(int(i) for i in order[:n_val])
    train_records = [records[i] for i in range(len(records))
                     if i not in val_idx]
    val_records = [records[i] for i in sorted(val_idx)] or train_records

    element_indices = corpus_element_indices(records, enc_cfg)
    store = init_all_params(enc_cfg, seed=cfg.seed)

    if cfg.warmup_epochs > 0:
        _unimodal_warmup(train_records, enc_cfg, store, vocab,
                         element_indices, cfg)

    history = PretrainHistory()
    opt = tc.OptimizerState(lr=cfg.lr, weight_decay=cfg.weight_decay)
    best_snapshot = store.snapshot()
    epochs_since_best = 0

    for epoch in range(cfg.epochs):
        rng = np.random.default_rng([cfg.seed, 201, epoch])
        order = np.random.default_rng([cfg.seed, 202, epoch]).permutation(
            len(train_records))
        micro_size = cfg.batch
        micro_losses = []
        epoch_reports = []
        position = 0
        while position < len(order):
            batch = [train_records[i]
                     for i in order[position:position + micro_size]]
            position += micro_size
            loss, report = _batch_loss(batch, enc_cfg, store, vocab,
                                       element_indices, cfg, rng)
            micro_losses.append(loss)
            epoch_reports.append(report)
            if len(micro_losses) >= cfg.accum or position >= len(order):
                combined = tc.scale(_sum_terms(micro_losses),
                                    1.0 / len(micro_losses))
                tc.backward(combined)
                params = store.values()
                grads = store.grads()
                scales = ({"proj.": cfg.proj_lr_scale}
                          if cfg.proj_lr_scale != 1.0 else None)
                tc.optimizer_step(params, grads, opt, lr_scales=scales)
                micro_losses = []

        val_total, top1 = _validation_stats(val_records, enc_cfg, store,
                                            vocab, element_indices, cfg)
        mean_mlm = {}
        for tag in "DGST":
            vals = [r.l_mlm[tag] for r in epoch_reports if tag in r.l_mlm]
            if vals:
                mean_mlm[tag] = float(np.mean(vals))
        stats = EpochStats(
            epoch=epoch,
            l_contrast=float(np.mean([r.l_contrast
                                      for r in epoch_reports])),
            l_mlm=mean_mlm,
            l_recon=float(np.mean([r.l_recon for r in epoch_reports])),
            l_total=float(np.mean([r.l_total for r in epoch_reports])),
            val_total=val_total,
            retrieval_top1=top1,
        )
        history.epochs.append(stats)

        if val_total < history.best_val:
            history.best_val = val_total
            history.best_epoch = epoch
            best_snapshot = store.snapshot()
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= cfg.patience:
                break

    store.restore(best_snapshot)
    return store, history
