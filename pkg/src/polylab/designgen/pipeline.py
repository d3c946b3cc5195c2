"""Generate-then-filter in latent space, plus generation metrics."""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels, tensorcore as tc
from ..chemcore import (
    canonical_key,
    compute_ecfp,
    pack_fingerprints,
    parse_psmiles,
    substitute_terminus,
    tokenize,
)
from .decoder import DecoderConfig, decode, gen_loss
from .gp import gp_predict
from .latent import build_memory, perturb_latent


class NoSeedsError(ValueError):
    pass


class NoAcceptedCandidatesError(ValueError):
    def __init__(self, histogram):
        super().__init__(
            f"no candidates passed the oracle filter; rejections: "
            f"{dict(histogram)}")
        self.histogram = dict(histogram)


@dataclass
class Candidate:
    psmiles: str                 # None when grammar decoding rejected
    seed_index: int
    oracle_pred: float
    accepted: bool
    rejection_reason: str = None
    novelty: float = None        # mean kNN Tanimoto distance to training set
    predictions: dict = field(default_factory=dict)


@dataclass
class GenReport:
    validity_pct: float
    novelty_pct: float
    diversity: float
    knn_novelty: list
    accepted_count: int
    rejected_count: int
    rejection_histogram: dict
    fold_id: int = 0

    def to_dict(self):
        return {
            "validity_pct": self.validity_pct,
            "novelty_pct": self.novelty_pct,
            "diversity": self.diversity,
            "knn_novelty": self.knn_novelty,
            "accepted_count": self.accepted_count,
            "rejected_count": self.rejected_count,
            "rejection_histogram": self.rejection_histogram,
            "fold_id": self.fold_id,
        }


@dataclass
class GenTrainConfig:
    epochs: int = 60
    lr: float = 3e-3
    batch: int = 16
    sigma_train: float = 0.10
    seed: int = 0

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def train_generator(records, latents, store, model_cfg, vocab, cfg=None):
    """Teacher-forcing reconstruction with latent noise injection."""
    cfg = cfg or GenTrainConfig()
    latents = np.asarray(latents, dtype=np.float64)
    token_lists = [list(tokenize(rec.psmiles, vocab).ids) + [vocab.eos_id]
                   for rec in records]
    gen_names = [nm for nm in store.names() if nm.startswith("gen.")]
    opt = tc.OptimizerState(lr=cfg.lr, weight_decay=0.0)
    noise_rng = np.random.default_rng([cfg.seed, 71])
    history = []
    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, 72, epoch]).permutation(
            len(records))
        epoch_losses = []
        for start in range(0, len(order), cfg.batch):
            rows = order[start:start + cfg.batch]
            terms = []
            for i in rows:
                noisy = perturb_latent(latents[i], cfg.sigma_train,
                                       noise_rng)
                memory = build_memory(tc.constant(noisy), store,
                                      k=model_cfg.k_memory)
                terms.append(gen_loss(token_lists[i], memory, store,
                                      model_cfg, vocab.bos_id))
            loss = terms[0]
            for t in terms[1:]:
                loss = tc.add(loss, t)
            loss = tc.scale(loss, 1.0 / len(terms))
            tc.backward(loss)
            params = {nm: store[nm].value for nm in gen_names}
            tc.optimizer_step(params, store.grads(gen_names), opt)
            epoch_losses.append(float(loss.value))
        history.append(float(np.mean(epoch_losses)))
    return history


def conditional_generate(y_target, scaled_props, latents, oracle, store,
                         model_cfg, vocab, dec_cfg=None, n_seeds=8,
                         n_per_seed=16, sigma_gen=0.15, tau_s=0.5, seed=0,
                         training_keys=None):
    """Seed near the target, perturb, decode, and oracle-filter.

    ``scaled_props`` and ``latents`` describe the training records;
    acceptance keeps candidates with |oracle(latent) - y_target| <= tau_s.
    """
    dec_cfg = dec_cfg or DecoderConfig(stop_token=vocab.eos_id)
    scaled_props = np.asarray(scaled_props, dtype=np.float64)
    latents = np.asarray(latents, dtype=np.float64)
    if scaled_props.size == 0:
        raise NoSeedsError("no training records to seed from")
    order = np.argsort(np.abs(scaled_props - y_target), kind="stable")
    seeds = order[:min(n_seeds, order.size)]

    forbidden = (vocab.pad_id, vocab.unk_id, vocab.mask_id, vocab.bos_id)
    candidates = []
    histogram = {}
    for rank, seed_idx in enumerate(seeds):
        for j in range(n_per_seed):
            rng = np.random.default_rng([seed, int(seed_idx), j])
            noisy = perturb_latent(latents[seed_idx], sigma_gen, rng)
            memory = build_memory(tc.constant(noisy), store,
                                  k=model_cfg.k_memory)
            ids = decode(memory, dec_cfg, store, model_cfg, rng,
                         vocab.bos_id, forbidden_ids=forbidden)
            outcome_obj = __grammar(ids, vocab)
            pred = gp_predict(oracle, noisy)
            if not outcome_obj.accepted:
                histogram[outcome_obj.reason] = histogram.get(
                    outcome_obj.reason, 0) + 1
                candidates.append(Candidate(
                    psmiles=None, seed_index=int(seed_idx),
                    oracle_pred=pred, accepted=False,
                    rejection_reason=outcome_obj.reason))
                continue
            ok = abs(pred - y_target) <= tau_s
            if not ok:
                histogram["oracle-filter"] = histogram.get(
                    "oracle-filter", 0) + 1
            candidates.append(Candidate(
                psmiles=outcome_obj.psmiles, seed_index=int(seed_idx),
                oracle_pred=pred, accepted=bool(ok),
                rejection_reason=None if ok else "oracle-filter"))
    if not any(c.accepted for c in candidates):
        raise NoAcceptedCandidatesError(histogram)
    return candidates, histogram


def __grammar(ids, vocab):
    from .grammar import grammar_decode
    return grammar_decode(ids, vocab=vocab)


def _fingerprints_for(strings, nbits):
    fps = []
    for text in strings:
        graph = substitute_terminus(parse_psmiles(text))
        fps.append(compute_ecfp(graph, nbits=nbits))
    return fps


def knn_tanimoto_novelty(query_fps, reference_fps, k=5, leave_one_out=False):
    """Mean Tanimoto distance to the k nearest reference fingerprints."""
    if not query_fps or not reference_fps:
        return []
    q = pack_fingerprints(query_fps)
    r = pack_fingerprints(reference_fps)
    sims = kernels.pairwise_tanimoto_packed(q, r)
    dists = 1.0 - sims
    out = []
    for i in range(dists.shape[0]):
        row = dists[i]
        if leave_one_out:
            row = np.delete(row, i)
        if row.size == 0:
            out.append(0.0)
            continue
        kk = min(k, row.size)
        nearest = np.partition(row, kk - 1)[:kk]
        out.append(float(np.mean(nearest)))
    return out


def gen_metrics(candidates, training_records, k=5, fp_bits=2048, fold_id=0):
    """Validity / novelty / diversity plus per-candidate kNN novelty."""
    total = len(candidates)
    strings = [c.psmiles for c in candidates if c.psmiles]
    histogram = {}
    for c in candidates:
        if c.rejection_reason:
            histogram[c.rejection_reason] = histogram.get(
                c.rejection_reason, 0) + 1
    if total == 0 or not strings:
        return GenReport(validity_pct=0.0, novelty_pct=0.0, diversity=0.0,
                         knn_novelty=[], accepted_count=0,
                         rejected_count=total,
                         rejection_histogram=histogram, fold_id=fold_id)

    validity = 100.0 * len(strings) / total
    train_keys = {rec.key or canonical_key(parse_psmiles(rec.psmiles))
                  for rec in training_records}
    unseen = 0
    for text in strings:
        if canonical_key(parse_psmiles(text)) not in train_keys:
            unseen += 1
    novelty = 100.0 * unseen / len(strings)

    fps = _fingerprints_for(strings, fp_bits)
    if len(fps) >= 2:
        packed = pack_fingerprints(fps)
        sims = kernels.pairwise_tanimoto_packed(packed, packed)
        iu = np.triu_indices(len(fps), k=1)
        diversity = float(np.mean(1.0 - sims[iu]))
    else:
        diversity = 0.0

    train_fps = [rec.fingerprint if (rec.fingerprint is not None
                                     and rec.fingerprint.nbits == fp_bits)
                 else compute_ecfp(substitute_terminus(
                     parse_psmiles(rec.psmiles)), nbits=fp_bits)
                 for rec in training_records]
    knn = knn_tanimoto_novelty(fps, train_fps, k=k)

    accepted = sum(1 for c in candidates if c.accepted)
    for c, nov in zip([c for c in candidates if c.psmiles], knn):
        c.novelty = nov
    return GenReport(validity_pct=validity, novelty_pct=novelty,
                     diversity=diversity, knn_novelty=knn,
                     accepted_count=accepted,
                     rejected_count=total - accepted,
                     rejection_histogram=histogram, fold_id=fold_id)


def candidates_to_tsv(candidates):
    """One line per candidate: the documented candidate output format."""
    lines = ["psmiles\tseed_index\toracle_pred\taccepted\trejection_reason"
             "\tnovelty\tpredictions"]
    for c in candidates:
        preds = ";".join(f"{k}={v!r}" for k, v in sorted(
            c.predictions.items()))
        lines.append("\t".join([
            c.psmiles or "-", str(c.seed_index), repr(c.oracle_pred),
            "1" if c.accepted else "0", c.rejection_reason or "-",
            repr(c.novelty) if c.novelty is not None else "-", preds or "-",
        ]))
    return "\n".join(lines) + "\n"


def landscape_pairs(novelties, property_values):
    """(novelty, property) rows for external landscape plotting."""
    return [(float(n), float(p)) for n, p in zip(novelties,
                                                 property_values)]
