"""Latent-conditioned autoregressive decoder with nucleus sampling.

A small transformer decoder cross-attends to the four memory tokens;
training uses teacher forcing, inference uses top-p sampling with a
repetition penalty (emitted-token logits divided by the penalty before
softmax) and min/max length control.
"""

from dataclasses import dataclass

import numpy as np

from .. import tensorcore as tc
from ..encoders import init_attention_block, multi_head_attention, \
    feed_forward
from .latent import K_MEMORY, MemoryBlock, build_memory, init_memory_params


class EmptySequenceError(ValueError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    top_p: float = 0.92
    temperature: float = 1.0
    repetition_penalty: float = 1.05
    max_len: int = 256
    min_len: int = 10
    stop_token: int = 4          # </s> in the shipped vocabulary

    def __post_init__(self):
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError(f"top_p {self.top_p} outside (0, 1]")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not self.min_len < self.max_len:
            raise ValueError("min_len must be < max_len")


@dataclass(frozen=True)
class DecoderModelConfig:
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    ffn_dim: int = 128
    max_len: int = 260
    vocab_size: int = 265
    k_memory: int = K_MEMORY


def init_decoder_params(store, model_cfg, d_latent, rng):
    init_memory_params(store, d_latent, model_cfg.d_model, rng,
                       k=model_cfg.k_memory)
    store.add("gen.tok_embed",
              tc.normal_embed(rng, model_cfg.vocab_size, model_cfg.d_model))
    store.add("gen.pos_embed",
              tc.normal_embed(rng, model_cfg.max_len, model_cfg.d_model))
    for layer in range(model_cfg.n_layers):
        init_attention_block(store, f"gen.l{layer}.self", model_cfg.d_model,
                             model_cfg.n_heads, model_cfg.ffn_dim, rng)
        store.add(f"gen.l{layer}.x.Wq",
                  tc.glorot(rng, model_cfg.d_model, model_cfg.d_model))
        store.add(f"gen.l{layer}.x.Wk",
                  tc.glorot(rng, model_cfg.d_model, model_cfg.d_model))
        store.add(f"gen.l{layer}.x.Wv",
                  tc.glorot(rng, model_cfg.d_model, model_cfg.d_model))
        store.add(f"gen.l{layer}.x.Wo",
                  tc.glorot(rng, model_cfg.d_model, model_cfg.d_model))
        store.add(f"gen.l{layer}.x.bo", np.zeros(model_cfg.d_model))
        store.add(f"gen.l{layer}.x.ln_g", np.ones(model_cfg.d_model))
        store.add(f"gen.l{layer}.x.ln_b", np.zeros(model_cfg.d_model))
    store.add("gen.out_W",
              tc.glorot(rng, model_cfg.d_model, model_cfg.vocab_size))
    store.add("gen.out_b", np.zeros(model_cfg.vocab_size))


def _causal_mask(t):
    mask = np.zeros((t, t))
    mask[np.triu_indices(t, k=1)] = -1e30
    return mask


def decoder_forward(input_ids, memory, store, model_cfg):
    """Logits (T, vocab) for each position given the prefix and memory."""
    ids = np.asarray(input_ids, dtype=np.int64)
    t = ids.size
    x = tc.add(tc.embedding_lookup(store["gen.tok_embed"], ids),
               tc.embedding_lookup(store["gen.pos_embed"],
                                   np.arange(t, dtype=np.int64)))
    mask = _causal_mask(t)
    for layer in range(model_cfg.n_layers):
        attended = multi_head_attention(x, store, f"gen.l{layer}.self",
                                        model_cfg.n_heads, attn_mask=mask)
        x = tc.layer_norm(tc.add(x, attended),
                          store[f"gen.l{layer}.self.ln1_g"],
                          store[f"gen.l{layer}.self.ln1_b"])
        crossed = multi_head_attention(x, store, f"gen.l{layer}.x",
                                       model_cfg.n_heads, kv=memory.rows)
        x = tc.layer_norm(tc.add(x, crossed),
                          store[f"gen.l{layer}.x.ln_g"],
                          store[f"gen.l{layer}.x.ln_b"])
        x = tc.layer_norm(tc.add(x, feed_forward(x, store,
                                                 f"gen.l{layer}.self")),
                          store[f"gen.l{layer}.self.ln2_g"],
                          store[f"gen.l{layer}.self.ln2_b"])
    return tc.add(tc.matmul(x, store["gen.out_W"]), store["gen.out_b"])


def gen_loss(target_ids, memory, store, model_cfg, bos_id, pad_id=None):
    """Teacher-forcing NLL, -(1/T) sum log p(s_t | s_<t, M).

    Trailing pad tokens are ignored, so padding beyond the sequence
    leaves the loss unchanged.
    """
    ids = list(target_ids)
    if pad_id is not None:
        while ids and ids[-1] == pad_id:
            ids.pop()
    t = len(ids)
    if t == 0:
        raise EmptySequenceError("empty target sequence")
    inputs = [bos_id] + ids[:-1]
    logits = decoder_forward(inputs, memory, store, model_cfg)
    logp = tc.log_softmax_rows(logits)
    targets = np.asarray(ids, dtype=np.int64)[:, None]
    chosen = tc.take_along_rows(logp, targets)
    return tc.scale(tc.asum(chosen), -1.0 / t)


def nucleus_sample(probs, top_p, rng):
    """Sample from the smallest descending-probability prefix >= top_p.

    Returns (token index, sorted prefix indices) so callers can assert
    nucleus membership.
    """
    order = np.argsort(-probs, kind="stable")
    sorted_probs = probs[order]
    cum = np.cumsum(sorted_probs)
    cut = int(np.searchsorted(cum, top_p, side="left")) + 1
    cut = min(cut, probs.size)
    prefix = order[:cut]
    renorm = sorted_probs[:cut] / sorted_probs[:cut].sum()
    choice = int(rng.choice(cut, p=renorm))
    return int(prefix[choice]), prefix


def decode(memory, cfg, store, model_cfg, rng, bos_id, forbidden_ids=()):
    """Sample one token sequence; returns content ids without BOS/EOS."""
    emitted = []
    prefix = [bos_id]
    while len(emitted) < cfg.max_len:
        logits_node = decoder_forward(prefix, memory, store, model_cfg)
        logits = logits_node.value[-1].copy()
        for tok in set(emitted):
            logits[tok] = logits[tok] / cfg.repetition_penalty
        if len(emitted) < cfg.min_len:
            logits[cfg.stop_token] = -1e30
        for tok in forbidden_ids:
            logits[tok] = -1e30
        logits = logits / cfg.temperature
        shifted = logits - logits.max()
        probs = np.exp(shifted)
        probs /= probs.sum()
        token, _ = nucleus_sample(probs, cfg.top_p, rng)
        if token == cfg.stop_token:
            break
        emitted.append(token)
        prefix.append(token)
    return emitted
