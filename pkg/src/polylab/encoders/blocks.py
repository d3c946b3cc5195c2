"""Shared transformer building blocks used by two encoders and the decoder."""

import numpy as np

from .. import tensorcore as tc


def init_attention_block(store, prefix, d_model, n_heads, ffn_dim, rng,
                         rel_cap=None):
    g = lambda fi, fo: tc.glorot(rng, fi, fo)  # noqa: E731
    store.add(f"{prefix}.Wq", g(d_model, d_model))
    store.add(f"{prefix}.Wk", g(d_model, d_model))
    store.add(f"{prefix}.Wv", g(d_model, d_model))
    store.add(f"{prefix}.Wo", g(d_model, d_model))
    store.add(f"{prefix}.bo", np.zeros(d_model))
    if rel_cap is not None:
        store.add(f"{prefix}.rel",
                  tc.normal_embed(rng, 2 * rel_cap + 1, d_model))
    store.add(f"{prefix}.ln1_g", np.ones(d_model))
    store.add(f"{prefix}.ln1_b", np.zeros(d_model))
    store.add(f"{prefix}.ffn_W1", g(d_model, ffn_dim))
    store.add(f"{prefix}.ffn_b1", np.zeros(ffn_dim))
    store.add(f"{prefix}.ffn_W2", g(ffn_dim, d_model))
    store.add(f"{prefix}.ffn_b2", np.zeros(d_model))
    store.add(f"{prefix}.ln2_g", np.ones(d_model))
    store.add(f"{prefix}.ln2_b", np.zeros(d_model))


def _relative_index_matrix(t, cap):
    pos = np.arange(t)
    rel = np.clip(pos[None, :] - pos[:, None], -cap, cap) + cap
    return rel.astype(np.int64)


def multi_head_attention(x, store, prefix, n_heads, rel_cap=None,
                         attn_mask=None, kv=None):
    """Content attention, optionally disentangled with relative keys.

    ``kv`` switches to cross-attention against another state matrix.
    ``attn_mask`` is an additive (T_q, T_k) constant (0 / -1e30).
    """
    source = kv if kv is not None else x
    t_q = x.value.shape[0]
    t_k = source.value.shape[0]
    d_model = x.value.shape[1]
    d_head = d_model // n_heads

    q_all = tc.matmul(x, store[f"{prefix}.Wq"])
    k_all = tc.matmul(source, store[f"{prefix}.Wk"])
    v_all = tc.matmul(source, store[f"{prefix}.Wv"])
    if rel_cap is not None:
        rel_idx = _relative_index_matrix(t_q, rel_cap)
        rel_all = store[f"{prefix}.rel"]

    heads = []
    inv_sqrt = 1.0 / np.sqrt(d_head)
    for m in range(n_heads):
        lo, hi = m * d_head, (m + 1) * d_head
        q = tc.slice_axis1(q_all, lo, hi)
        k = tc.slice_axis1(k_all, lo, hi)
        v = tc.slice_axis1(v_all, lo, hi)
        logits = tc.matmul(q, tc.transpose(k))
        if rel_cap is not None:
            rel_h = tc.slice_axis1(rel_all, lo, hi)
            rel_scores = tc.matmul(q, tc.transpose(rel_h))  # (T, 2K+1)
            logits = tc.add(logits, tc.take_along_rows(rel_scores, rel_idx))
        logits = tc.scale(logits, inv_sqrt)
        if attn_mask is not None:
            logits = tc.add(logits, tc.constant(attn_mask))
        attn = tc.softmax_rows(logits)
        heads.append(tc.matmul(attn, v))
    merged = tc.concat(heads, axis=1) if n_heads > 1 else heads[0]
    return tc.add(tc.matmul(merged, store[f"{prefix}.Wo"]),
                  store[f"{prefix}.bo"])


def feed_forward(x, store, prefix):
    h = tc.relu(tc.add(tc.matmul(x, store[f"{prefix}.ffn_W1"]),
                       store[f"{prefix}.ffn_b1"]))
    return tc.add(tc.matmul(h, store[f"{prefix}.ffn_W2"]),
                  store[f"{prefix}.ffn_b2"])


def transformer_block(x, store, prefix, n_heads, rel_cap=None,
                      attn_mask=None):
    attended = multi_head_attention(x, store, prefix, n_heads,
                                    rel_cap=rel_cap, attn_mask=attn_mask)
    x = tc.layer_norm(tc.add(x, attended), store[f"{prefix}.ln1_g"],
                      store[f"{prefix}.ln1_b"])
    x = tc.layer_norm(tc.add(x, feed_forward(x, store, prefix)),
                      store[f"{prefix}.ln2_g"], store[f"{prefix}.ln2_b"])
    return x
