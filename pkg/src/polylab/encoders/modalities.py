"""The four modality encoders producing pooled hidden states.

Sequence: transformer with disentangled content+relative attention.
Graph: GINE message passing, h_v <- MLP(h_v + sum ReLU(h_u + phi(e))).
Geometry: continuous-filter convolution over radial-basis distances.
Fingerprint: transformer over the bit sequence.
"""

from dataclasses import dataclass

import numpy as np

from .. import tensorcore as tc
from .blocks import init_attention_block, transformer_block


class LengthExceededError(ValueError):
    pass


class EmptyGraphError(ValueError):
    pass


class CoordinateMismatchError(ValueError):
    pass


class LengthMismatchError(ValueError):
    pass


class DegenerateAnchorError(ValueError):
    pass


@dataclass
class ModalityEmbedding:
    h: tc.DiffArray            # pooled (d_h,)
    states: tc.DiffArray       # per-unit states, (T, d_h)
    tag: str                   # one of D, G, S, T


# ---------------------------------------------------------------- sequence

def init_sequence_params(store, cfg, rng):
    store.add("enc.D.tok_embed",
              tc.normal_embed(rng, cfg.vocab_size, cfg.d_model))
    store.add("enc.D.pos_embed",
              tc.normal_embed(rng, cfg.max_seq_len, cfg.d_model))
    for layer in range(cfg.n_layers):
        init_attention_block(store, f"enc.D.l{layer}", cfg.d_model,
                             cfg.n_heads, cfg.ffn_dim, rng,
                             rel_cap=cfg.rel_cap)
    store.add("enc.D.recon_W", tc.glorot(rng, cfg.d_model, cfg.vocab_size))
    store.add("enc.D.recon_b", np.zeros(cfg.vocab_size))


def encode_sequence(token_ids, cfg, store):
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.size == 0:
        raise LengthExceededError("empty token sequence")
    if ids.size > cfg.max_seq_len:
        raise LengthExceededError(
            f"sequence length {ids.size} exceeds max {cfg.max_seq_len}")
    if np.any(ids >= cfg.vocab_size) or np.any(ids < 0):
        raise ValueError("token id outside vocabulary")
    tok = tc.embedding_lookup(store["enc.D.tok_embed"], ids)
    pos = tc.embedding_lookup(store["enc.D.pos_embed"],
                              np.arange(ids.size, dtype=np.int64))
    x = tc.add(tok, pos)
    for layer in range(cfg.n_layers):
        x = transformer_block(x, store, f"enc.D.l{layer}", cfg.n_heads,
                              rel_cap=cfg.rel_cap)
    return ModalityEmbedding(h=tc.mean_pool_rows(x), states=x, tag="D")


# ------------------------------------------------------------------- graph

_N_CHARGE_CLASSES = 11   # charges -5..+5


def _charge_index(q):
    return int(np.clip(q, -5, 5)) + 5


def init_graph_params(store, cfg, rng):
    store.add("enc.G.z_embed", tc.normal_embed(rng, cfg.z_table, cfg.d_g))
    store.add("enc.G.q_embed",
              tc.normal_embed(rng, _N_CHARGE_CLASSES, cfg.d_g))
    store.add("enc.G.chi_embed", tc.normal_embed(rng, 4, cfg.d_g))
    store.add("enc.G.edge_W", tc.glorot(rng, 6, cfg.d_g))
    store.add("enc.G.edge_b", np.zeros(cfg.d_g))
    for layer in range(cfg.gnn_layers):
        store.add(f"enc.G.l{layer}.W1", tc.glorot(rng, cfg.d_g, cfg.d_g))
        store.add(f"enc.G.l{layer}.b1", np.zeros(cfg.d_g))
        store.add(f"enc.G.l{layer}.W2", tc.glorot(rng, cfg.d_g, cfg.d_g))
        store.add(f"enc.G.l{layer}.b2", np.zeros(cfg.d_g))
    store.add("enc.G.recon_W", tc.glorot(rng, cfg.d_g, cfg.z_table))
    store.add("enc.G.recon_b", np.zeros(cfg.z_table))


def _edge_feature_rows(graph):
    rows = []
    for b in graph.bonds:
        onehot = [0.0, 0.0, 0.0, 0.0]
        onehot[b.order - 1] = 1.0
        rows.append(onehot + [b.stereo, float(b.conjugated)])
    return np.asarray(rows, dtype=np.float64)


def graph_z_indices(graph, cfg):
    """Default atomic-number table indices for the graph view."""
    idx = np.array([a.z for a in graph.atoms], dtype=np.int64)
    return np.clip(idx, 0, cfg.z_table - 2)


def encode_graph(graph, cfg, store, z_indices=None):
    n = len(graph.atoms)
    if n == 0:
        raise EmptyGraphError("graph has no atoms")
    if z_indices is None:
        z_indices = graph_z_indices(graph, cfg)
    q_idx = np.array([_charge_index(a.charge) for a in graph.atoms],
                     dtype=np.int64)
    chi_idx = np.array([a.chirality & 3 for a in graph.atoms],
                       dtype=np.int64)
    h = tc.add(tc.add(tc.embedding_lookup(store["enc.G.z_embed"], z_indices),
                      tc.embedding_lookup(store["enc.G.q_embed"], q_idx)),
               tc.embedding_lookup(store["enc.G.chi_embed"], chi_idx))

    if graph.bonds:
        feats = _edge_feature_rows(graph)
        feats = np.concatenate([feats, feats], axis=0)   # both directions
        src = np.array([b.u for b in graph.bonds]
                       + [b.v for b in graph.bonds], dtype=np.int64)
        dst = np.array([b.v for b in graph.bonds]
                       + [b.u for b in graph.bonds], dtype=np.int64)
        phi = tc.add(tc.matmul(tc.constant(feats), store["enc.G.edge_W"]),
                     store["enc.G.edge_b"])
    else:
        src = dst = phi = None

    for layer in range(cfg.gnn_layers):
        if src is not None:
            msgs = tc.relu(tc.add(tc.gather_rows(h, src), phi))
            agg = tc.scatter_add_rows(msgs, dst, n)
            pre = tc.add(h, agg)
        else:
            pre = h
        hidden = tc.relu(tc.add(tc.matmul(pre, store[f"enc.G.l{layer}.W1"]),
                                store[f"enc.G.l{layer}.b1"]))
        h = tc.add(tc.matmul(hidden, store[f"enc.G.l{layer}.W2"]),
                   store[f"enc.G.l{layer}.b2"])
    return ModalityEmbedding(h=tc.mean_pool_rows(h), states=h, tag="G")


# ---------------------------------------------------------------- geometry

def init_geometry_params(store, cfg, rng):
    store.add("enc.S.z_embed", tc.normal_embed(rng, cfg.z_table, cfg.d_s))
    store.add("enc.S.mask_msg", tc.normal_embed(rng, 1, cfg.d_s)[0])
    for layer in range(cfg.interaction_layers):
        store.add(f"enc.S.l{layer}.W1", tc.glorot(rng, cfg.n_rbf, cfg.d_s))
        store.add(f"enc.S.l{layer}.b1", np.zeros(cfg.d_s))
        store.add(f"enc.S.l{layer}.W2", tc.glorot(rng, cfg.d_s, cfg.d_s))
        store.add(f"enc.S.l{layer}.b2", np.zeros(cfg.d_s))
    store.add("enc.S.recon_W", tc.glorot(rng, cfg.d_s, cfg.z_table))
    store.add("enc.S.recon_b", np.zeros(cfg.z_table))


def neighbor_pairs(coords, r_cut, max_neighbors):
    """Directed (source, target, distance) lists under the radial cutoff."""
    n = coords.shape[0]
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    src, dst, d_out = [], [], []
    for v in range(n):
        order = np.argsort(dist[v], kind="stable")
        kept = 0
        for u in order:
            if u == v or dist[v, u] > r_cut:
                continue
            src.append(u)
            dst.append(v)
            d_out.append(dist[v, u])
            kept += 1
            if kept >= max_neighbors:
                break
    return (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
            np.array(d_out, dtype=np.float64))


def radial_basis(distances, cfg):
    centers = np.linspace(0.0, cfg.r_cut, cfg.n_rbf)
    width = centers[1] - centers[0] if cfg.n_rbf > 1 else cfg.r_cut
    return np.exp(-((distances[:, None] - centers[None, :]) ** 2)
                  / (2.0 * width * width))


def encode_geometry(graph, conformer, cfg, store, z_indices=None,
                    masked_atoms=()):
    n = len(graph.atoms)
    if conformer.coords.shape[0] != n:
        raise CoordinateMismatchError(
            f"{conformer.coords.shape[0]} coordinates for {n} atoms")
    if z_indices is None:
        z_indices = graph_z_indices(graph, cfg)
    h = tc.embedding_lookup(store["enc.S.z_embed"], z_indices)

    src, dst, dists = neighbor_pairs(conformer.coords, cfg.r_cut,
                                     cfg.max_neighbors)
    has_edges = src.size > 0
    if has_edges:
        rbf = tc.constant(radial_basis(dists, cfg))
        masked_flag = np.isin(src, np.asarray(list(masked_atoms),
                                              dtype=np.int64))
        keep_col = tc.constant((~masked_flag).astype(np.float64)[:, None])
        mask_col = tc.constant(masked_flag.astype(np.float64)[:, None])

    for layer in range(cfg.interaction_layers):
        if not has_edges:
            continue
        filt_h = tc.relu(tc.add(tc.matmul(rbf, store[f"enc.S.l{layer}.W1"]),
                                store[f"enc.S.l{layer}.b1"]))
        filt = tc.add(tc.matmul(filt_h, store[f"enc.S.l{layer}.W2"]),
                      store[f"enc.S.l{layer}.b2"])
        msgs = tc.mul(tc.gather_rows(h, src), filt)
        if np.any(masked_flag):
            mask_vec = tc.reshape(store["enc.S.mask_msg"], (1, cfg.d_s))
            msgs = tc.add(tc.mul(msgs, keep_col),
                          tc.mul(mask_vec, mask_col))
        h = tc.add(h, tc.scatter_add_rows(msgs, dst, n))
    return ModalityEmbedding(h=tc.mean_pool_rows(h), states=h, tag="S")


# ------------------------------------------------------------- fingerprint

def init_fingerprint_params(store, cfg, rng):
    store.add("enc.T.bit_embed", tc.normal_embed(rng, 3, cfg.fp_embed_dim))
    store.add("enc.T.pos_embed",
              tc.normal_embed(rng, cfg.fp_seq_len, cfg.fp_embed_dim))
    for layer in range(cfg.fp_layers):
        init_attention_block(store, f"enc.T.l{layer}", cfg.fp_embed_dim,
                             cfg.fp_heads, cfg.fp_ffn, rng)
    store.add("enc.T.recon_W", tc.glorot(rng, cfg.fp_embed_dim, 2))
    store.add("enc.T.recon_b", np.zeros(2))


def encode_fingerprint(bit_values, cfg, store):
    """Encode a {0,1,2} bit sequence; 2 marks a masked position."""
    bits = np.asarray(bit_values, dtype=np.int64)
    if bits.shape != (cfg.fp_seq_len,):
        raise LengthMismatchError(
            f"fingerprint length {bits.shape} != ({cfg.fp_seq_len},)")
    x = tc.add(tc.embedding_lookup(store["enc.T.bit_embed"], bits),
               tc.embedding_lookup(
                   store["enc.T.pos_embed"],
                   np.arange(cfg.fp_seq_len, dtype=np.int64)))
    for layer in range(cfg.fp_layers):
        x = transformer_block(x, store, f"enc.T.l{layer}", cfg.fp_heads)
    return ModalityEmbedding(h=tc.mean_pool_rows(x), states=x, tag="T")


# ------------------------------------------------------ projection, fusion

def init_projection_params(store, cfg, rng):
    widths = {"D": cfg.d_model, "G": cfg.d_g, "S": cfg.d_s,
              "T": cfg.fp_embed_dim}
    for tag, width in widths.items():
        hidden = max(width, cfg.d_shared)
        store.add(f"proj.{tag}.W1", tc.glorot(rng, width, hidden))
        store.add(f"proj.{tag}.b1", rng.normal(0.0, 0.05, hidden))
        store.add(f"proj.{tag}.W2", tc.glorot(rng, hidden, cfg.d_shared))
        store.add(f"proj.{tag}.b2", rng.normal(0.0, 0.05, cfg.d_shared))


def project(embedding, store):
    """Two-layer projection head to the shared space, unit-normalized."""
    tag = embedding.tag
    hidden = tc.relu(tc.add(tc.matmul(embedding.h, store[f"proj.{tag}.W1"]),
                            store[f"proj.{tag}.b1"]))
    raw = tc.add(tc.matmul(hidden, store[f"proj.{tag}.W2"]),
                 store[f"proj.{tag}.b2"])
    return tc.l2_normalize(raw)


def fuse_anchor(g_d, g_g, g_s):
    """Mean of the three structural views, renormalized to unit length."""
    mean = tc.scale(tc.add(tc.add(g_d, g_g), g_s), 1.0 / 3.0)
    try:
        return tc.l2_normalize(mean)
    except tc.ZeroVectorError:
        raise DegenerateAnchorError(
            "structural embeddings average to the zero vector") from None


def fuse_all(parts):
    """Unit-norm mean of any number of shared-space embeddings."""
    total = parts[0]
    for p in parts[1:]:
        total = tc.add(total, p)
    mean = tc.scale(total, 1.0 / len(parts))
    try:
        return tc.l2_normalize(mean)
    except tc.ZeroVectorError:
        raise DegenerateAnchorError(
            "embeddings average to the zero vector") from None


def init_all_params(cfg, seed=0):
    """Fresh ParamStore with every encoder and projection initialized."""
    store = tc.ParamStore()
    rng = np.random.default_rng(seed)
    init_sequence_params(store, cfg, rng)
    init_graph_params(store, cfg, rng)
    init_geometry_params(store, cfg, rng)
    init_fingerprint_params(store, cfg, rng)
    init_projection_params(store, cfg, rng)
    return store
