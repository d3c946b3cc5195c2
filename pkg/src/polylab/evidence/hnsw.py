"""Hierarchical navigable small-world index over unit vectors.

Cosine similarity via dot products on normalized vectors. The layer-0
beam search is a hot kernel (see ``polylab.kernels``); insertion logic,
neighbor pruning, and persistence live here.

Persisted byte layout (little-endian):

    magic ``PLHNSW01`` | dim u32 | M u32 | ef_construction u32 |
    count u64 | top_level i32 | entry i64 |
    ids_json_len u64 | ids JSON (UTF-8 list) |
    levels i32 x count |
    per level 0..top_level: counts i32 x count, then for each node its
    ``counts[node]`` neighbor ids as i32 |
    vectors f64 x (count * dim)
"""

import json
import math

import numpy as np

from .. import kernels

MAGIC = b"PLHNSW01"


class DuplicateIdError(ValueError):
    pass


class EmptyIndexError(ValueError):
    pass


class HnswIndex:
    def __init__(self, dim, m=64, ef_construction=200, seed=0):
        self.dim = dim
        self.m = m
        self.m0 = 2 * m
        self.ef_construction = ef_construction
        self.ml = 1.0 / math.log(m)
        self._level_rng = np.random.default_rng([seed, 91])
        self.count = 0
        self.capacity = 0
        self.vectors = np.zeros((0, dim), dtype=np.float64)
        self.levels = np.zeros(0, dtype=np.int32)
        self.external_ids = []
        self._id_to_node = {}
        self.neighbors = []          # per level: (capacity, deg) int32
        self.counts = []             # per level: (capacity,) int32
        self.entry = -1
        self.top_level = -1

    # ------------------------------------------------------------ storage

    def _deg_max(self, level):
        return self.m0 if level == 0 else self.m

    def _grow(self, needed):
        if needed <= self.capacity:
            return
        new_cap = max(1024, self.capacity * 2, needed)
        vec = np.zeros((new_cap, self.dim), dtype=np.float64)
        vec[:self.count] = self.vectors[:self.count]
        self.vectors = vec
        lev = np.zeros(new_cap, dtype=np.int32)
        lev[:self.count] = self.levels[:self.count]
        self.levels = lev
        for lc in range(len(self.neighbors)):
            deg = self._deg_max(lc)
            nb = np.zeros((new_cap, deg), dtype=np.int32)
            nb[:self.count] = self.neighbors[lc][:self.count]
            self.neighbors[lc] = nb
            cn = np.zeros(new_cap, dtype=np.int32)
            cn[:self.count] = self.counts[lc][:self.count]
            self.counts[lc] = cn
        self.capacity = new_cap

    def _ensure_level(self, level):
        while len(self.neighbors) <= level:
            lc = len(self.neighbors)
            self.neighbors.append(
                np.zeros((self.capacity, self._deg_max(lc)), dtype=np.int32))
            self.counts.append(np.zeros(self.capacity, dtype=np.int32))

    # ------------------------------------------------------------- search

    def _search_layer(self, level, query, entry_ids, ef):
        visited = np.zeros(self.count, dtype=np.uint8)
        entry_ids = np.asarray(entry_ids, dtype=np.int64)
        visited[entry_ids] = 1
        entry_sims = self.vectors[entry_ids] @ query
        return kernels.hnsw_search_layer(
            self.vectors[:self.count], self.neighbors[level][:self.count],
            self.counts[level][:self.count], entry_ids,
            np.asarray(entry_sims, dtype=np.float64), query, ef, visited)

    def _link(self, level, u, v):
        nb = self.neighbors[level]
        cn = self.counts[level]
        deg = self._deg_max(level)
        current = nb[u, :cn[u]]
        if v in current:
            return
        if cn[u] < deg:
            nb[u, cn[u]] = v
            cn[u] += 1
            return
        # prune: keep the deg most similar to u among current + v
        cands = np.concatenate([current, [v]]).astype(np.int64)
        sims = self.vectors[cands] @ self.vectors[u]
        keep = cands[np.argsort(-sims, kind="stable")[:deg]]
        nb[u, :deg] = keep
        cn[u] = deg

    # ------------------------------------------------------------- public

    def insert(self, external_id, vector):
        if external_id in self._id_to_node:
            raise DuplicateIdError(f"id {external_id!r} already indexed")
        vec = np.asarray(vector, dtype=np.float64)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise ValueError("cannot index a zero vector")
        vec = vec / norm

        node = self.count
        self._grow(node + 1)
        level = int(-math.log(max(self._level_rng.random(), 1e-300))
                    * self.ml)
        self._ensure_level(level)
        self.vectors[node] = vec
        self.levels[node] = level
        self.external_ids.append(external_id)
        self._id_to_node[external_id] = node
        self.count += 1

        if self.entry < 0:
            self.entry = node
            self.top_level = level
            return node

        ep = np.array([self.entry], dtype=np.int64)
        for lc in range(self.top_level, level, -1):
            ids, _ = self._search_layer(lc, vec, ep, 1)
            ep = ids[:1]
        for lc in range(min(level, self.top_level), -1, -1):
            ids, _ = self._search_layer(lc, vec, ep, self.ef_construction)
            chosen = ids[:self.m]
            for v in chosen:
                self._link(lc, node, int(v))
                self._link(lc, int(v), node)
            ep = ids if ids.size else ep
        if level > self.top_level:
            self.entry = node
            self.top_level = level
        return node

    def search(self, query, k, ef_search=None):
        """Approximate top-k (external id, cosine) pairs, best first."""
        if self.count == 0:
            raise EmptyIndexError("index holds no vectors")
        q = np.asarray(query, dtype=np.float64)
        norm = np.linalg.norm(q)
        if norm == 0.0:
            raise ValueError("cannot search with a zero vector")
        q = q / norm
        ef = max(ef_search or 0, k, 1)
        ep = np.array([self.entry], dtype=np.int64)
        for lc in range(self.top_level, 0, -1):
            ids, _ = self._search_layer(lc, q, ep, 1)
            ep = ids[:1]
        ids, sims = self._search_layer(0, q, ep, ef)
        ids = ids[:k]
        sims = sims[:k]
        return [(self.external_ids[int(i)], float(s))
                for i, s in zip(ids, sims)]

    def __len__(self):
        return self.count

    # -------------------------------------------------------- persistence

    def save(self, path):
        ids_blob = json.dumps(self.external_ids).encode("utf-8")
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(np.uint32(self.dim).tobytes())
            f.write(np.uint32(self.m).tobytes())
            f.write(np.uint32(self.ef_construction).tobytes())
            f.write(np.uint64(self.count).tobytes())
            f.write(np.int32(self.top_level).tobytes())
            f.write(np.int64(self.entry).tobytes())
            f.write(np.uint64(len(ids_blob)).tobytes())
            f.write(ids_blob)
            f.write(self.levels[:self.count].astype("<i4").tobytes())
            for lc in range(self.top_level + 1):
                cn = self.counts[lc][:self.count].astype("<i4")
                f.write(cn.tobytes())
                for node in range(self.count):
                    row = self.neighbors[lc][node, :cn[node]].astype("<i4")
                    f.write(row.tobytes())
            f.write(self.vectors[:self.count].astype("<f8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            magic = f.read(8)
            if magic != MAGIC:
                raise ValueError(f"bad index magic {magic!r}")
            dim = int(np.frombuffer(f.read(4), "<u4")[0])
            m = int(np.frombuffer(f.read(4), "<u4")[0])
            efc = int(np.frombuffer(f.read(4), "<u4")[0])
            count = int(np.frombuffer(f.read(8), "<u8")[0])
            top_level = int(np.frombuffer(f.read(4), "<i4")[0])
            entry = int(np.frombuffer(f.read(8), "<i8")[0])
            ids_len = int(np.frombuffer(f.read(8), "<u8")[0])
            external_ids = json.loads(f.read(ids_len).decode("utf-8"))
            index = cls(dim, m=m, ef_construction=efc)
            index._grow(max(count, 1))
            index.count = count
            index.top_level = top_level
            index.entry = entry
            index.external_ids = external_ids
            index._id_to_node = {eid: i for i, eid in
                                 enumerate(external_ids)}
            index.levels[:count] = np.frombuffer(f.read(4 * count), "<i4")
            index._ensure_level(max(top_level, 0))
            for lc in range(top_level + 1):
                cn = np.frombuffer(f.read(4 * count), "<i4").copy()
                index.counts[lc][:count] = cn
                for node in range(count):
                    k = int(cn[node])
                    if k:
                        row = np.frombuffer(f.read(4 * k), "<i4")
                        index.neighbors[lc][node, :k] = row
            vec = np.frombuffer(f.read(8 * count * dim), "<f8")
            index.vectors[:count] = vec.reshape(count, dim)
        return index


def brute_force_topk(vectors, ids, query, k):
    """Exact scan oracle used to measure recall."""
    vecs = np.asarray(vectors, dtype=np.float64)
    vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    q = np.asarray(query, dtype=np.float64)
    q = q / np.linalg.norm(q)
    sims = vecs @ q
    order = np.argsort(-sims, kind="stable")[:k]
    return [(ids[int(i)], float(sims[int(i)])) for i in order]
