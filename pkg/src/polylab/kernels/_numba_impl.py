"""Numba-jitted implementations of the hot kernels.

Mirrors ``_numpy_impl`` function for function; the numpy module is the
behavioural reference.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def relax_coordinates(coords, bond_u, bond_v, rest_len, rep_radius, rep_k,
                      step, n_iter):
    n = coords.shape[0]
    out = coords.copy()
    if n < 2:
        return out
    bonded = np.zeros((n, n), dtype=np.bool_)
    for e in range(bond_u.shape[0]):
        bonded[bond_u[e], bond_v[e]] = True
        bonded[bond_v[e], bond_u[e]] = True
    for i in range(n):
        bonded[i, i] = True

    grad = np.zeros((n, 3), dtype=np.float64)
    for _ in range(n_iter):
        grad[:, :] = 0.0
        for e in range(bond_u.shape[0]):
            u = bond_u[e]
            v = bond_v[e]
            dx = out[u, 0] - out[v, 0]
            dy = out[u, 1] - out[v, 1]
            dz = out[u, 2] - out[v, 2]
            dist = np.sqrt(dx * dx + dy * dy + dz * dz)
            if dist < 1e-12:
                dist = 1e-12
            coef = 2.0 * (dist - rest_len[e]) / dist
            grad[u, 0] += coef * dx
            grad[u, 1] += coef * dy
            grad[u, 2] += coef * dz
            grad[v, 0] -= coef * dx
            grad[v, 1] -= coef * dy
            grad[v, 2] -= coef * dz
        for i in range(n):
            for j in range(n):
                if i == j or bonded[i, j]:
                    continue
                dx = out[i, 0] - out[j, 0]
                dy = out[i, 1] - out[j, 1]
                dz = out[i, 2] - out[j, 2]
                d = np.sqrt(dx * dx + dy * dy + dz * dz)
                if d < 1e-6:
                    d = 1e-6
                if d < rep_radius:
                    rc = -2.0 * rep_k * (rep_radius - d) / d
                    grad[i, 0] += rc * dx
                    grad[i, 1] += rc * dy
                    grad[i, 2] += rc * dz
        for i in range(n):
            out[i, 0] -= step * grad[i, 0]
            out[i, 1] -= step * grad[i, 1]
            out[i, 2] -= step * grad[i, 2]
    return out


@njit(cache=True, inline="always")
def _popcount64(x):
    # SWAR popcount on one uint64
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + (
        (x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def pairwise_tanimoto_packed(a_packed, b_packed):
    n = a_packed.shape[0]
    m = b_packed.shape[0]
    w = a_packed.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    a_pop = np.zeros(n, dtype=np.int64)
    b_pop = np.zeros(m, dtype=np.int64)
    for i in range(n):
        for k in range(w):
            a_pop[i] += _popcount64(a_packed[i, k])
    for j in range(m):
        for k in range(w):
            b_pop[j] += _popcount64(b_packed[j, k])
    for i in range(n):
        for j in range(m):
            inter = 0
            for k in range(w):
                inter += _popcount64(a_packed[i, k] & b_packed[j, k])
            union = a_pop[i] + b_pop[j] - inter
            if union == 0:
                out[i, j] = 1.0
            else:
                out[i, j] = inter / union
    return out


@njit(cache=True, inline="always")
def _heap_push(keys, ids, size, key, ident):
    i = size
    keys[i] = key
    ids[i] = ident
    while i > 0:
        parent = (i - 1) // 2
        if keys[parent] <= keys[i]:
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        ids[parent], ids[i] = ids[i], ids[parent]
        i = parent
    return size + 1


@njit(cache=True, inline="always")
def _heap_pop(keys, ids, size):
    top_key = keys[0]
    top_id = ids[0]
    size -= 1
    keys[0] = keys[size]
    ids[0] = ids[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        right = left + 1
        smallest = left
        if right < size and keys[right] < keys[left]:
            smallest = right
        if keys[i] <= keys[smallest]:
            break
        keys[smallest], keys[i] = keys[i], keys[smallest]
        ids[smallest], ids[i] = ids[i], ids[smallest]
        i = smallest
    return top_key, top_id, size


@njit(cache=True)
def hnsw_search_layer(vectors, neighbors, counts, entry_ids, entry_sims,
                      query, ef, visited):
    max_heap = ef + neighbors.shape[1] + entry_ids.shape[0] + 1
    # results: min-heap on similarity, capped at ef entries
    res_keys = np.empty(max_heap, dtype=np.float64)
    res_ids = np.empty(max_heap, dtype=np.int64)
    res_size = 0
    # candidates: min-heap on negated similarity (i.e. max-heap)
    cand_cap = max(4 * max_heap, 64)
    cand_keys = np.empty(cand_cap, dtype=np.float64)
    cand_ids = np.empty(cand_cap, dtype=np.int64)
    cand_size = 0

    for e in range(entry_ids.shape[0]):
        res_size = _heap_push(res_keys, res_ids, res_size,
                              entry_sims[e], entry_ids[e])
        cand_size = _heap_push(cand_keys, cand_ids, cand_size,
                               -entry_sims[e], entry_ids[e])

    dim = query.shape[0]
    while cand_size > 0:
        neg_sim, cid, cand_size = _heap_pop(cand_keys, cand_ids, cand_size)
        if res_size >= ef and -neg_sim < res_keys[0]:
            break
        cnt = counts[cid]
        for k in range(cnt):
            nb = neighbors[cid, k]
            if visited[nb]:
                continue
            visited[nb] = 1
            sim = 0.0
            for d in range(dim):
                sim += query[d] * vectors[nb, d]
            if res_size < ef or sim > res_keys[0]:
                res_size = _heap_push(res_keys, res_ids, res_size, sim, nb)
                if cand_size >= cand_cap:
                    new_cap = cand_cap * 2
                    new_keys = np.empty(new_cap, dtype=np.float64)
                    new_ids = np.empty(new_cap, dtype=np.int64)
                    new_keys[:cand_size] = cand_keys[:cand_size]
                    new_ids[:cand_size] = cand_ids[:cand_size]
                    cand_keys = new_keys
                    cand_ids = new_ids
                    cand_cap = new_cap
                cand_size = _heap_push(cand_keys, cand_ids, cand_size,
                                       -sim, nb)
                if res_size > ef:
                    _, _, res_size = _heap_pop(res_keys, res_ids, res_size)

    ids = np.empty(res_size, dtype=np.int64)
    sims = np.empty(res_size, dtype=np.float64)
    n_out = res_size
    for i in range(n_out - 1, -1, -1):
        sim, ident, res_size = _heap_pop(res_keys, res_ids, res_size)
        ids[i] = ident
        sims[i] = sim
    return ids, sims
