"""Pure-NumPy reference implementations of the hot kernels."""

import heapq

import numpy as np


def relax_coordinates(coords, bond_u, bond_v, rest_len, rep_radius, rep_k,
                      step, n_iter):
    """Gradient relaxation of harmonic bonds plus soft-sphere repulsion.

    Bonded pairs feel a spring toward ``rest_len``; non-bonded pairs
    closer than ``rep_radius`` are pushed apart quadratically. Fixed
    step count, deterministic for fixed inputs.
    """
    coords = coords.copy()
    n = coords.shape[0]
    if n < 2:
        return coords
    bonded = np.zeros((n, n), dtype=bool)
    bonded[bond_u, bond_v] = True
    bonded[bond_v, bond_u] = True
    np.fill_diagonal(bonded, True)

    for _ in range(n_iter):
        grad = np.zeros_like(coords)
        # harmonic bond term: (d - rest)^2
        delta = coords[bond_u] - coords[bond_v]
        dist = np.sqrt(np.sum(delta * delta, axis=1))
        dist = np.maximum(dist, 1e-12)
        coef = (2.0 * (dist - rest_len) / dist)[:, None]
        np.add.at(grad, bond_u, coef * delta)
        np.add.at(grad, bond_v, -coef * delta)
        # repulsion term: rep_k * (rep_radius - d)^2 for close non-bonded pairs
        diff = coords[:, None, :] - coords[None, :, :]
        d2 = np.sum(diff * diff, axis=2)
        d = np.sqrt(np.maximum(d2, 1e-12))
        close = (~bonded) & (d < rep_radius)
        if np.any(close):
            rc = np.where(close, -2.0 * rep_k * (rep_radius - d) / d, 0.0)
            grad += np.sum(rc[:, :, None] * diff, axis=1)
        coords -= step * grad
    return coords


def _unpack_popcount(x):
    # np.bitwise_count handles uint64 elementwise
    return np.bitwise_count(x).astype(np.int64)


def pairwise_tanimoto_packed(a_packed, b_packed):
    """Tanimoto similarity between rows of two packed-uint64 bit matrices.

    Returns an (n, m) float64 matrix. All-zero vs all-zero pairs score 1.0.
    """
    n = a_packed.shape[0]
    m = b_packed.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    b_pop = _unpack_popcount(b_packed).sum(axis=1)
    for i in range(n):
        inter = _unpack_popcount(a_packed[i][None, :] & b_packed).sum(axis=1)
        a_pop = _unpack_popcount(a_packed[i]).sum()
        union = a_pop + b_pop - inter
        row = np.where(union == 0, 1.0, inter / np.maximum(union, 1))
        out[i] = row
    return out


def hnsw_search_layer(vectors, neighbors, counts, entry_ids, entry_sims,
                      query, ef, visited):
    """Best-first beam search over one graph layer.

    ``vectors`` holds unit vectors, similarity is the dot product.
    Returns (ids, sims) sorted by descending similarity, at most ``ef``
    entries. ``visited`` is a reusable uint8 scratch array; entries listed
    in ``entry_ids`` must already be marked visited by the caller.
    """
    results = []   # min-heap of (sim, id)
    candidates = []  # max-heap via negated sim
    for eid, esim in zip(entry_ids, entry_sims):
        heapq.heappush(results, (esim, int(eid)))
        heapq.heappush(candidates, (-esim, int(eid)))
    while candidates:
        neg_sim, cid = heapq.heappop(candidates)
        if len(results) >= ef and -neg_sim < results[0][0]:
            break
        cnt = counts[cid]
        for k in range(cnt):
            nb = int(neighbors[cid, k])
            if visited[nb]:
                continue
            visited[nb] = 1
            sim = float(np.dot(query, vectors[nb]))
            if len(results) < ef or sim > results[0][0]:
                heapq.heappush(results, (sim, nb))
                heapq.heappush(candidates, (-sim, nb))
                if len(results) > ef:
                    heapq.heappop(results)
    results.sort(reverse=True)
    ids = np.array([r[1] for r in results], dtype=np.int64)
    sims = np.array([r[0] for r in results], dtype=np.float64)
    return ids, sims
