"""Relevance-recency-trust scoring and cross-encoder-style reranking."""

import math
from collections import Counter

from .chunker import simple_tokenize
from .embedder import ProviderError  # noqa: F401  (re-exported for callers)

WEIGHT_RELEVANCE = 0.6
WEIGHT_RECENCY = 0.3
WEIGHT_TRUST = 0.1
RECENCY_DECAY = 0.5
RERANK_WINDOW = 50
RERANK_TOP = 5


class NegativeAgeError(ValueError):
    pass


def web_score(bm25_norm, delta_t, trusted):
    """0.6 * relevance + 0.3 * exp(-0.5 dt) + 0.1 * trusted."""
    if delta_t < 0:
        raise NegativeAgeError(f"age {delta_t} years is negative")
    return (WEIGHT_RELEVANCE * bm25_norm
            + WEIGHT_RECENCY * math.exp(-RECENCY_DECAY * delta_t)
            + WEIGHT_TRUST * (1.0 if trusted else 0.0))


def minmax_normalize(values):
    """Scale a query batch of raw scores into [0, 1]; constant -> zeros."""
    values = list(values)
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def token_overlap_f1(query, text):
    """Multiset token-overlap F1; the built-in reranker fallback."""
    q = Counter(simple_tokenize(query) if isinstance(query, str) else query)
    t = Counter(simple_tokenize(text) if isinstance(text, str) else text)
    overlap = sum((q & t).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(t.values())
    recall = overlap / sum(q.values())
    return 2.0 * precision * recall / (precision + recall)


def rerank(query, chunks, reranker=None, window=RERANK_WINDOW,
           top=RERANK_TOP):
    """Stable-sort chunks by reranker score, keep the top few.

    ``reranker`` is any callable (query, text) -> score; the default is
    token-overlap F1. ProviderError from an external reranker
    propagates to the caller.
    """
    scorer = reranker or token_overlap_f1
    pool = list(chunks)[:window]
    scored = []
    for chunk in pool:
        score = scorer(query, chunk.text)
        chunk.scores["rerank"] = score
        scored.append((score, chunk))
    scored.sort(key=lambda pair: -pair[0])
    return [chunk for _, chunk in scored[:top]]
