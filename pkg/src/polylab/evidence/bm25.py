"""Okapi BM25 with k1=1.2, b=0.75 and IDF floored at zero."""

import math
from collections import Counter
from dataclasses import dataclass, field

from .chunker import simple_tokenize

K1 = 1.2
B = 0.75


@dataclass
class CorpusStats:
    n_docs: int = 0
    doc_freq: dict = field(default_factory=dict)
    total_len: int = 0

    @property
    def avg_len(self):
        return self.total_len / self.n_docs if self.n_docs else 0.0

    @classmethod
    def build(cls, documents):
        """documents: iterable of token lists (or raw strings)."""
        stats = cls()
        for doc in documents:
            tokens = simple_tokenize(doc) if isinstance(doc, str) else doc
            stats.n_docs += 1
            stats.total_len += len(tokens)
            for term in set(tokens):
                stats.doc_freq[term] = stats.doc_freq.get(term, 0) + 1
        return stats

    def idf(self, term):
        df = self.doc_freq.get(term, 0)
        raw = math.log((self.n_docs - df + 0.5) / (df + 0.5))
        return max(0.0, raw)


def bm25(query_terms, doc_tokens, stats, k1=K1, b=B):
    """Okapi score of one document against query terms (>= 0)."""
    if isinstance(query_terms, str):
        query_terms = simple_tokenize(query_terms)
    if isinstance(doc_tokens, str):
        doc_tokens = simple_tokenize(doc_tokens)
    tf = Counter(doc_tokens)
    dl = len(doc_tokens)
    avg = stats.avg_len or 1.0
    score = 0.0
    for term in query_terms:
        f = tf.get(term, 0)
        if f == 0:
            continue
        denom = f + k1 * (1.0 - b + b * dl / avg)
        score += stats.idf(term) * f * (k1 + 1.0) / denom
    return score
