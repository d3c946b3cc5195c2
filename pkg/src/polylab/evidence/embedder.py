"""Chunk embedding providers.

The deterministic local fallback hashes bag-of-words term frequencies
into a fixed-dimension vector and unit-normalizes; an external provider
can be plugged in behind the same interface (with retry policy).
"""

import hashlib
import time

import numpy as np

from .chunker import simple_tokenize


class ProviderError(RuntimeError):
    pass


class HashedBowEmbedder:
    """TF-weighted hashed bag-of-words, l2-normalized; fully offline."""

    def __init__(self, dim=256):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim

    def _bucket(self, token):
        digest = hashlib.md5(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little") % self.dim

    def embed(self, text):
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in simple_tokenize(text):
            vec[self._bucket(token)] += 1.0
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        return vec / norm


class ExternalEmbeddingProvider:
    """JSON-over-HTTP embedding service ({"text": ...} -> {"embedding":
    [...]}); network failures surface as ProviderError."""

    def __init__(self, endpoint, dim=1536, timeout=10.0, api_key=None):
        self.endpoint = endpoint
        self.dim = dim
        self.timeout = timeout
        self.api_key = api_key

    def embed(self, text):
        import requests

        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(self.endpoint, json={"text": text},
                                 headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            vec = np.asarray(resp.json()["embedding"], dtype=np.float64)
        except Exception as exc:
            raise ProviderError(str(exc)) from exc
        if vec.shape != (self.dim,):
            raise ProviderError(
                f"provider returned dim {vec.shape}, expected {self.dim}")
        return vec


def call_with_retry(fn, attempts=3, base_delay=0.2, sleep=time.sleep):
    """Retry ProviderError with exponential backoff; re-raise after that."""
    last = None
    for attempt in range(attempts):
        try:
            return fn()
        except ProviderError as exc:
            last = exc
            if attempt < attempts - 1:
                sleep(base_delay * (2 ** attempt))
    raise last


def embed_chunk(chunk, provider, attempts=3, sleep=time.sleep):
    chunk.embedding = call_with_retry(lambda: provider.embed(chunk.text),
                                      attempts=attempts, sleep=sleep)
    return chunk
