"""Multi-granularity passage chunking with SHA256 dedup.

Chunk sizes are counted against the package's own whitespace-plus-
punctuation tokenizer; a trailing partial chunk survives only when it
is at least 16 tokens (shorter tails are already covered by the
previous chunk's overlap).
"""

import hashlib
import re
from dataclasses import dataclass, field

GRANULARITIES = (512, 256, 128)
OVERLAPS = (64, 48, 32)
MIN_TAIL = 16

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class EmptyDocumentError(ValueError):
    pass


def simple_tokenize(text):
    """Lowercased word and punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class EvidenceChunk:
    doc_id: str
    granularity: int
    overlap: int
    span: tuple                  # (start_token, end_token)
    text: str
    sha256: str
    embedding: object = None
    scores: dict = field(default_factory=dict)

    @property
    def n_tokens(self):
        return self.span[1] - self.span[0]


def _hash(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def chunk_document(text, doc_id, granularity, overlap, min_tail=MIN_TAIL):
    """Overlapping spans covering [0, len(tokens)) at one granularity."""
    tokens = simple_tokenize(text) if isinstance(text, str) else list(text)
    if not tokens:
        raise EmptyDocumentError(f"document {doc_id!r} has no tokens")
    if overlap >= granularity:
        raise ValueError("overlap must be smaller than granularity")
    stride = granularity - overlap
    n = len(tokens)
    chunks = []
    start = 0
    while start < n:
        end = min(start + granularity, n)
        is_final = end >= n
        if is_final and start > 0 and end - start < min_tail:
            break   # tail already covered by the previous chunk's overlap
        body = " ".join(tokens[start:end])
        chunks.append(EvidenceChunk(
            doc_id=doc_id, granularity=granularity, overlap=overlap,
            span=(start, end), text=body, sha256=_hash(body)))
        if is_final:
            break
        start += stride
    return chunks


def chunk_all_granularities(text, doc_id, granularities=GRANULARITIES,
                            overlaps=OVERLAPS):
    chunks = []
    for granularity, overlap in zip(granularities, overlaps):
        chunks.extend(chunk_document(text, doc_id, granularity, overlap))
    return chunks


def dedup(chunks):
    """Keep the first occurrence per content hash, preserving order."""
    seen = set()
    out = []
    for chunk in chunks:
        if chunk.sha256 in seen:
            continue
        seen.add(chunk.sha256)
        out.append(chunk)
    return out
