"""Retrieval-augmented evidence engine."""

from .bm25 import B, K1, CorpusStats, bm25
from .chunker import (
    GRANULARITIES,
    MIN_TAIL,
    OVERLAPS,
    EmptyDocumentError,
    EvidenceChunk,
    chunk_all_granularities,
    chunk_document,
    dedup,
    simple_tokenize,
)
from .connectors import (
    SOURCE_NAMES,
    SOURCE_TABLE,
    FailingConnector,
    FixtureConnector,
    LiveConnector,
    SourceStatus,
    WebResult,
    fetch_web,
    score_web_results,
)
from .corpus import DocumentRecord, EvidenceEngine, load_manifest
from .embedder import (
    ExternalEmbeddingProvider,
    HashedBowEmbedder,
    ProviderError,
    call_with_retry,
    embed_chunk,
)
from .hnsw import DuplicateIdError, EmptyIndexError, HnswIndex, \
    brute_force_topk
from .rewrite import DEFAULT_YEAR_RANGE, load_abbreviations, rewrite_query
from .scoring import (
    RERANK_TOP,
    RERANK_WINDOW,
    NegativeAgeError,
    minmax_normalize,
    rerank,
    token_overlap_f1,
    web_score,
)

__all__ = [
    "B", "CorpusStats", "DEFAULT_YEAR_RANGE", "DocumentRecord",
    "DuplicateIdError", "EmptyDocumentError", "EmptyIndexError",
    "EvidenceChunk", "EvidenceEngine", "ExternalEmbeddingProvider",
    "FailingConnector", "FixtureConnector", "GRANULARITIES",
    "HashedBowEmbedder", "HnswIndex", "K1", "LiveConnector", "MIN_TAIL",
    "NegativeAgeError", "OVERLAPS", "ProviderError", "RERANK_TOP",
    "RERANK_WINDOW", "SOURCE_NAMES", "SOURCE_TABLE", "SourceStatus",
    "WebResult", "bm25", "brute_force_topk", "call_with_retry",
    "chunk_all_granularities", "chunk_document", "dedup", "embed_chunk",
    "fetch_web", "load_abbreviations", "load_manifest", "minmax_normalize",
    "rerank", "rewrite_query", "score_web_results", "simple_tokenize",
    "token_overlap_f1", "web_score",
]
