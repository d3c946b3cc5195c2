"""Local document corpus: manifest parsing and the retrieval engine."""

import os
from dataclasses import dataclass, field

from .bm25 import CorpusStats, bm25
from .chunker import chunk_all_granularities, dedup, simple_tokenize
from .embedder import HashedBowEmbedder, embed_chunk
from .hnsw import HnswIndex
from .scoring import rerank


@dataclass
class DocumentRecord:
    id: str
    title: str = ""
    authors: list = field(default_factory=list)
    year: int = None
    venue: str = ""
    identifier: str = ""
    trusted: bool = False
    text: str = ""

    def __post_init__(self):
        if self.year is not None and not 1900 <= self.year <= 2100:
            raise ValueError(f"document {self.id}: implausible year "
                             f"{self.year}")

    def citation(self):
        return {"title": self.title, "authors": list(self.authors),
                "year": self.year, "identifier": self.identifier}


def load_manifest(path, base_dir=None):
    """TSV manifest: id, title, authors(|), year, venue, identifier,
    trusted(0/1), path-to-text."""
    base_dir = base_dir or os.path.dirname(os.path.abspath(path))
    docs = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 8:
                raise ValueError(
                    f"{path}:{line_no}: expected 8 tab-separated fields")
            doc_id, title, authors, year, venue, ident, trusted, rel = parts
            text_path = os.path.join(base_dir, rel)
            with open(text_path, encoding="utf-8") as tf:
                text = tf.read()
            docs.append(DocumentRecord(
                id=doc_id, title=title,
                authors=[a for a in authors.split("|") if a],
                year=int(year) if year else None, venue=venue,
                identifier=ident, trusted=trusted == "1", text=text))
    return docs


class EvidenceEngine:
    """Chunk + dedup + embed + index a corpus; retrieve and rerank."""

    def __init__(self, provider=None, granularities=None, overlaps=None,
                 m=64, ef_construction=200, seed=0):
        self.provider = provider or HashedBowEmbedder(dim=256)
        self.granularities = granularities or (512, 256, 128)
        self.overlaps = overlaps or (64, 48, 32)
        self.m = m
        self.ef_construction = ef_construction
        self.seed = seed
        self.documents = {}
        self.chunks = []
        self.index = None
        self.stats = None

    def build(self, documents):
        self.documents = {doc.id: doc for doc in documents}
        chunks = []
        for doc in documents:
            chunks.extend(chunk_all_granularities(
                doc.text, doc.id, self.granularities, self.overlaps))
        self.chunks = dedup(chunks)
        dim = getattr(self.provider, "dim", 256)
        self.index = HnswIndex(dim, m=self.m,
                               ef_construction=self.ef_construction,
                               seed=self.seed)
        for pos, chunk in enumerate(self.chunks):
            embed_chunk(chunk, self.provider)
            self.index.insert(f"c{pos}", chunk.embedding)
        self.stats = CorpusStats.build(
            [simple_tokenize(c.text) for c in self.chunks])
        return self

    def retrieve(self, query, k=50, ef_search=128, top=5, reranker=None):
        """Cosine top-k, then rerank to the evidence context."""
        if self.index is None or len(self.index) == 0:
            return []
        qvec = self.provider.embed(query)
        hits = self.index.search(qvec, k=min(k, len(self.index)),
                                 ef_search=ef_search)
        pool = []
        for ext_id, sim in hits:
            chunk = self.chunks[int(ext_id[1:])]
            chunk.scores["cosine"] = sim
            chunk.scores["bm25"] = bm25(query, chunk.text, self.stats)
            pool.append(chunk)
        return rerank(query, pool, reranker=reranker, top=top)

    def citation_for(self, chunk):
        doc = self.documents.get(chunk.doc_id)
        return doc.citation() if doc else {"title": chunk.doc_id,
                                           "authors": [], "year": None,
                                           "identifier": ""}
