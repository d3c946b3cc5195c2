import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polylab import evidence as ev

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


# ----------------------------------------------------------------- chunker

def test_chunk_hand_enumeration():
    tokens = [f"t{i}" for i in range(1000)]
    chunks = ev.chunk_document(tokens, "d", 512, 64)
    assert [c.span for c in chunks] == [(0, 512), (448, 960), (896, 1000)]


def test_chunk_short_document():
    chunks = ev.chunk_document([f"t{i}" for i in range(100)], "d", 512, 64)
    assert [c.span for c in chunks] == [(0, 100)]


def test_chunk_empty_document():
    with pytest.raises(ev.EmptyDocumentError):
        ev.chunk_document("", "d", 512, 64)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=1500),
       st.sampled_from([(512, 64), (256, 48), (128, 32)]))
def test_chunk_coverage_property(n_tokens, pair):
    granularity, overlap = pair
    tokens = [f"t{i}" for i in range(n_tokens)]
    chunks = ev.chunk_document(tokens, "d", granularity, overlap)
    covered = set()
    for c in chunks:
        covered.update(range(*c.span))
    assert covered == set(range(n_tokens))
    stride = granularity - overlap
    for a, b in zip(chunks, chunks[1:]):
        assert b.span[0] - a.span[0] == stride
        if b.span[1] - b.span[0] == granularity:
            assert a.span[1] - b.span[0] == overlap


def test_dedup_keeps_first_and_is_idempotent():
    chunks = ev.chunk_document([f"t{i % 4}" for i in range(40)], "d", 8, 4)
    deduped = ev.dedup(chunks)
    hashes = [c.sha256 for c in deduped]
    assert len(hashes) == len(set(hashes))
    assert [c.sha256 for c in ev.dedup(deduped)] == hashes


def test_dedup_one_byte_difference():
    a = ev.chunk_document(["alpha", "beta"], "d", 8, 2)[0]
    b = ev.chunk_document(["alpha", "betb"], "d", 8, 2)[0]
    assert a.sha256 != b.sha256
    assert len(ev.dedup([a, b])) == 2


# ---------------------------------------------------------------- embedder

def test_embedder_deterministic_and_unit():
    emb = ev.HashedBowEmbedder(dim=64)
    a = emb.embed("polymer glass transition")
    b = emb.embed("polymer glass transition")
    assert np.array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-12
    assert a.shape == (64,)


def test_embedder_semantic_ordering():
    emb = ev.HashedBowEmbedder(dim=128)
    base = emb.embed("polymer glass transition")
    close = emb.embed("polymer glass transition temperature")
    far = emb.embed("network packet routing")
    assert base @ close > base @ far


def test_retry_policy():
    calls = {"n": 0}

    def flaky():
        calls["n"] += 1
        if calls["n"] < 3:
            raise ev.ProviderError("down")
        return "ok"

    sleeps = []
    assert ev.call_with_retry(flaky, attempts=3,
                              sleep=sleeps.append) == "ok"
    assert calls["n"] == 3
    assert sleeps == [0.2, 0.4]

    with pytest.raises(ev.ProviderError):
        ev.call_with_retry(lambda: (_ for _ in ()).throw(
            ev.ProviderError("always")), attempts=2, sleep=lambda s: None)


# -------------------------------------------------------------------- hnsw

def test_hnsw_exact_hit_and_duplicate(rng):
    index = ev.HnswIndex(8, m=8, ef_construction=40, seed=0)
    vectors = rng.normal(size=(100, 8))
    for i, vec in enumerate(vectors):
        index.insert(f"v{i}", vec)
    hits = index.search(vectors[42], k=1, ef_search=64)
    assert hits[0][0] == "v42"
    assert abs(hits[0][1] - 1.0) < 1e-9
    with pytest.raises(ev.DuplicateIdError):
        index.insert("v42", vectors[0])


def test_hnsw_k_larger_than_index(rng):
    index = ev.HnswIndex(4, m=4, ef_construction=20, seed=0)
    for i in range(5):
        index.insert(i, rng.normal(size=4))
    hits = index.search(rng.normal(size=4), k=50, ef_search=50)
    assert len(hits) == 5
    sims = [s for _, s in hits]
    assert sims == sorted(sims, reverse=True)


def test_hnsw_empty_search():
    index = ev.HnswIndex(4)
    with pytest.raises(ev.EmptyIndexError):
        index.search(np.ones(4), k=1)


def test_hnsw_recall_small(rng):
    index = ev.HnswIndex(16, m=16, ef_construction=100, seed=1)
    vectors = rng.normal(size=(800, 16))
    ids = [f"n{i}" for i in range(800)]
    for ident, vec in zip(ids, vectors):
        index.insert(ident, vec)
    recalls = []
    for q in range(40):
        query = rng.normal(size=16)
        approx = {i for i, _ in index.search(query, k=10, ef_search=96)}
        exact = {i for i, _ in ev.brute_force_topk(vectors, ids, query, 10)}
        recalls.append(len(approx & exact) / 10)
    assert float(np.mean(recalls)) >= 0.95


def test_hnsw_persistence_roundtrip(tmp_path, rng):
    index = ev.HnswIndex(8, m=8, ef_construction=40, seed=3)
    vectors = rng.normal(size=(60, 8))
    for i, vec in enumerate(vectors):
        index.insert(f"v{i}", vec)
    path = tmp_path / "index.bin"
    index.save(path)
    loaded = ev.HnswIndex.load(path)
    assert len(loaded) == 60
    query = rng.normal(size=8)
    assert loaded.search(query, k=7, ef_search=48) == \
        index.search(query, k=7, ef_search=48)


# -------------------------------------------------------------------- bm25

def _bm25_reference(query_terms, doc_tokens, corpus, k1=1.2, b=0.75):
    """Deliberately independent Okapi implementation for cross-checking."""
    n = len(corpus)
    avg = sum(len(d) for d in corpus) / n
    score = 0.0
    for term in query_terms:
        tf = doc_tokens.count(term)
        if tf == 0:
            continue
        df = sum(1 for d in corpus if term in d)
        idf = max(0.0, math.log((n - df + 0.5) / (df + 0.5)))
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b
                                                   + b * len(doc_tokens)
                                                   / avg))
    return score


def test_bm25_zero_when_absent():
    stats = ev.CorpusStats.build([["a", "b"], ["c"]])
    assert ev.bm25(["zz"], ["a", "b"], stats) == 0.0


def test_bm25_single_doc_hand_value():
    doc = ["tg", "rises", "tg", "falls"]
    stats = ev.CorpusStats.build([doc])
    mine = ev.bm25(["tg"], doc, stats)
    ref = _bm25_reference(["tg"], doc, [doc])
    assert abs(mine - ref) < 1e-12


def test_bm25_tf_monotonicity():
    corpus = [["x"] * 8, ["y"] * 8]
    stats = ev.CorpusStats.build(corpus)
    scores = [ev.bm25(["x"], ["x"] * tf + ["z"] * (8 - tf), stats)
              for tf in range(1, 8)]
    assert all(b >= a for a, b in zip(scores, scores[1:]))


def test_bm25_matches_independent_reimplementation(rng):
    words = [f"w{i}" for i in range(30)]
    corpus = [[words[int(rng.integers(30))]
               for _ in range(int(rng.integers(3, 40)))]
              for _ in range(25)]
    stats = ev.CorpusStats.build(corpus)
    for _ in range(200):
        query = [words[int(rng.integers(30))]
                 for _ in range(int(rng.integers(1, 5)))]
        doc = corpus[int(rng.integers(len(corpus)))]
        assert abs(ev.bm25(query, doc, stats)
                   - _bm25_reference(query, doc, corpus)) < 1e-10


# --------------------------------------------------------------- web score

def test_web_score_hand_cases():
    assert abs(ev.web_score(1.0, 0.0, True) - 1.0) < 1e-12
    assert ev.web_score(0.0, 1e9, False) < 1e-12
    expected = 0.3 + 0.3 * math.exp(-1.0)
    assert abs(ev.web_score(0.5, 2.0, False) - expected) < 1e-12
    with pytest.raises(ev.NegativeAgeError):
        ev.web_score(0.5, -1.0, False)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.0, max_value=50.0),
       st.floats(min_value=0.0, max_value=1.0),
       st.booleans())
def test_web_score_bounds(delta_t, bm25_norm, trusted):
    score = ev.web_score(bm25_norm, delta_t, trusted)
    assert 0.0 <= score <= 1.0 + 1e-12
    older = ev.web_score(bm25_norm, delta_t + 1.0, trusted)
    assert older < score


# ----------------------------------------------------------------- rerank

def _chunk(text):
    return ev.chunk_document(text, "d", 512, 64)[0]


def test_rerank_query_echo_first():
    query = "glass transition of polyesters"
    chunks = [_chunk("totally unrelated content here"),
              _chunk(query),
              _chunk("glass bottles on a shelf")]
    top = ev.rerank(query, chunks)
    assert top[0].text == ev.chunk_document(query, "d", 512, 64)[0].text


def test_rerank_few_chunks_returned_ordered():
    chunks = [_chunk("alpha beta"), _chunk("alpha")]
    top = ev.rerank("alpha beta gamma", chunks, top=5)
    assert len(top) == 2
    assert top[0].scores["rerank"] >= top[1].scores["rerank"]


def test_rerank_hand_f1_ordering():
    query = "a b c d e"
    texts = ["a b c d e x", "a b q q q", "a q q q q q q q q"]
    f1s = [ev.token_overlap_f1(query, t) for t in texts]
    assert f1s[0] > f1s[1] > f1s[2]
    top = ev.rerank(query, [_chunk(t) for t in texts[::-1]])
    assert [c.text for c in top] == texts


# ----------------------------------------------------------------- rewrite

def test_rewrite_expands_and_is_idempotent():
    out = ev.rewrite_query("Tg of PLA")
    assert "glass transition temperature" in out
    assert "polylactic acid" in out
    assert ev.rewrite_query(out) == out


def test_rewrite_unknown_text():
    out = ev.rewrite_query("oxygen barrier films", year_range=None)
    assert out == "oxygen barrier films"
    out2 = ev.rewrite_query("oxygen barrier films")
    assert out2.startswith("oxygen barrier films")
    assert ev.DEFAULT_YEAR_RANGE in out2


# -------------------------------------------------------------- connectors

def _fixture_connectors():
    web_dir = os.path.join(FIXTURES, "web")
    connectors = []
    for name in ev.SOURCE_NAMES:
        ext = "xml" if name == "arxiv" else "json"
        connectors.append(ev.FixtureConnector(
            name, os.path.join(web_dir, f"{name}.{ext}")))
    return connectors


def test_fetch_web_fixture_replay():
    results, statuses = ev.fetch_web("polymer", _fixture_connectors(),
                                     now_year=2026)
    assert all(s.ok for s in statuses)
    by_source = {}
    for res in results:
        by_source.setdefault(res.source, []).append(res)
    assert len(by_source["crossref"]) == 3     # capped from 4 records
    arxiv = by_source["arxiv"]
    assert len(arxiv) == 3
    assert {r.year for r in arxiv} == {2024, 2023, 2022}
    assert arxiv[0].delta_t == 2026 - 2024
    openalex = by_source["openalex"][0]
    assert "Humidity raises segmental mobility" in openalex.text


def test_fetch_web_all_sources_offline():
    connectors = [ev.FailingConnector(name) for name in ev.SOURCE_NAMES]
    results, statuses = ev.fetch_web("anything", connectors, now_year=2026)
    assert results == []
    assert len(statuses) == 7
    assert all(not s.ok for s in statuses)


def test_score_web_results_ordering():
    results, _ = ev.fetch_web("glass transition of aromatic polyesters",
                              _fixture_connectors(), now_year=2026)
    scored = ev.score_web_results(
        "glass transition of aromatic polyesters", results)
    scores = [r.score for r in scored]
    assert scores == sorted(scores, reverse=True)
    assert all(0.0 <= s <= 1.0 for s in scores)


# ------------------------------------------------------------------ engine

def test_engine_build_and_retrieve():
    docs = ev.load_manifest(os.path.join(FIXTURES, "corpus",
                                         "manifest.tsv"))
    assert len(docs) == 4
    engine = ev.EvidenceEngine(provider=ev.HashedBowEmbedder(dim=64),
                               granularities=(64, 32), overlaps=(16, 8),
                               m=8, ef_construction=40)
    engine.build(docs)
    hits = engine.retrieve("glass transition temperature of aromatic "
                           "polyester films", k=20, ef_search=40, top=3)
    assert hits
    assert hits[0].doc_id == "doc1"
    citation = engine.citation_for(hits[0])
    assert citation["year"] == 2021
    assert citation["identifier"] == "10.9000/doc1"


def test_document_record_year_guard():
    with pytest.raises(ValueError):
        ev.DocumentRecord(id="x", year=1500)
