"""Web-search connectors for the seven literature sources.

Each connector parses its source's native response format; live mode
talks HTTP with a per-source timeout, offline mode replays recorded
fixture files through the same parsers. Failures are captured per
source and never abort the batch.
"""

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

UNKNOWN_AGE_YEARS = 100.0


@dataclass
class WebResult:
    source: str
    title: str
    snippet: str
    year: int                   # None when the source omits it
    delta_t: float
    trusted: bool
    text: str
    identifier: str = ""
    score: float = 0.0


@dataclass
class SourceStatus:
    source: str
    ok: bool
    error: str = ""
    n_results: int = 0


def _first(value):
    if isinstance(value, list):
        return value[0] if value else ""
    return value or ""


def parse_crossref(raw):
    data = json.loads(raw)
    items = data.get("message", {}).get("items", [])
    out = []
    for item in items:
        year = None
        parts = item.get("issued", {}).get("date-parts", [])
        if parts and parts[0]:
            year = parts[0][0]
        abstract = item.get("abstract", "")
        out.append({"title": _first(item.get("title")), "year": year,
                    "identifier": item.get("DOI", ""),
                    "snippet": abstract, "text": abstract})
    return out


def parse_arxiv(raw):
    ns = {"atom": "http://www.w3.org/2005/Atom"}
    root = ET.fromstring(raw)
    out = []
    for entry in root.findall("atom:entry", ns):
        title = (entry.findtext("atom:title", "", ns) or "").strip()
        summary = (entry.findtext("atom:summary", "", ns) or "").strip()
        published = entry.findtext("atom:published", "", ns) or ""
        year = int(published[:4]) if published[:4].isdigit() else None
        ident = entry.findtext("atom:id", "", ns) or ""
        out.append({"title": title, "year": year, "identifier": ident,
                    "snippet": summary, "text": summary})
    return out


def _invert_openalex_abstract(inverted):
    if not inverted:
        return ""
    positions = {}
    for word, idxs in inverted.items():
        for i in idxs:
            positions[i] = word
    return " ".join(positions[i] for i in sorted(positions))


def parse_openalex(raw):
    data = json.loads(raw)
    out = []
    for item in data.get("results", []):
        abstract = item.get("abstract") or _invert_openalex_abstract(
            item.get("abstract_inverted_index"))
        out.append({"title": item.get("title", ""),
                    "year": item.get("publication_year"),
                    "identifier": item.get("doi", "") or "",
                    "snippet": abstract, "text": abstract})
    return out


def parse_europepmc(raw):
    data = json.loads(raw)
    items = data.get("resultList", {}).get("result", [])
    out = []
    for item in items:
        year = item.get("pubYear")
        out.append({"title": item.get("title", ""),
                    "year": int(year) if year else None,
                    "identifier": item.get("doi", "") or "",
                    "snippet": item.get("abstractText", ""),
                    "text": item.get("abstractText", "")})
    return out


def parse_semanticscholar(raw):
    data = json.loads(raw)
    out = []
    for item in data.get("data", []):
        ids = item.get("externalIds") or {}
        out.append({"title": item.get("title", ""),
                    "year": item.get("year"),
                    "identifier": ids.get("DOI", "") or "",
                    "snippet": item.get("abstract") or "",
                    "text": item.get("abstract") or ""})
    return out


def parse_springer(raw):
    data = json.loads(raw)
    out = []
    for item in data.get("records", []):
        date = item.get("publicationDate", "")
        year = int(date[:4]) if date[:4].isdigit() else None
        out.append({"title": item.get("title", ""), "year": year,
                    "identifier": item.get("doi", "") or "",
                    "snippet": item.get("abstract", ""),
                    "text": item.get("abstract", "")})
    return out


def parse_ias(raw):
    data = json.loads(raw)
    out = []
    for item in data.get("results", []):
        biblio = item.get("biblio", {})
        abstracts = item.get("abstracts") or []
        body = abstracts[0].get("body", "") if abstracts else ""
        out.append({"title": biblio.get("title", ""),
                    "year": biblio.get("release_year"),
                    "identifier": biblio.get("doi", "") or "",
                    "snippet": body, "text": body})
    return out


# source name -> (parser, trusted flag: peer-reviewed venue indicator)
SOURCE_TABLE = {
    "crossref": (parse_crossref, True),
    "arxiv": (parse_arxiv, False),
    "openalex": (parse_openalex, False),
    "europepmc": (parse_europepmc, True),
    "semanticscholar": (parse_semanticscholar, False),
    "springer": (parse_springer, True),
    "ias": (parse_ias, False),
}

SOURCE_NAMES = tuple(SOURCE_TABLE)


@dataclass
class FixtureConnector:
    """Replays a recorded response file through the real parser."""

    name: str
    path: str
    trusted: bool = None

    def __post_init__(self):
        if self.trusted is None:
            self.trusted = SOURCE_TABLE[self.name][1]

    def fetch(self, query):
        with open(self.path, "rb") as f:
            raw = f.read()
        return SOURCE_TABLE[self.name][0](raw)


@dataclass
class LiveConnector:
    """HTTP connector; endpoint receives the query via str.format."""

    name: str
    endpoint: str
    timeout: float = 10.0
    api_key: str = ""
    trusted: bool = None

    def __post_init__(self):
        if self.trusted is None:
            self.trusted = SOURCE_TABLE[self.name][1]

    def fetch(self, query):
        import requests

        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = self.endpoint.format(query=requests.utils.quote(query))
        resp = requests.get(url, timeout=self.timeout, headers=headers)
        resp.raise_for_status()
        return SOURCE_TABLE[self.name][0](resp.content)


@dataclass
class FailingConnector:
    """Used to represent an offline source in tests."""

    name: str
    trusted: bool = False
    message: str = "offline"

    def fetch(self, query):
        raise ConnectionError(self.message)


def fetch_web(query, connectors, now_year, max_per_source=3):
    """Query every connector; cap results and record per-source status."""
    results = []
    statuses = []
    for connector in connectors:
        try:
            items = connector.fetch(query)
        except Exception as exc:
            statuses.append(SourceStatus(source=connector.name, ok=False,
                                         error=str(exc)))
            continue
        kept = items[:max_per_source]
        for item in kept:
            year = item.get("year")
            delta_t = (max(0.0, float(now_year - year))
                       if year else UNKNOWN_AGE_YEARS)
            results.append(WebResult(
                source=connector.name, title=item.get("title", ""),
                snippet=item.get("snippet", ""), year=year,
                delta_t=delta_t, trusted=connector.trusted,
                text=item.get("text", ""),
                identifier=item.get("identifier", "")))
        statuses.append(SourceStatus(source=connector.name, ok=True,
                                     n_results=len(kept)))
    return results, statuses


def score_web_results(query, results):
    """Eq-style weighted scoring with per-batch BM25 normalization."""
    from .bm25 import CorpusStats, bm25
    from .scoring import minmax_normalize, web_score

    if not results:
        return results
    stats = CorpusStats.build([r.snippet for r in results])
    raw = [bm25(query, r.snippet, stats) for r in results]
    norm = minmax_normalize(raw)
    for r, n in zip(results, norm):
        r.score = web_score(n, r.delta_t, r.trusted)
    results.sort(key=lambda r: -r.score)
    return results
