"""Rule-based query rewriting: abbreviation expansion + year range."""

import importlib.resources
import re

DEFAULT_YEAR_RANGE = "2015..2025"


def load_abbreviations():
    ref = importlib.resources.files("polylab.evidence").joinpath(
        "data/abbreviations.txt")
    table = {}
    for line in ref.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        abbrev, expansion = line.split("\t")
        table[abbrev] = expansion
    return table


_TABLE = None


def rewrite_query(text, year_range=DEFAULT_YEAR_RANGE, table=None):
    """Deterministic, idempotent expansion of known abbreviations.

    Each known abbreviation becomes "<abbrev> (<expansion>)" once; a
    year-range clause is appended when absent (pass ``year_range=None``
    to skip).
    """
    global _TABLE
    if table is None:
        if _TABLE is None:
            _TABLE = load_abbreviations()
        table = _TABLE
    out = text
    for abbrev, expansion in table.items():
        if expansion.lower() in out.lower():
            continue
        pattern = rf"\b{re.escape(abbrev)}\b"
        out = re.sub(pattern, f"{abbrev} ({expansion})", out, count=1)
    if year_range and year_range not in out:
        out = f"{out} {year_range}"
    return out
