"""Polymer parsing, validation, and featurization into four views."""

from .canonical import canonical_key, serialize, to_psmiles
from .conformer import (
    Conformer,
    embed_conformer,
    load_conformer_sidecar,
    save_conformer_sidecar,
)
from .dataset import (
    PolymerRecord,
    featurize_dataset,
    featurize_record,
    load_dataset,
    save_dataset,
    validate_dataset,
)
from .errors import (
    ChemError,
    EmbedFailure,
    LengthMismatchError,
    PsmilesSyntaxError,
    UnknownTokenError,
    ValenceError,
    WildcardCountError,
)
from .fingerprint import (
    Fingerprint,
    compute_ecfp,
    pack_fingerprints,
    tanimoto,
)
from .graph import (
    TERMINUS_Z,
    WILDCARD_Z,
    Atom,
    Bond,
    PolymerGraph,
    substitute_terminus,
)
from .psmiles import parse_psmiles
from .synthetic import random_psmiles, synthesize_corpus
from .tokenizer import TokenSeq, TokenVocabulary, detokenize, tokenize

__all__ = [
    "Atom", "Bond", "ChemError", "Conformer", "EmbedFailure", "Fingerprint",
    "LengthMismatchError", "PolymerGraph", "PolymerRecord",
    "PsmilesSyntaxError", "TERMINUS_Z", "TokenSeq", "TokenVocabulary",
    "UnknownTokenError", "ValenceError", "WILDCARD_Z", "WildcardCountError",
    "canonical_key", "compute_ecfp", "detokenize", "embed_conformer",
    "featurize_dataset", "featurize_record", "load_conformer_sidecar",
    "load_dataset", "pack_fingerprints", "parse_psmiles", "random_psmiles",
    "save_conformer_sidecar", "save_dataset", "serialize",
    "substitute_terminus", "synthesize_corpus", "tanimoto", "to_psmiles",
    "validate_dataset",
]
