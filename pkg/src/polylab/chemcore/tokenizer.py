"""Greedy longest-match tokenizer over a fixed 265-entry vocabulary.

The vocabulary ships with the package (one token per line, line number
= id) and covers element symbols, aromatic markers, bond symbols, ring
and branch punctuation, the `[*]` attachment wildcard, common bracket
atoms, and five specials. Detokenization concatenates token strings, so
tokenize/detokenize round-trips any string the vocabulary covers.
"""

import importlib.resources
from dataclasses import dataclass

from .errors import UnknownTokenError

PAD, UNK, MASK, BOS, EOS = "[PAD]", "[UNK]", "[MASK]", "<s>", "</s>"
SPECIALS = (PAD, UNK, MASK, BOS, EOS)


@dataclass(frozen=True)
class TokenSeq:
    ids: tuple
    vocab_size: int

    def __post_init__(self):
        for i in self.ids:
            if not 0 <= i < self.vocab_size:
                raise ValueError(f"token id {i} out of range")

    def __len__(self):
        return len(self.ids)


class TokenVocabulary:
    def __init__(self, tokens):
        self.tokens = list(tokens)
        if len(self.tokens) != len(set(self.tokens)):
            raise ValueError("vocabulary contains duplicate tokens")
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        for special in SPECIALS:
            if special not in self.index:
                raise ValueError(f"vocabulary is missing {special}")
        self.pad_id = self.index[PAD]
        self.unk_id = self.index[UNK]
        self.mask_id = self.index[MASK]
        self.bos_id = self.index[BOS]
        self.eos_id = self.index[EOS]
        self.wildcard_id = self.index["[*]"]
        self.special_ids = frozenset(self.index[s] for s in SPECIALS)
        self._max_len = max(len(t) for t in self.tokens)

    def __len__(self):
        return len(self.tokens)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f if line.rstrip("\n")]
        return cls(tokens)

    @classmethod
    def default(cls):
        ref = importlib.resources.files("polylab.chemcore").joinpath(
            "data/psmiles_vocab.txt")
        return cls([ln for ln in ref.read_text("utf-8").splitlines() if ln])

    def content_ids(self):
        """All non-special ids, for random-replacement corruption."""
        return [i for i in range(len(self.tokens))
                if i not in self.special_ids]


def normalize(text):
    return text.strip()


def tokenize(text, vocab):
    """Greedy longest-match segmentation; errors carry the position."""
    text = normalize(text)
    if not text:
        raise UnknownTokenError("empty input")
    ids = []
    pos = 0
    n = len(text)
    while pos < n:
        match = None
        for k in range(min(vocab._max_len, n - pos), 0, -1):
            cand = text[pos:pos + k]
            if cand in vocab.index:
                match = cand
                break
        if match is None:
            raise UnknownTokenError(
                f"cannot tokenize {text[pos:pos + 8]!r}", position=pos)
        ids.append(vocab.index[match])
        pos += len(match)
    return TokenSeq(ids=tuple(ids), vocab_size=len(vocab))


def detokenize(seq, vocab):
    skip = {vocab.pad_id, vocab.bos_id, vocab.eos_id}
    return "".join(vocab.tokens[i] for i in seq.ids if i not in skip)
