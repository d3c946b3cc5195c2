"""Valence-guarded conversion of decoder token streams to polymer strings.

Tokens are folded into a growing molecular graph; any bond, branch,
ring, or atom token that would violate valence is skipped rather than
erroring, and decoding ends with exactly-two-attachment repair. Emitted
strings always re-parse under the package grammar, so grammar-decoded
output is valid by construction.
"""

from dataclasses import dataclass

from ..chemcore.errors import ChemError, PsmilesSyntaxError
from ..chemcore.graph import (
    AROMATIC_SYMBOLS,
    SYMBOL_TO_Z,
    WILDCARD_Z,
    Atom,
    Bond,
    PolymerGraph,
    allowed_valences,
)
from ..chemcore.psmiles import _annotate_conjugation, _parse_bracket_atom, \
    parse_psmiles
from ..chemcore.canonical import serialize

_BOND_ORDERS = {"-": 1, "=": 2, "#": 3, ":": 4, "/": 1, "\\": 1}
_ORDER_COST = {1: 1, 2: 2, 3: 3, 4: 1}
_SKIP_TOKENS = {"[PAD]", "[UNK]", "[MASK]", "<s>", ".", "%", "+", "@",
                "@@", "[", "]", "0"}
_GENEROUS_CAP = 6


@dataclass(frozen=True)
class GrammarOutcome:
    psmiles: str = None
    reason: str = None           # rejection reason, None on success
    detail: str = ""

    @property
    def accepted(self):
        return self.psmiles is not None


def _atom_from_token(token):
    """(Atom, valence cap) for an atom-like token, else None."""
    if token == "[*]":
        return Atom(z=WILDCARD_Z, explicit_h=0), 1
    if token.startswith("["):
        try:
            atom, end = _parse_bracket_atom(token, 0)
        except PsmilesSyntaxError:
            return None
        if end != len(token):
            return None
        vals = allowed_valences(atom.z, atom.charge)
        cap = (max(vals) if vals else _GENEROUS_CAP) - max(atom.explicit_h, 0)
        return atom, cap
    if token in AROMATIC_SYMBOLS:
        z = SYMBOL_TO_Z[token.upper()]
        vals = allowed_valences(z, 0)
        return Atom(z=z, aromatic=True), max(vals) if vals else _GENEROUS_CAP
    if token in SYMBOL_TO_Z:
        z = SYMBOL_TO_Z[token]
        vals = allowed_valences(z, 0)
        return Atom(z=z), max(vals) if vals else _GENEROUS_CAP
    return None


class _Builder:
    def __init__(self):
        self.atoms = []
        self.caps = []
        self.used = []
        self.bonds = []
        self.current = None
        self.stack = []
        self.rings = {}
        self.pending = None
        self.wildcards = []

    def _bond_exists(self, u, v):
        return any({b[0], b[1]} == {u, v} for b in self.bonds)

    def add_atom(self, atom, cap):
        if atom.z == WILDCARD_Z and len(self.wildcards) >= 2:
            self.pending = None
            return
        if cap < 1 and self.current is not None:
            self.pending = None
            return
        idx = len(self.atoms)
        if self.current is None:
            self.atoms.append(atom)
            self.caps.append(cap)
            self.used.append(0)
        else:
            if self.pending is not None:
                order = self.pending
            elif self.atoms[self.current].aromatic and atom.aromatic:
                order = 4
            else:
                order = 1
            cost = _ORDER_COST[order]
            if (self.used[self.current] + cost > self.caps[self.current]
                    or cost > cap):
                order, cost = 1, 1
            if (self.used[self.current] + cost > self.caps[self.current]
                    or cost > cap):
                self.pending = None
                return
            self.atoms.append(atom)
            self.caps.append(cap)
            self.used.append(0)
            self.bonds.append((self.current, idx, order))
            self.used[self.current] += cost
            self.used[idx] += cost
        if atom.z == WILDCARD_Z:
            self.wildcards.append(idx)
        self.current = idx
        self.pending = None

    def add_bond_symbol(self, order):
        if self.pending is None:
            self.pending = order

    def open_branch(self):
        if self.current is not None:
            self.stack.append(self.current)

    def close_branch(self):
        if self.stack:
            self.current = self.stack.pop()

    def ring_digit(self, digit):
        if self.current is None:
            self.pending = None
            return
        if digit in self.rings:
            other, stored = self.rings[digit]
            if other == self.current or self._bond_exists(other,
                                                          self.current):
                del self.rings[digit]
                self.pending = None
                return
            order = self.pending if self.pending is not None else stored
            if order is None:
                order = 4 if (self.atoms[other].aromatic
                              and self.atoms[self.current].aromatic) else 1
            cost = _ORDER_COST[order]
            if (self.used[other] + cost <= self.caps[other]
                    and self.used[self.current] + cost
                    <= self.caps[self.current]):
                self.bonds.append((other, self.current, order))
                self.used[other] += cost
                self.used[self.current] += cost
            del self.rings[digit]
        else:
            self.rings[digit] = (self.current, self.pending)
        self.pending = None

    def heavy_indices(self):
        return [i for i, a in enumerate(self.atoms) if a.z != WILDCARD_Z]

    def repair_attachments(self):
        """Attach wildcards until exactly two exist; False if impossible."""
        needed = 2 - len(self.wildcards)
        if needed <= 0:
            return True
        heavy = self.heavy_indices()
        candidates = []
        if heavy:
            ordered = [heavy[0], heavy[-1]] + heavy[1:-1]
            seen = set()
            for idx in ordered:
                if idx in seen:
                    continue
                seen.add(idx)
                candidates.append(idx)
        for idx in candidates:
            if needed == 0:
                break
            if self.used[idx] < self.caps[idx]:
                w = len(self.atoms)
                self.atoms.append(Atom(z=WILDCARD_Z, explicit_h=0))
                self.caps.append(1)
                self.used.append(1)
                self.bonds.append((idx, w, 1))
                self.used[idx] += 1
                self.wildcards.append(w)
                needed -= 1
        return needed == 0


def grammar_decode(tokens, vocab=None):
    """Token stream -> GrammarOutcome with a parseable repeat unit.

    ``tokens`` may be vocabulary ids (pass ``vocab``) or token strings.
    """
    if vocab is not None:
        strings = []
        for tid in tokens:
            tok = vocab.tokens[int(tid)]
            if tok == "</s>":
                break
            strings.append(tok)
    else:
        strings = list(tokens)

    b = _Builder()
    for tok in strings:
        if tok in _SKIP_TOKENS:
            continue
        if tok == "</s>":
            break
        if tok == "(":
            b.open_branch()
            continue
        if tok == ")":
            b.close_branch()
            continue
        if tok in _BOND_ORDERS:
            b.add_bond_symbol(_BOND_ORDERS[tok])
            continue
        if len(tok) == 1 and tok.isdigit():
            b.ring_digit(tok)
            continue
        parsed = _atom_from_token(tok)
        if parsed is not None:
            b.add_atom(*parsed)
        # any other token is noise and is skipped

    if not b.atoms:
        return GrammarOutcome(reason="no-atoms", detail="empty structure")
    if not b.heavy_indices():
        return GrammarOutcome(reason="attachment-count",
                              detail="attachment points with no atoms")
    if not b.repair_attachments():
        return GrammarOutcome(
            reason="attachment-count",
            detail=f"could not place {2 - len(b.wildcards)} attachment(s)")

    bonds = [Bond(u=u, v=v, order=o) for u, v, o in b.bonds]
    bonds = _annotate_conjugation(b.atoms, bonds)
    graph = PolymerGraph(atoms=b.atoms, bonds=bonds,
                         terminus_atoms=tuple(b.wildcards[:2]))
    text = serialize(graph, b.wildcards[0])
    try:
        parse_psmiles(text)
    except ChemError as exc:   # defensive: should be unreachable
        return GrammarOutcome(reason="serialization",
                              detail=f"{text!r}: {exc}")
    return GrammarOutcome(psmiles=text)
