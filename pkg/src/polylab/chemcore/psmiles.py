"""Parser for polymer repeat-unit strings.

Grammar subset: organic-subset atoms plus bracket atoms, ring-closure
digits 1-9 and %nn, branches, bond symbols - = # : / \\, aromatic
lowercase, charges, explicit H counts, and the `[*]` attachment
wildcard. Stereo markers are recorded as feature flags only.
"""

from dataclasses import replace

from .errors import PsmilesSyntaxError, ValenceError, WildcardCountError
from .graph import (
    AROMATIC_SYMBOLS,
    ORGANIC_SUBSET,
    SYMBOL_TO_Z,
    WILDCARD_Z,
    Atom,
    Bond,
    PolymerGraph,
    check_valences,
)

_BOND_ORDER = {"-": 1, "=": 2, "#": 3, ":": 4}
_STEREO = {"/": 1.0, "\\": -1.0}
_TWO_CHAR_ORGANIC = ("Cl", "Br")


def _parse_bracket_atom(text, pos):
    """Parse one bracket atom starting at `[`; returns (Atom, end_pos)."""
    start = pos
    pos += 1
    n = len(text)

    def fail(msg):
        raise PsmilesSyntaxError(msg, position=start)

    if pos >= n:
        fail("unterminated bracket atom")
    # isotope digits are accepted and ignored
    while pos < n and text[pos].isdigit():
        pos += 1
    if pos >= n:
        fail("unterminated bracket atom")

    if text[pos] == "*":
        symbol = "*"
        aromatic = False
        pos += 1
    elif pos + 1 < n and text[pos:pos + 2] in ("se", "as"):
        symbol = text[pos:pos + 2].capitalize()
        aromatic = True
        pos += 2
    elif text[pos] in AROMATIC_SYMBOLS:
        symbol = text[pos].upper()
        aromatic = True
        pos += 1
    elif (pos + 1 < n and text[pos].isupper()
          and text[pos + 1].islower()
          and text[pos:pos + 2] in SYMBOL_TO_Z):
        symbol = text[pos:pos + 2]
        aromatic = False
        pos += 2
    elif text[pos].isupper() and text[pos] in SYMBOL_TO_Z:
        symbol = text[pos]
        aromatic = False
        pos += 1
    else:
        fail(f"unknown element in bracket atom: {text[pos]!r}")

    chirality = 0
    if pos < n and text[pos] == "@":
        if pos + 1 < n and text[pos + 1] == "@":
            chirality = 2
            pos += 2
        else:
            chirality = 1
            pos += 1

    explicit_h = 0
    if pos < n and text[pos] == "H":
        pos += 1
        digits = ""
        while pos < n and text[pos].isdigit():
            digits += text[pos]
            pos += 1
        explicit_h = int(digits) if digits else 1

    charge = 0
    if pos < n and text[pos] in "+-":
        sign = 1 if text[pos] == "+" else -1
        run = 0
        while pos < n and text[pos] in "+-":
            if (text[pos] == "+") != (sign == 1):
                fail("mixed charge signs in bracket atom")
            run += 1
            pos += 1
        digits = ""
        while pos < n and text[pos].isdigit():
            digits += text[pos]
            pos += 1
        if digits:
            if run != 1:
                fail("charge given both as repeat and as number")
            charge = sign * int(digits)
        else:
            charge = sign * run

    if pos >= n or text[pos] != "]":
        fail("unterminated bracket atom")
    pos += 1

    if symbol == "*":
        atom = Atom(z=WILDCARD_Z, charge=0, chirality=0, aromatic=False,
                    explicit_h=0)
    else:
        atom = Atom(z=SYMBOL_TO_Z[symbol], charge=charge,
                    chirality=chirality, aromatic=aromatic,
                    explicit_h=explicit_h)
    return atom, pos


def _annotate_conjugation(atoms, bonds):
    """Set the conjugation flag from local pi-system adjacency."""
    n = len(atoms)
    pi = [False] * n
    adj = {i: [] for i in range(n)}
    for b in bonds:
        adj[b.u].append(b)
        adj[b.v].append(b)
        if b.order in (2, 3, 4):
            pi[b.u] = True
            pi[b.v] = True
    out = []
    for b in bonds:
        if b.order == 4:
            conj = 1
        elif b.order == 1:
            conj = 1 if pi[b.u] and pi[b.v] else 0
        else:
            conj = 0
            for end in (b.u, b.v):
                for other in adj[end]:
                    if other is b:
                        continue
                    w = other.other(end)
                    if pi[w] or other.order in (2, 3, 4):
                        conj = 1
            if any(atoms[e].aromatic for e in (b.u, b.v)):
                conj = 1
        out.append(replace(b, conjugated=conj))
    return out


def parse_psmiles(text):
    """Parse a repeat-unit string into a valence-checked PolymerGraph."""
    if not isinstance(text, str) or not text.strip():
        raise PsmilesSyntaxError("empty polymer string")
    text = text.strip()

    atoms = []
    bonds = []
    prev = None
    branch_stack = []
    pending_order = None
    pending_stereo = 0.0
    rings = {}
    pos = 0
    n = len(text)

    def add_atom(atom):
        nonlocal prev, pending_order, pending_stereo
        atoms.append(atom)
        idx = len(atoms) - 1
        if prev is not None:
            order = pending_order
            if order is None:
                order = 4 if (atoms[prev].aromatic and atom.aromatic) else 1
            bonds.append(Bond(u=prev, v=idx, order=order,
                              stereo=pending_stereo))
        elif pending_order is not None:
            raise PsmilesSyntaxError("bond symbol with no preceding atom",
                                     position=pos)
        prev = idx
        pending_order = None
        pending_stereo = 0.0

    def close_ring(label, at):
        nonlocal pending_order, pending_stereo
        if prev is None:
            raise PsmilesSyntaxError("ring closure before any atom",
                                     position=at)
        if label in rings:
            other, other_order, other_stereo = rings.pop(label)
            if other == prev:
                raise PsmilesSyntaxError(
                    f"ring bond {label} closes onto its own atom",
                    position=at)
            order = pending_order if pending_order is not None else other_order
            if (pending_order is not None and other_order is not None
                    and pending_order != other_order):
                raise PsmilesSyntaxError(
                    f"conflicting bond orders on ring closure {label}",
                    position=at)
            if order is None:
                order = 4 if (atoms[other].aromatic
                              and atoms[prev].aromatic) else 1
            stereo = pending_stereo or other_stereo
            if any((b.u, b.v) in ((other, prev), (prev, other))
                   for b in bonds):
                raise PsmilesSyntaxError(
                    f"duplicate bond via ring closure {label}", position=at)
            bonds.append(Bond(u=other, v=prev, order=order, stereo=stereo))
        else:
            rings[label] = (prev, pending_order, pending_stereo)
        pending_order = None
        pending_stereo = 0.0

    while pos < n:
        ch = text[pos]
        if ch == "[":
            atom, pos = _parse_bracket_atom(text, pos)
            add_atom(atom)
        elif text[pos:pos + 2] in _TWO_CHAR_ORGANIC:
            add_atom(Atom(z=SYMBOL_TO_Z[text[pos:pos + 2]]))
            pos += 2
        elif ch.isupper():
            if ch not in ORGANIC_SUBSET:
                raise PsmilesSyntaxError(
                    f"element {ch!r} must be written as a bracket atom",
                    position=pos)
            add_atom(Atom(z=SYMBOL_TO_Z[ch]))
            pos += 1
        elif ch in AROMATIC_SYMBOLS:
            add_atom(Atom(z=SYMBOL_TO_Z[ch.upper()], aromatic=True))
            pos += 1
        elif ch in _BOND_ORDER:
            if pending_order is not None:
                raise PsmilesSyntaxError("two bond symbols in a row",
                                         position=pos)
            pending_order = _BOND_ORDER[ch]
            pos += 1
        elif ch in _STEREO:
            pending_stereo = _STEREO[ch]
            if pending_order is None:
                pending_order = 1
            pos += 1
        elif ch == "(":
            if prev is None:
                raise PsmilesSyntaxError("branch before any atom",
                                         position=pos)
            branch_stack.append(prev)
            pos += 1
        elif ch == ")":
            if not branch_stack:
                raise PsmilesSyntaxError("unmatched ')'", position=pos)
            prev = branch_stack.pop()
            pos += 1
        elif ch.isdigit():
            close_ring(ch, pos)
            pos += 1
        elif ch == "%":
            if pos + 2 >= n or not text[pos + 1:pos + 3].isdigit():
                raise PsmilesSyntaxError("'%' needs two digits", position=pos)
            close_ring(text[pos + 1:pos + 3], pos)
            pos += 3
        elif ch == ".":
            raise PsmilesSyntaxError(
                "disconnected components are not valid repeat units",
                position=pos)
        else:
            raise PsmilesSyntaxError(f"unexpected character {ch!r}",
                                     position=pos)

    if branch_stack:
        raise PsmilesSyntaxError("unclosed branch")
    if rings:
        raise PsmilesSyntaxError(
            f"unclosed ring bond(s): {sorted(rings)}")
    if not atoms:
        raise PsmilesSyntaxError("no atoms parsed")
    if pending_order is not None:
        raise PsmilesSyntaxError("dangling bond symbol at end of string")

    bonds = _annotate_conjugation(atoms, bonds)
    graph = PolymerGraph(atoms=atoms, bonds=bonds)

    wilds = graph.wildcard_indices()
    if len(wilds) != 2:
        raise WildcardCountError(
            f"expected exactly 2 attachment wildcards, found {len(wilds)}")
    for w in wilds:
        if graph.degree(w) != 1:
            raise ValenceError(
                f"attachment wildcard at atom {w} must be monovalent")
    if not graph.is_connected():
        raise PsmilesSyntaxError("repeat unit graph is not connected")
    check_valences(graph)
    graph.terminus_atoms = tuple(wilds)
    return graph
