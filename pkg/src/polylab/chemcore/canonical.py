"""Isomorphism-stable serialization and canonical keys for polymer graphs.

Keys are produced by Weisfeiler-Lehman rank refinement followed by a
rooted serialization minimized over all minimal-rank root choices, so an
atom-order permutation of the same molecule maps to the same string.
Output strings re-parse under this package's own grammar; no attempt is
made to match external toolkits' canonical forms.
"""

from .graph import (
    AROMATIC_SYMBOLS,
    ORGANIC_SUBSET,
    WILDCARD_Z,
    Z_TO_SYMBOL,
    implicit_h_count,
)

_ORDER_TOKEN = {1: "-", 2: "=", 3: "#", 4: ":"}


def _initial_invariants(graph):
    inv = []
    for i, atom in enumerate(graph.atoms):
        inv.append((atom.z, atom.charge, atom.chirality, int(atom.aromatic),
                    graph.degree(i), graph.total_h(i)))
    return inv


def canonical_ranks(graph):
    """Dense atom ranks from iterated neighborhood refinement."""
    n = len(graph.atoms)
    sigs = _initial_invariants(graph)
    ranks = _dense_rank(sigs)
    for _ in range(n):
        new_sigs = []
        for i in range(n):
            nb = sorted((b.order, ranks[b.other(i)])
                        for b in graph.incident_bonds(i))
            new_sigs.append((ranks[i], tuple(nb)))
        new_ranks = _dense_rank(new_sigs)
        if new_ranks == ranks:
            break
        ranks = new_ranks
    return ranks


def _dense_rank(signatures):
    order = sorted(set(signatures))
    lookup = {sig: r for r, sig in enumerate(order)}
    return [lookup[sig] for sig in signatures]


def _atom_token(graph, idx):
    atom = graph.atoms[idx]
    if atom.z == WILDCARD_Z:
        return "[*]"
    symbol = Z_TO_SYMBOL.get(atom.z, f"?{atom.z}")
    total_h = graph.total_h(idx)
    plain = (atom.charge == 0 and atom.chirality == 0)
    reparse_h = implicit_h_count(atom, graph.bond_order_sum(idx))
    if atom.aromatic:
        low = symbol.lower()
        if plain and low in AROMATIC_SYMBOLS and reparse_h == total_h:
            return low
        symbol = low
    elif plain and symbol in ORGANIC_SUBSET and reparse_h == total_h:
        return symbol
    parts = ["[", symbol]
    if atom.chirality == 1:
        parts.append("@")
    elif atom.chirality == 2:
        parts.append("@@")
    if total_h == 1:
        parts.append("H")
    elif total_h > 1:
        parts.append(f"H{total_h}")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        mag = abs(atom.charge)
        parts.append(sign if mag == 1 else f"{sign}{mag}")
    parts.append("]")
    return "".join(parts)


def _bond_token(graph, bond):
    both_aromatic = (graph.atoms[bond.u].aromatic
                     and graph.atoms[bond.v].aromatic)
    if bond.order == 1 and not both_aromatic:
        return ""
    if bond.order == 4 and both_aromatic:
        return ""
    return _ORDER_TOKEN[bond.order]


def serialize(graph, root, ranks=None):
    """Deterministic rooted SMILES-style serialization."""
    if ranks is None:
        ranks = canonical_ranks(graph)

    visit_pos = {}
    tree_children = {}
    back_bonds = []
    classified = set()

    def dfs(idx, parent_bond):
        visit_pos[idx] = len(visit_pos)
        incident = sorted(
            graph.incident_bonds(idx),
            key=lambda b: (ranks[b.other(idx)], b.order,
                           b.other(idx) in visit_pos))
        pending = []
        for bond in incident:
            if bond is parent_bond:
                continue
            other = bond.other(idx)
            if other in visit_pos:
                if id(bond) not in classified:
                    classified.add(id(bond))
                    back_bonds.append(bond)
            else:
                pending.append((bond, other))
        children = tree_children.setdefault(idx, [])
        for bond, other in pending:
            if other in visit_pos:
                # reached through an earlier sibling subtree: ring bond
                if id(bond) not in classified:
                    classified.add(id(bond))
                    back_bonds.append(bond)
                continue
            children.append((bond, other))
            dfs(other, bond)

    dfs(root, None)

    back_bonds.sort(key=lambda b: tuple(sorted(
        (visit_pos[b.u], visit_pos[b.v]))))
    ring_tokens = {i: [] for i in visit_pos}
    for num, bond in enumerate(back_bonds, start=1):
        digit = str(num) if num <= 9 else f"%{num:02d}"
        token = _bond_token(graph, bond) + digit
        ring_tokens[bond.u].append(token)
        ring_tokens[bond.v].append(token)

    out = []

    def emit(idx, parent_bond):
        if parent_bond is not None:
            out.append(_bond_token(graph, parent_bond))
        out.append(_atom_token(graph, idx))
        out.extend(ring_tokens[idx])
        children = tree_children.get(idx, [])
        for k, (bond, other) in enumerate(children):
            if k < len(children) - 1:
                out.append("(")
                emit(other, bond)
                out.append(")")
            else:
                emit(other, bond)

    emit(root, None)
    return "".join(out)


def canonical_key(graph):
    """Permutation-stable identity string for a polymer graph."""
    ranks = canonical_ranks(graph)
    min_rank = min(ranks)
    best = None
    for root, r in enumerate(ranks):
        if r != min_rank:
            continue
        s = serialize(graph, root, ranks)
        if best is None or s < best:
            best = s
    return best


def to_psmiles(graph):
    """Readable repeat-unit string, rooted at an attachment point."""
    if graph.terminus_atoms:
        root = graph.terminus_atoms[0]
    else:
        wilds = graph.wildcard_indices()
        root = wilds[0] if wilds else 0
    return serialize(graph, root)
