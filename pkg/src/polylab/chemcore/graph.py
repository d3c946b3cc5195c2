"""Heavy-atom polymer graph with valence bookkeeping.

Atoms carry atomic number, formal charge, chirality flags, and hydrogen
counts; bonds carry order codes (1 single, 2 double, 3 triple,
4 aromatic), a stereo descriptor, and a conjugation flag. Attachment
points are wildcard atoms (atomic number 0) until substituted with the
monovalent terminus element (astatine, Z=85).
"""

from dataclasses import dataclass, field, replace

from .errors import ValenceError, WildcardCountError

WILDCARD_Z = 0
TERMINUS_Z = 85

ELEMENTS = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn",
    "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg",
    "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
]
SYMBOL_TO_Z = {sym: i + 1 for i, sym in enumerate(ELEMENTS)}
Z_TO_SYMBOL = {i + 1: sym for i, sym in enumerate(ELEMENTS)}

ORGANIC_SUBSET = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_SYMBOLS = {"b", "c", "n", "o", "p", "s"}

# plain-valence alternatives per element (no charge applied yet)
_BASE_VALENCES = {
    1: (1,),          # H
    5: (3,),          # B
    6: (4,),          # C
    7: (3,),          # N
    8: (2,),          # O
    9: (1,),          # F
    14: (4,),         # Si
    15: (3, 5),       # P
    16: (2, 4, 6),    # S
    17: (1,),         # Cl
    34: (2, 4, 6),    # Se
    35: (1,),         # Br
    53: (1,),         # I
    TERMINUS_Z: (1,),
}


def allowed_valences(z, charge):
    """Charge-adjusted valence alternatives; None means unchecked."""
    base = _BASE_VALENCES.get(z)
    if base is None:
        return None
    if z in (7, 15, 8, 16, 34, 52):
        vals = tuple(v + charge for v in base)
    elif z in (5, 13):
        vals = tuple(v - charge for v in base)
    elif z == 6:
        vals = tuple(v - abs(charge) for v in base)
    else:
        vals = base
    vals = tuple(v for v in vals if v >= 0)
    return vals or None


@dataclass(frozen=True)
class Atom:
    z: int
    charge: int = 0
    chirality: int = 0          # 2-bit flags: 0 none, 1 @, 2 @@
    aromatic: bool = False
    explicit_h: int = -1        # -1: hydrogens implicit (bare atom)


@dataclass(frozen=True)
class Bond:
    u: int
    v: int
    order: int                  # 1, 2, 3, 4 (aromatic)
    stereo: float = 0.0         # +1 '/', -1 '\\', 0 none
    conjugated: int = 0

    def other(self, idx):
        return self.v if idx == self.u else self.u


_ORDER_SUM = {1: 1, 2: 2, 3: 3, 4: 1}


@dataclass
class PolymerGraph:
    atoms: list
    bonds: list
    terminus_atoms: tuple = ()
    _adj: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._rebuild_adjacency()

    def _rebuild_adjacency(self):
        adj = {i: [] for i in range(len(self.atoms))}
        for b in self.bonds:
            adj[b.u].append(b)
            adj[b.v].append(b)
        self._adj = adj

    def neighbors(self, idx):
        return [b.other(idx) for b in self._adj[idx]]

    def incident_bonds(self, idx):
        return list(self._adj[idx])

    def degree(self, idx):
        return len(self._adj[idx])

    def bond_order_sum(self, idx):
        return sum(_ORDER_SUM[b.order] for b in self._adj[idx])

    def total_h(self, idx):
        atom = self.atoms[idx]
        if atom.explicit_h >= 0:
            return atom.explicit_h
        return implicit_h_count(atom, self.bond_order_sum(idx))

    def is_connected(self):
        if not self.atoms:
            return False
        seen = {0}
        stack = [0]
        while stack:
            for nb in self.neighbors(stack.pop()):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.atoms)

    def wildcard_indices(self):
        return [i for i, a in enumerate(self.atoms) if a.z == WILDCARD_Z]


def implicit_h_count(atom, bond_sum):
    """Hydrogens filled in for a bare (non-bracket) atom."""
    if atom.z in (WILDCARD_Z, TERMINUS_Z):
        return 0
    if atom.aromatic:
        # one valence slot is reserved for the delocalized ring system
        if atom.z == 6:
            return max(0, 4 - bond_sum - 1)
        return 0
    vals = allowed_valences(atom.z, atom.charge)
    if vals is None:
        return 0
    for v in sorted(vals):
        if v >= bond_sum:
            return v - bond_sum
    return 0


def check_valences(graph):
    """Raise ValenceError when any atom exceeds its charge-adjusted cap."""
    for idx, atom in enumerate(graph.atoms):
        if atom.z == WILDCARD_Z:
            continue
        vals = allowed_valences(atom.z, atom.charge)
        if vals is None:
            continue
        total = graph.bond_order_sum(idx) + graph.total_h(idx)
        cap = max(vals)
        if total > cap:
            sym = Z_TO_SYMBOL.get(atom.z, f"Z{atom.z}")
            raise ValenceError(
                f"atom {idx} ({sym}, charge {atom.charge:+d}) carries "
                f"valence {total}, allowed at most {cap}"
            )


def substitute_terminus(graph):
    """Replace the two attachment wildcards with the terminus element.

    Idempotent: a graph whose recorded termini already carry Z=85 is
    returned unchanged.
    """
    wilds = graph.wildcard_indices()
    if not wilds:
        termini = graph.terminus_atoms
        if (len(termini) == 2
                and all(graph.atoms[i].z == TERMINUS_Z for i in termini)):
            return graph
        raise WildcardCountError(
            "graph has no attachment wildcards and no recorded termini")
    if len(wilds) != 2:
        raise WildcardCountError(
            f"expected exactly 2 attachment wildcards, found {len(wilds)}")
    atoms = list(graph.atoms)
    for i in wilds:
        atoms[i] = replace(atoms[i], z=TERMINUS_Z, charge=0, explicit_h=0)
    return PolymerGraph(atoms=atoms, bonds=list(graph.bonds),
                        terminus_atoms=tuple(wilds))
