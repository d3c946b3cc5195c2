"""Circular substructure fingerprints and Tanimoto similarity.

Neighborhood identifiers are refined for rounds 0..radius with 64-bit
FNV-1a hashing over sorted (bond order, neighbor identifier) tuples and
folded into the bit vector by modulo. The hash is fixed and documented
here rather than matching any external toolkit's bits.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatchError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _fnv1a(data):
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _hash_ints(*values):
    buf = bytearray()
    for v in values:
        buf.extend(int(v).to_bytes(8, "little", signed=False))
    return _fnv1a(buf)


@dataclass(frozen=True)
class Fingerprint:
    bits: np.ndarray              # uint8 0/1 vector, immutable by convention
    radius: int
    nbits: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "nbits", int(self.bits.shape[0]))
        self.bits.setflags(write=False)

    def on_bits(self):
        return np.flatnonzero(self.bits)

    def count(self):
        return int(self.bits.sum())

    def packed(self):
        """Bits packed little-endian into uint64 words for fast popcounts."""
        n_words = (self.nbits + 63) // 64
        padded = np.zeros(n_words * 64, dtype=np.uint8)
        padded[: self.nbits] = self.bits
        words = np.packbits(padded.reshape(n_words, 64), axis=1,
                            bitorder="little")
        return words.copy().view(np.uint64).reshape(n_words)


def atom_initial_identifier(graph, idx):
    atom = graph.atoms[idx]
    return _hash_ints(atom.z, atom.charge & _MASK64, atom.chirality,
                      int(atom.aromatic), graph.degree(idx),
                      graph.total_h(idx))


def neighborhood_identifiers(graph, radius):
    """Identifier sets per refinement round, rounds 0..radius."""
    n = len(graph.atoms)
    ids = [atom_initial_identifier(graph, i) for i in range(n)]
    collected = set(ids)
    for rnd in range(1, radius + 1):
        new_ids = []
        for i in range(n):
            pairs = sorted((b.order, ids[b.other(i)])
                           for b in graph.incident_bonds(i))
            flat = [rnd, ids[i]]
            for order, nid in pairs:
                flat.extend((order, nid))
            new_ids.append(_hash_ints(*flat))
        ids = new_ids
        collected.update(ids)
    return collected


def compute_ecfp(graph, radius=3, nbits=2048):
    """Deterministic circular fingerprint of the heavy-atom graph."""
    bits = np.zeros(nbits, dtype=np.uint8)
    for ident in neighborhood_identifiers(graph, radius):
        bits[ident % nbits] = 1
    return Fingerprint(bits=bits, radius=radius)


def tanimoto(a, b):
    """|a AND b| / |a OR b|; defined as 1.0 when both vectors are empty."""
    if a.nbits != b.nbits:
        raise LengthMismatchError(
            f"fingerprint lengths differ: {a.nbits} vs {b.nbits}")
    inter = int(np.sum(a.bits & b.bits))
    union = int(np.sum(a.bits | b.bits))
    if union == 0:
        return 1.0
    return inter / union


def pack_fingerprints(fps):
    """Stack fingerprints into one packed uint64 matrix."""
    if not fps:
        return np.zeros((0, 1), dtype=np.uint64)
    return np.stack([fp.packed() for fp in fps])
