"""Seeded random repeat-unit generator for desk-scale experiments.

Records are drawn from distinct chemical families (aliphatic, ether,
ester, aromatic, fluorinated, siloxane, amide, thioether) with a broad
size spread, so a synthetic corpus carries enough structural variety
for retrieval and generation testbeds. Deduplication uses canonical
keys, never raw strings.
"""

import numpy as np

from .canonical import canonical_key
from .errors import ChemError
from .psmiles import parse_psmiles

_FAMILIES = {
    "aliphatic": ["C", "CC", "CCC", "C(C)", "C(C)(C)", "C(CC)", "CC(C)"],
    "ether": ["O", "CO", "OC", "CCO", "OCC", "C(OC)", "COC"],
    "ester": ["C(=O)O", "OC(=O)", "CC(=O)O", "OC(=O)C", "C(=O)OC"],
    "aromatic": ["c1ccccc1", "c1ccc(cc1)", "Cc1ccccc1", "c1ccncc1",
                 "c1ccsc1", "c1ccoc1"],
    "fluoro": ["C(F)", "C(F)(F)", "C(C(F)(F)F)", "C(F)(C)", "CC(F)(F)"],
    "siloxane": ["[Si](C)(C)", "O[Si](C)(C)", "[Si](C)(C)O",
                 "C[Si](C)(C)"],
    "amide": ["C(=O)N", "NC(=O)", "N(C)", "CN", "NC", "C(=O)NC"],
    "thio": ["S", "CS", "SC", "CCS", "S(=O)(=O)", "CS(=O)(=O)C"],
}
_FAMILY_NAMES = sorted(_FAMILIES)
_DECORATIONS = ["C(F)", "C(Cl)", "C(Br)", "C(O)", "C(N)", "C(C)"]
_RINGS = ["c1ccccc1", "C1CCCCC1", "c1ccncc1", "c1ccsc1"]


def random_psmiles(rng, min_fragments=1, max_fragments=8, ring_prob=0.25):
    """One random parseable repeat unit with two attachment points."""
    for _ in range(60):
        family = _FAMILY_NAMES[int(rng.integers(len(_FAMILY_NAMES)))]
        pool = _FAMILIES[family]
        n = int(rng.integers(min_fragments, max_fragments + 1))
        parts = [pool[int(rng.integers(len(pool)))] for _ in range(n)]
        if rng.random() < 0.3:
            parts.insert(int(rng.integers(len(parts) + 1)),
                         _DECORATIONS[int(rng.integers(len(_DECORATIONS)))])
        if rng.random() < ring_prob:
            ring = _RINGS[int(rng.integers(len(_RINGS)))]
            pos = int(rng.integers(len(parts) + 1))
            parts.insert(pos, ring)
        text = "[*]" + "".join(parts) + "[*]"
        try:
            parse_psmiles(text)
            return text
        except ChemError:
            continue
    raise RuntimeError("failed to build a valid random repeat unit")


def synthesize_corpus(n, seed=0, dedupe=True, max_similarity=None):
    """n random repeat-unit strings, structurally distinct per seed.

    ``max_similarity`` additionally rejects candidates whose fingerprint
    Tanimoto to any accepted record exceeds the bound, which keeps
    retrieval testbeds free of structural near-twins.
    """
    from .fingerprint import compute_ecfp, tanimoto
    from .graph import substitute_terminus

    rng = np.random.default_rng(seed)
    seen = set()
    out = []
    kept_fps = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * n:
            raise RuntimeError("corpus generator exhausted its attempts")
        text = random_psmiles(rng)
        graph = parse_psmiles(text)
        if dedupe:
            key = canonical_key(graph)
            if key in seen:
                continue
        if max_similarity is not None:
            fp = compute_ecfp(substitute_terminus(graph), nbits=1024)
            if any(tanimoto(fp, other) > max_similarity
                   for other in kept_fps):
                continue
            kept_fps.append(fp)
        if dedupe:
            seen.add(key)
        out.append(text)
    return out
