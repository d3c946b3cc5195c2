"""Leave-one-atom-out occlusion attribution and highlight selection."""

from dataclasses import dataclass, field, replace

from ..chemcore.graph import WILDCARD_Z, PolymerGraph

HIGHLIGHT_ALPHA = 0.25
HIGHLIGHT_BETA = 0.0
HIGHLIGHT_CAP = 12


@dataclass
class AttributionMap:
    baseline: float
    scores: list                 # one entry per atom; termini get 0.0
    flags: list = field(default_factory=list)   # atoms whose occlusion failed
    highlights: list = field(default_factory=list)

    def to_dict(self):
        return {"baseline": self.baseline, "scores": self.scores,
                "flags": self.flags, "highlights": self.highlights}


def occlude_atom(graph, idx):
    """Replace atom ``idx`` with a wildcard placeholder, bonds intact."""
    atoms = list(graph.atoms)
    atoms[idx] = replace(atoms[idx], z=WILDCARD_Z, charge=0, chirality=0,
                         aromatic=False, explicit_h=0)
    return PolymerGraph(atoms=atoms, bonds=list(graph.bonds),
                        terminus_atoms=graph.terminus_atoms)


def occlusion_attribution(graph, predict_value):
    """Per-atom scores s_i = y0 - y_i under single-atom occlusion.

    ``predict_value`` maps a graph to a scalar prediction and raises on
    graphs it cannot embed; such atoms are flagged and scored 0.
    """
    baseline = float(predict_value(graph))
    termini = set(graph.terminus_atoms)
    scores = [0.0] * len(graph.atoms)
    flags = []
    for idx, atom in enumerate(graph.atoms):
        if idx in termini or atom.z == WILDCARD_Z:
            continue
        occluded = occlude_atom(graph, idx)
        try:
            y_i = float(predict_value(occluded))
        except Exception:
            flags.append(idx)
            continue
        scores[idx] = baseline - y_i
    return AttributionMap(baseline=baseline, scores=scores, flags=flags)


def select_highlights(scores, alpha=HIGHLIGHT_ALPHA, beta=HIGHLIGHT_BETA,
                      cap=HIGHLIGHT_CAP):
    """Atoms with |s_i| >= max(beta, alpha * max|s|), capped at ``cap``.

    An all-zero score vector selects nothing; ties at the cap keep the
    lowest atom indices.
    """
    magnitudes = [abs(s) for s in scores]
    peak = max(magnitudes, default=0.0)
    if peak == 0.0:
        return []
    threshold = max(beta, alpha * peak)
    kept = [i for i, m in enumerate(magnitudes) if m >= threshold]
    if len(kept) > cap:
        kept.sort(key=lambda i: (-magnitudes[i], i))
        kept = sorted(kept[:cap])
    return kept
