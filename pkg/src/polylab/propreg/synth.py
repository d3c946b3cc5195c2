"""Synthetic-property generators used as the regression testbed.

Each property is a documented closed-form function of fingerprint
statistics or embedding coordinates, so ground truth is available for
any generated polymer.
"""

import numpy as np


def bitcount_property(fingerprint):
    """ON-bit count scaled by 1/32; smooth under small structural edits."""
    return fingerprint.count() / 32.0


def heteroatom_property(graph):
    """Fraction of non-carbon heavy atoms (termini excluded), times 10."""
    zs = [a.z for a in graph.atoms if a.z not in (0, 85)]
    if not zs:
        return 0.0
    hetero = sum(1 for z in zs if z != 6)
    return 10.0 * hetero / len(zs)


def linear_latent_property(embeddings, seed=0, noise=0.0):
    """y = w . g + b with a seeded random direction; optional noise."""
    rng = np.random.default_rng([seed, 61])
    embeddings = np.asarray(embeddings, dtype=np.float64)
    w = rng.normal(size=embeddings.shape[1])
    b = rng.normal()
    y = embeddings @ w + b
    if noise > 0:
        y = y + rng.normal(0.0, noise, size=y.shape)
    return y


def attach_synthetic_properties(records, name="y_bits"):
    """Annotate records in place with a named synthetic property."""
    for rec in records:
        if name == "y_bits":
            rec.properties[name] = bitcount_property(rec.fingerprint)
        elif name == "y_hetero":
            rec.properties[name] = heteroatom_property(rec.graph)
        else:
            raise ValueError(f"unknown synthetic property {name!r}")
    return records
