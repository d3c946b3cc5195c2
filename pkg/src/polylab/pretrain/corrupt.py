"""Unified masked-unit corruption shared by all four views.

Units are masked independently with probability ``p_mask``; masked units
are 80% replaced by the modality's mask symbol, 10% by a random valid
symbol, and 10% left unchanged. Replacement distributions per modality:
sequence -> uniform non-special vocabulary token, graph/geometry ->
uniform atomic index from the corpus element set, fingerprint -> bit
flip.
"""

from dataclasses import dataclass

import numpy as np

MASK_FRACTION = 0.8
RANDOM_FRACTION = 0.1
# remaining 0.1 is the keep fraction


@dataclass(frozen=True)
class CorruptionPlan:
    masked: tuple               # masked unit indices, ascending
    actions: dict               # index -> "mask" | "random" | "keep"

    def __len__(self):
        return len(self.masked)


def _draw_plan(n_units, p_mask, rng):
    masked = np.flatnonzero(rng.random(n_units) < p_mask)
    u = rng.random(masked.size)
    actions = {}
    for idx, roll in zip(masked, u):
        if roll < MASK_FRACTION:
            actions[int(idx)] = "mask"
        elif roll < MASK_FRACTION + RANDOM_FRACTION:
            actions[int(idx)] = "random"
        else:
            actions[int(idx)] = "keep"
    return CorruptionPlan(masked=tuple(int(i) for i in masked),
                          actions=actions)


def corrupt_tokens(ids, vocab, p_mask, rng):
    """Corrupt a token-id sequence; returns (new ids tuple, plan)."""
    ids = list(ids)
    plan = _draw_plan(len(ids), p_mask, rng)
    content = vocab.content_ids()
    for idx in plan.masked:
        action = plan.actions[idx]
        if action == "mask":
            ids[idx] = vocab.mask_id
        elif action == "random":
            ids[idx] = content[int(rng.integers(len(content)))]
    return tuple(ids), plan


def corrupt_z_indices(z_indices, element_indices, mask_index, p_mask, rng):
    """Corrupt atomic-number table indices (graph and geometry views)."""
    out = np.array(z_indices, dtype=np.int64)
    plan = _draw_plan(out.size, p_mask, rng)
    element_indices = list(element_indices)
    for idx in plan.masked:
        action = plan.actions[idx]
        if action == "mask":
            out[idx] = mask_index
        elif action == "random":
            out[idx] = element_indices[int(rng.integers(
                len(element_indices)))]
    return out, plan


def corrupt_bits(bits, p_mask, rng):
    """Corrupt a 0/1 bit sequence; the mask symbol is the value 2."""
    out = np.array(bits, dtype=np.int64)
    plan = _draw_plan(out.size, p_mask, rng)
    for idx in plan.masked:
        action = plan.actions[idx]
        if action == "mask":
            out[idx] = 2
        elif action == "random":
            out[idx] = 1 - out[idx]
    return out, plan


def corrupt(view, p_mask, rng, *, vocab=None, element_indices=None,
            mask_index=None):
    """Dispatch on view type: token tuple/list, int index array, bit array."""
    if vocab is not None:
        return corrupt_tokens(view, vocab, p_mask, rng)
    if element_indices is not None:
        return corrupt_z_indices(view, element_indices, mask_index, p_mask,
                                 rng)
    return corrupt_bits(view, p_mask, rng)
