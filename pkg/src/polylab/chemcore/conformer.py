"""Deterministic coarse 3D embedding for repeat-unit graphs.

Atoms are laid out breadth-first on a tetrahedral lattice and relaxed
under a harmonic bond term plus soft-sphere repulsion (fixed cap of 500
relaxation iterations). Coordinates may instead be ingested from a
sidecar file; both paths feed the geometry encoder the same way.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .errors import EmbedFailure

BOND_REST_LENGTH = {1: 1.5, 2: 1.34, 3: 1.2, 4: 1.4}
MIN_SEPARATION = 0.5
_LATTICE_STEP = 1.5
RELAX_ITERATIONS = 500

# the four tetrahedral directions; odd-parity sites use the negatives
_TET_DIRS = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
]) / np.sqrt(3.0)


@dataclass(frozen=True)
class Conformer:
    coords: np.ndarray     # (n_atoms, 3) float64, angstrom

    def __post_init__(self):
        self.coords.setflags(write=False)

    def distances(self):
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=2))


def _initial_layout(graph, rng):
    n = len(graph.atoms)
    coords = np.zeros((n, 3), dtype=np.float64)
    placed = np.zeros(n, dtype=bool)
    parity = np.zeros(n, dtype=np.int64)
    occupied = set()

    def key(p):
        return tuple(np.round(p / (_LATTICE_STEP * 0.25)).astype(int))

    coords[0] = 0.0
    placed[0] = True
    occupied.add(key(coords[0]))
    queue = [0]
    while queue:
        current = queue.pop(0)
        for nb in graph.neighbors(current):
            if placed[nb]:
                continue
            dirs = _TET_DIRS if parity[current] == 0 else -_TET_DIRS
            pos = None
            for d in dirs:
                cand = coords[current] + d * _LATTICE_STEP
                if key(cand) not in occupied:
                    pos = cand
                    break
            if pos is None:
                jitter = rng.normal(0.0, 0.3, size=3)
                pos = coords[current] + dirs[0] * _LATTICE_STEP + jitter
            coords[nb] = pos
            parity[nb] = 1 - parity[current]
            placed[nb] = True
            occupied.add(key(pos))
            queue.append(nb)
    return coords


def embed_conformer(graph, seed=0):
    """Deterministic coordinates for a connected graph (fixed seed)."""
    n = len(graph.atoms)
    if n == 0:
        raise EmbedFailure("cannot embed an empty graph")
    rng = np.random.default_rng(seed)
    coords = _initial_layout(graph, rng)
    if n == 1:
        return Conformer(coords=coords)

    bond_u = np.array([b.u for b in graph.bonds], dtype=np.int64)
    bond_v = np.array([b.v for b in graph.bonds], dtype=np.int64)
    rest = np.array([BOND_REST_LENGTH[b.order] for b in graph.bonds],
                    dtype=np.float64)
    coords = kernels.relax_coordinates(
        coords, bond_u, bond_v, rest,
        1.1,        # repulsion radius
        1.0,        # repulsion strength
        0.02,       # step size
        RELAX_ITERATIONS,
    )

    conf = Conformer(coords=coords)
    dists = conf.distances()
    np.fill_diagonal(dists, np.inf)
    if np.min(dists) <= MIN_SEPARATION:
        raise EmbedFailure(
            f"min pairwise distance {np.min(dists):.3f} A after "
            f"{RELAX_ITERATIONS} relaxation iterations")
    bond_d = dists[bond_u, bond_v]
    if np.any(bond_d < 0.9) or np.any(bond_d > 2.0):
        raise EmbedFailure("bonded-atom distance outside [0.9, 2.0] A")
    return conf


def load_conformer_sidecar(path):
    """Parse `index<TAB>atom_index<TAB>x<TAB>y<TAB>z` rows.

    Returns {record_index: Conformer}; atom rows must be contiguous and
    zero-based per record.
    """
    per_record = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(
                    f"{path}:{line_no}: expected 5 tab-separated fields")
            rec, atom = int(parts[0]), int(parts[1])
            xyz = [float(v) for v in parts[2:]]
            per_record.setdefault(rec, []).append((atom, xyz))
    out = {}
    for rec, rows in per_record.items():
        rows.sort()
        indices = [a for a, _ in rows]
        if indices != list(range(len(rows))):
            raise ValueError(
                f"record {rec}: atom indices must be 0..{len(rows) - 1}")
        out[rec] = Conformer(
            coords=np.array([xyz for _, xyz in rows], dtype=np.float64))
    return out


def save_conformer_sidecar(path, conformers):
    with open(path, "w", encoding="utf-8") as f:
        for rec in sorted(conformers):
            for atom, xyz in enumerate(conformers[rec].coords):
                f.write(f"{rec}\t{atom}\t{float(xyz[0])!r}\t{float(xyz[1])!r}\t{float(xyz[2])!r}\n")
