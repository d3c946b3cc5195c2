"""Deterministic sketch-quality 2D depiction emitted as SVG.

Correctness bar is structural fidelity (atom/bond/highlight counts and
labels), not aesthetics. Ring systems are laid out as regular polygons,
chains fan out with fixed angular spacing; layout failures fall back to
a circle and are flagged in the markup.
"""

import math

from ..chemcore.graph import WILDCARD_Z, Z_TO_SYMBOL

BOND_LENGTH = 40.0


class LayoutFailure(Exception):
    pass


def _find_cycle(graph):
    """One shortest cycle via BFS, or None."""
    n = len(graph.atoms)
    best = None
    for start in range(n):
        parent = {start: (-1, None)}
        queue = [start]
        while queue:
            node = queue.pop(0)
            for bond in graph.incident_bonds(node):
                nb = bond.other(node)
                if nb not in parent:
                    parent[nb] = (node, bond)
                    queue.append(nb)
                elif parent[node][0] != nb and parent[nb][0] != node:
                    # reconstruct the two paths to the meeting point
                    path_a, cursor = [node], node
                    while parent[cursor][0] != -1:
                        cursor = parent[cursor][0]
                        path_a.append(cursor)
                    path_b, cursor = [nb], nb
                    while parent[cursor][0] != -1:
                        cursor = parent[cursor][0]
                        path_b.append(cursor)
                    common = set(path_a) & set(path_b)
                    cut_a = next(i for i, v in enumerate(path_a)
                                 if v in common)
                    cut_b = next(i for i, v in enumerate(path_b)
                                 if v in common)
                    cycle = path_a[:cut_a + 1] + path_b[:cut_b][::-1]
                    if best is None or len(cycle) < len(best):
                        best = cycle
        if best is not None and len(best) <= 6:
            break
    return best


def layout_graph(graph):
    """Deterministic 2D positions; returns (positions, flagged)."""
    n = len(graph.atoms)
    if n == 0:
        raise LayoutFailure("no atoms to lay out")
    positions = {}
    cycle = _find_cycle(graph)
    if cycle:
        k = len(cycle)
        radius = BOND_LENGTH / (2.0 * math.sin(math.pi / k))
        for i, idx in enumerate(cycle):
            angle = 2.0 * math.pi * i / k - math.pi / 2.0
            positions[idx] = (radius * math.cos(angle),
                              radius * math.sin(angle))
        queue = list(cycle)
    else:
        positions[0] = (0.0, 0.0)
        queue = [0]

    flip = 1.0
    while queue:
        node = queue.pop(0)
        x, y = positions[node]
        placed_dirs = []
        for bond in graph.incident_bonds(node):
            nb = bond.other(node)
            if nb in positions:
                px, py = positions[nb]
                placed_dirs.append(math.atan2(py - y, px - x))
        pending = [bond.other(node) for bond in graph.incident_bonds(node)
                   if bond.other(node) not in positions]
        for j, nb in enumerate(sorted(pending)):
            if placed_dirs:
                sx = sum(math.cos(d) for d in placed_dirs)
                sy = sum(math.sin(d) for d in placed_dirs)
                base = math.atan2(-sy, -sx)
            else:
                base = 0.0
            angle = base + flip * (math.pi / 3.0) * ((j + 1) // 2) \
                * (1 if j % 2 == 0 else -1)
            positions[nb] = (x + BOND_LENGTH * math.cos(angle),
                             y + BOND_LENGTH * math.sin(angle))
            flip = -flip
            queue.append(nb)

    # overlapping positions mean the sketch layout failed
    coords = list(positions.values())
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            dx = coords[i][0] - coords[j][0]
            dy = coords[i][1] - coords[j][1]
            if dx * dx + dy * dy < 1.0:
                raise LayoutFailure("overlapping atom positions")
    return positions


def _circular_layout(graph):
    n = len(graph.atoms)
    radius = BOND_LENGTH * max(1.0, n / (2.0 * math.pi) * 1.5)
    return {i: (radius * math.cos(2 * math.pi * i / n),
                radius * math.sin(2 * math.pi * i / n))
            for i in range(n)}


def _label(atom):
    if atom.z == WILDCARD_Z:
        return "*"
    sym = Z_TO_SYMBOL.get(atom.z, "?")
    return sym.lower() if atom.aromatic else sym


def render_svg(graph, highlights=(), scale=1.0):
    """Deterministic SVG markup with labeled atoms and colorable
    highlights."""
    flagged = False
    try:
        positions = layout_graph(graph)
    except LayoutFailure:
        positions = _circular_layout(graph)
        flagged = True

    xs = [p[0] for p in positions.values()]
    ys = [p[1] for p in positions.values()]
    pad = 30.0
    min_x, min_y = min(xs) - pad, min(ys) - pad
    width = (max(xs) - min(xs)) + 2 * pad
    height = (max(ys) - min(ys)) + 2 * pad

    def pt(idx):
        x, y = positions[idx]
        return (x - min_x) * scale, (y - min_y) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{width * scale:.2f}" height="{height * scale:.2f}" '
        f'data-layout="{"fallback" if flagged else "sketch"}">'
    ]
    for bond in graph.bonds:
        x1, y1 = pt(bond.u)
        x2, y2 = pt(bond.v)
        parts.append(
            f'<line class="bond" data-order="{bond.order}" '
            f'x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="black" stroke-width="{2 if bond.order > 1 else 1}"/>')
    highlight_set = set(highlights)
    for idx in sorted(highlight_set):
        if idx < 0 or idx >= len(graph.atoms):
            continue
        x, y = pt(idx)
        parts.append(
            f'<circle class="highlight" data-atom="{idx}" cx="{x:.2f}" '
            f'cy="{y:.2f}" r="14" fill="gold" fill-opacity="0.5"/>')
    for idx, atom in enumerate(graph.atoms):
        x, y = pt(idx)
        parts.append(
            f'<circle class="atom" data-atom="{idx}" cx="{x:.2f}" '
            f'cy="{y:.2f}" r="9" fill="white" stroke="black"/>')
        parts.append(
            f'<text class="atom-label" data-atom="{idx}" x="{x:.2f}" '
            f'y="{y + 4:.2f}" text-anchor="middle" '
            f'font-size="10">{_label(atom)}</text>')
    parts.append("</svg>")
    return "".join(parts)
