"""Reference design: compute chiplets in a central 2D mesh, memory and IO around it."""

from __future__ import annotations

import math
from typing import Optional

from . import kernels
from .errors import BaselineInfeasible
from .heterogeneous import HeterogeneousRepresentation, Layout
from .homogeneous import EMPTY, GridPlacement, HomogeneousRepresentation
from .model import (
    Architecture,
    Candidate,
    ChipletType,
    PlacedChiplet,
    Rotation,
    Side,
    chiplets_connected,
    rects_overlap,
)

_STEP = {Side.SOUTH: (-1, 0), Side.EAST: (0, 1), Side.NORTH: (1, 0), Side.WEST: (0, -1)}


def mesh_shape(n: int) -> tuple[int, int]:
    """Rows x cols of the compute mesh: an exact factorization with aspect <= 2, else ceil-sqrt."""
    if n <= 0:
        return 0, 0
    for r in range(math.isqrt(n), 0, -1):
        if n % r == 0 and n // r <= 2 * r:
            return r, n // r
    r = math.ceil(math.sqrt(n))
    return r, math.ceil(n / r)


def _compute_cells(n: int) -> tuple[int, int, list[tuple[int, int]]]:
    rows, cols = mesh_shape(n)
    cells = [(r, c) for r in range(rows) for c in range(cols)][:n]
    last = n - (rows - 1) * cols
    if 0 < last < cols:
        # center the partial top row
        shift = (cols - last) // 2
        cells = cells[: (rows - 1) * cols] + [(rows - 1, shift + c) for c in range(last)]
    return rows, cols, cells


def perimeter_slots(cells: list[tuple[int, int]]) -> list[tuple[tuple[int, int], Side]]:
    """Free cells 4-adjacent to the mesh, clockwise from the west, each with the side facing the mesh."""
    occupied = set(cells)
    cr = sum(r for r, _ in cells) / len(cells)
    cc = sum(c for _, c in cells) / len(cells)
    slots = {}
    for r, c in cells:
        for side, (dr, dc) in _STEP.items():
            s = (r + dr, c + dc)
            if s in occupied or s in slots:
                continue
            # the slot faces back toward this mesh cell
            slots[s] = Side((side + 2) % 4)

    def clockwise(s):
        ang = math.atan2(s[0] - cr, s[1] - cc)
        return ((math.pi - ang) % (2 * math.pi), s)

    return [(s, slots[s]) for s in sorted(slots, key=clockwise)]


def _assign(arch: Architecture, slots) -> list[tuple[int, tuple[int, int], Side]]:
    mem = arch.instances_of(ChipletType.MEMORY)
    io = arch.instances_of(ChipletType.IO)
    k = len(mem) + len(io)
    if len(slots) < k:
        raise BaselineInfeasible(f"{len(slots)} perimeter slots for {k} memory/IO chiplets")
    # alternate memory and IO while both last
    seq = []
    while mem or io:
        if mem:
            seq.append(mem.pop(0))
        if io:
            seq.append(io.pop(0))
    picks = [math.floor(i * len(slots) / k) for i in range(k)]
    return [(iid, slots[j][0], slots[j][1]) for iid, j in zip(seq, picks)]


def _facing_rotation(spec, side: Side) -> Optional[Rotation]:
    for r in spec.allowed_rotations:
        if side in spec.phy_sides(r):
            return r
    for r in Rotation:
        if side in spec.phy_sides(r):
            return r
    return None


def _grid_baseline(arch: Architecture, rep: HomogeneousRepresentation) -> Candidate:
    compute = arch.instances_of(ChipletType.COMPUTE)
    if not compute:
        raise BaselineInfeasible("baseline needs at least one compute chiplet")
    _, _, cells = _compute_cells(len(compute))
    placed = {cell: (iid, Rotation.R0) for iid, cell in zip(compute, cells)}
    for iid, cell, side in _assign(arch, perimeter_slots(cells)):
        rot = _facing_rotation(arch.chiplets[iid], side)
        if rot is None:
            raise BaselineInfeasible(f"chiplet {iid} has no PHY that can face the mesh")
        placed[cell] = (iid, rot)
    r0 = min(r for r, _ in placed)
    c0 = min(c for _, c in placed)
    rows = max(r for r, _ in placed) - r0 + 1
    cols = max(c for _, c in placed) - c0 + 1
    ids = [EMPTY] * (rows * cols)
    rots = [0] * (rows * cols)
    for (r, c), (iid, rot) in placed.items():
        k = (r - r0) * cols + (c - c0)
        ids[k] = iid
        rots[k] = int(rot)
    p = GridPlacement(rows, cols, tuple(ids), tuple(rots))
    topo = rep.extract_topology(p)
    return Candidate(p, topo, rep.area(p))


def _layout_baseline(arch: Architecture, rep: HeterogeneousRepresentation) -> Candidate:
    compute = arch.instances_of(ChipletType.COMPUTE)
    if not compute:
        raise BaselineInfeasible("baseline needs at least one compute chiplet")
    cspec = arch.chiplets[compute[0]]
    w, h = cspec.width, cspec.height
    _, _, cells = _compute_cells(len(compute))
    placed = []
    cell_of = {}
    for iid, (r, c) in zip(compute, cells):
        placed.append(PlacedChiplet(cspec, iid, (c * w, r * h), Rotation.R0))
        cell_of[iid] = (r, c)
    for iid, (r, c), side in _assign(arch, perimeter_slots(cells)):
        spec = arch.chiplets[iid]
        rot = _facing_rotation(spec, side)
        if rot is None:
            raise BaselineInfeasible(f"chiplet {iid} has no PHY that can face the mesh")
        fw, fh = spec.footprint(rot)
        # the mesh cell this slot faces, and that cell's edge
        mr, mc = r + _STEP[side][0], c + _STEP[side][1]
        x0, y0 = mc * w, mr * h
        if side == Side.NORTH:
            origin = (x0 + (w - fw) / 2, y0 - fh)
        elif side == Side.SOUTH:
            origin = (x0 + (w - fw) / 2, y0 + h)
        elif side == Side.EAST:
            origin = (x0 - fw, y0 + (h - fh) / 2)
        else:
            origin = (x0 + w, y0 + (h - fh) / 2)
        pc = PlacedChiplet(spec, iid, origin, rot)
        for other in placed:
            if rects_overlap(pc.rect, other.rect):
                raise BaselineInfeasible(f"perimeter chiplet {iid} overlaps chiplet {other.instance_id}")
        placed.append(pc)
    dx = -min(p.rect[0] for p in placed)
    dy = -min(p.rect[1] for p in placed)
    placed = sorted(
        (PlacedChiplet(p.spec, p.instance_id, (p.origin[0] + dx, p.origin[1] + dy), p.rotation) for p in placed),
        key=lambda p: p.instance_id,
    )
    layout = Layout(tuple(placed))
    topo = _mesh_links(arch, layout, cell_of)
    return Candidate(None, topo, layout.area, layout)


def _mesh_links(arch: Architecture, layout: Layout, cell_of):
    """Mesh links between adjacent compute cells, then every other chiplet to its nearest free compute PHY."""
    owner = []
    local = []
    px = []
    py = []
    for p in layout.placed:
        for k, (x, y) in enumerate(p.absolute_phys()):
            owner.append(p.instance_id)
            local.append(k)
            px.append(x)
            py.append(y)
    manhattan = arch.distance.value == "manhattan"
    cands = kernels.candidate_edges(px, py, owner, arch.max_link_length_mm, manhattan)

    def adjacent(a, b):
        (ra, ca), (rb, cb) = cell_of[a], cell_of[b]
        return abs(ra - rb) + abs(ca - cb) == 1

    mesh = []
    attach = []
    paired = set()
    for w, i, j in cands:
        a, b = owner[i], owner[j]
        if a in cell_of and b in cell_of:
            # one link per adjacent pair: the shortest
            if adjacent(a, b) and (a, b) not in paired:
                paired.add((a, b))
                mesh.append((w, i, j))
        elif a in cell_of or b in cell_of:
            attach.append((w, i, j))
    used = set()
    links = []
    for w, i, j in mesh + attach:
        if i in used or j in used:
            continue
        used.add(i)
        used.add(j)
        links.append(((owner[i], local[i]), (owner[j], local[j]), w))
    if not chiplets_connected(arch.phy_counts, arch.relay, ((a, b) for a, b, _ in links)):
        raise BaselineInfeasible("baseline topology leaves chiplets unreachable")
    links.sort()
    return arch.topology(links)


def build_baseline(arch: Architecture, representation) -> Candidate:
    """Baseline candidate for either representation; evaluate it with the run's evaluator."""
    if isinstance(representation, HomogeneousRepresentation):
        return _grid_baseline(arch, representation)
    if isinstance(representation, HeterogeneousRepresentation):
        return _layout_baseline(arch, representation)
    raise TypeError(f"unsupported representation {type(representation).__name__}")

