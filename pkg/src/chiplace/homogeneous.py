"""Grid representation for homogeneously shaped chiplets.

A placement is an ``rows x cols`` grid (row 0 at the bottom) whose cells are
empty or hold one chiplet instance with a rotation. Chiplets with a single PHY
always have that PHY facing an occupied neighbor cell.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .errors import (
    GenerationExhausted,
    InvalidSpec,
    MergeExhausted,
    MutationExhausted,
    NoValidMove,
    Unconnected,
)
from .model import (
    EPS,
    Architecture,
    Candidate,
    ChipletType,
    IciTopology,
    PlacedChiplet,
    Rotation,
    Side,
)

RETRY_CAP = 1000
EMPTY = -1
_EMPTY_TYPE = 3


class MutationMode(str, enum.Enum):
    ANY_BOTH = "any-both"
    ANY_ONE = "any-one"
    NEIGHBOR_BOTH = "neighbor-both"
    NEIGHBOR_ONE = "neighbor-one"

    @classmethod
    def parse(cls, value) -> "MutationMode":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("_", "-").replace("neighbors-", "neighbor-")
        return cls(v)

    @property
    def neighbor(self) -> bool:
        return self in (MutationMode.NEIGHBOR_BOTH, MutationMode.NEIGHBOR_ONE)

    @property
    def both(self) -> bool:
        return self in (MutationMode.ANY_BOTH, MutationMode.NEIGHBOR_BOTH)


@dataclass(frozen=True)
class GridPlacement:
    """``ids[k]`` is the instance in cell ``k = row * cols + col`` (``-1`` if empty)."""

    rows: int
    cols: int
    ids: tuple[int, ...]
    rots: tuple[int, ...]

    @property
    def cells(self) -> list[Optional[tuple[int, Rotation]]]:
        return [None if i == EMPTY else (i, Rotation(r)) for i, r in zip(self.ids, self.rots)]

    def cell(self, row: int, col: int) -> Optional[tuple[int, Rotation]]:
        k = row * self.cols + col
        i = self.ids[k]
        return None if i == EMPTY else (i, Rotation(self.rots[k]))

    def position_of(self, instance_id: int) -> tuple[int, int]:
        k = self.ids.index(instance_id)
        return divmod(k, self.cols)

    def to_dict(self) -> dict:
        return {
            "kind": "grid",
            "rows": self.rows,
            "cols": self.cols,
            "cells": [None if i == EMPTY else [i, r] for i, r in zip(self.ids, self.rots)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridPlacement":
        ids = tuple(EMPTY if c is None else int(c[0]) for c in d["cells"])
        rots = tuple(0 if c is None else int(c[1]) for c in d["cells"])
        return cls(int(d["rows"]), int(d["cols"]), ids, rots)


def default_grid(n: int) -> tuple[int, int]:
    rows = math.ceil(math.sqrt(n))
    return rows, math.ceil(n / rows)


class HomogeneousRepresentation:
    """Random generation, mutation, merge and topology extraction on a grid."""

    def __init__(self, arch: Architecture, mode: MutationMode = MutationMode.NEIGHBOR_ONE,
                 rows: Optional[int] = None, cols: Optional[int] = None):
        self.arch = arch
        self.mode = MutationMode.parse(mode)
        specs = arch.chiplets
        w, h = specs[0].width, specs[0].height
        for s in specs:
            if abs(s.width - w) > EPS or abs(s.height - h) > EPS:
                raise InvalidSpec("homogeneous placement needs chiplets of identical dimensions")
        if abs(w - h) > EPS:
            raise InvalidSpec("homogeneous placement needs square chiplets")
        if arch.grid_spacing_mm > arch.max_link_length_mm + EPS:
            raise InvalidSpec("grid_spacing_mm exceeds the maximum link length")
        by_type = {}
        for s in specs:
            if by_type.setdefault(s.ctype, s) != s:
                raise InvalidSpec(f"all {s.ctype.value} chiplets must share one definition")
        rows = rows or arch.grid_rows
        cols = cols or arch.grid_cols
        if rows is None or cols is None:
            dr, dc = default_grid(arch.n)
            rows, cols = rows or dr, cols or dc
        if rows <= 0 or cols <= 0 or rows * cols < arch.n:
            raise InvalidSpec(f"a {rows}x{cols} grid cannot hold {arch.n} chiplets")
        self.rows = rows
        self.cols = cols
        self.size = w
        self.chiplet_area = w * h
        self.pitch = w + arch.grid_spacing_mm

        # side -> phy index, per instance and rotation
        self._side_phy = []
        for s in specs:
            per_rot = []
            for r in Rotation:
                sides = s.phy_sides(r)
                if any(sd is None for sd in sides):
                    raise InvalidSpec(f"chiplet {s.name!r}: homogeneous PHYs must sit on a side, not a corner")
                if len(set(sides)) != len(sides):
                    raise InvalidSpec(f"chiplet {s.name!r}: at most one PHY per side")
                per_rot.append({sd: k for k, sd in enumerate(sides)})
            self._side_phy.append(per_rot)
        self._type = [s.ctype.code for s in specs]
        self._single = [len(s.phys) == 1 for s in specs]
        self._allowed = [tuple(int(r) for r in s.allowed_rotations) for s in specs]
        self._phy_side0 = [s.phy_sides(Rotation.R0)[0] for s in specs]
        self._instances = {t: arch.instances_of(t) for t in ChipletType}
        self._type_of_code = {t.code: t for t in ChipletType}

        nc = rows * cols
        self._neighbors = []
        for k in range(nc):
            r, c = divmod(k, cols)
            nb = {}
            if r > 0:
                nb[Side.SOUTH] = k - cols
            if r < rows - 1:
                nb[Side.NORTH] = k + cols
            if c > 0:
                nb[Side.WEST] = k - 1
            if c < cols - 1:
                nb[Side.EAST] = k + 1
            self._neighbors.append(nb)
        self._adjacent_pairs = [(k, k + 1) for k in range(nc) if (k % cols) < cols - 1]
        self._adjacent_pairs += [(k, k + cols) for k in range(nc - cols)]

    # -- orientation rule -------------------------------------------------

    def valid_rotations(self, ids, k) -> list[int]:
        i = ids[k]
        if not self._single[i]:
            return list(self._allowed[i])
        nb = self._neighbors[k]
        side0 = self._phy_side0[i]
        out = []
        for r in self._allowed[i]:
            j = nb.get((side0 + r) % 4)
            if j is not None and ids[j] != EMPTY:
                out.append(r)
        return out

    def _repair(self, ids, rots, rng, keep=None) -> bool:
        """Re-draw single-PHY rotations that no longer face a chiplet."""
        for k, i in enumerate(ids):
            if i == EMPTY or not self._single[i]:
                continue
            if keep is not None and not keep[k]:
                valid = self.valid_rotations(ids, k)
                if not valid:
                    return False
                rots[k] = rng.choice(valid)
                continue
            j = self._neighbors[k].get((self._phy_side0[i] + rots[k]) % 4)
            if j is None or ids[j] == EMPTY:
                valid = self.valid_rotations(ids, k)
                if not valid:
                    return False
                rots[k] = rng.choice(valid)
        return True

    def _canonical(self, ids, rots) -> GridPlacement:
        nxt = {t.code: iter(self._instances[t]) for t in ChipletType}
        out = [EMPTY if i == EMPTY else next(nxt[self._type[i]]) for i in ids]
        rot = [0 if i == EMPTY else r for i, r in zip(ids, rots)]
        return GridPlacement(self.rows, self.cols, tuple(out), tuple(rot))

    def _content_type(self, i) -> int:
        return _EMPTY_TYPE if i == EMPTY else self._type[i]

    # -- public operations --------------------------------------------------

    def random_placement(self, rng: random.Random) -> GridPlacement:
        return self.random_candidate(rng).placement

    def random_candidate(self, rng: random.Random) -> Candidate:
        nc = self.rows * self.cols
        for _ in range(RETRY_CAP):
            ids = [EMPTY] * nc
            for iid, k in enumerate(rng.sample(range(nc), self.arch.n)):
                ids[k] = iid
            rots = [0] * nc
            if not self._repair(ids, rots, rng, keep=[i == EMPTY or not self._single[i] for i in ids]):
                continue
            for k, i in enumerate(ids):
                if i != EMPTY and not self._single[i]:
                    rots[k] = rng.choice(self._allowed[i])
            cand = self._finish(ids, rots)
            if cand is not None:
                return cand
        raise GenerationExhausted(f"no connected placement after {RETRY_CAP} attempts")

    def _finish(self, ids, rots) -> Optional[Candidate]:
        p = self._canonical(ids, rots)
        try:
            topo = self.extract_topology(p)
        except Unconnected:
            return None
        return Candidate(p, topo, self.area(p))

    def _swap(self, ids, rots, neighbor: bool, rng) -> None:
        if neighbor:
            options = [
                (a, b) for a, b in self._adjacent_pairs
                if self._content_type(ids[a]) != self._content_type(ids[b])
            ]
            if not options:
                raise NoValidMove("no adjacent cells with different contents")
            a, b = rng.choice(options)
        else:
            if len({self._content_type(i) for i in ids}) < 2:
                raise NoValidMove("all cells hold the same chiplet type")
            nc = len(ids)
            while True:
                a = rng.randrange(nc)
                b = rng.randrange(nc)
                if self._content_type(ids[a]) != self._content_type(ids[b]):
                    break
        ids[a], ids[b] = ids[b], ids[a]
        rots[a], rots[b] = rots[b], rots[a]

    def _rotation_options(self, ids, rots) -> list[tuple[int, list[int]]]:
        out = []
        for k, i in enumerate(ids):
            if i == EMPTY or len(self._allowed[i]) < 2:
                continue
            alts = [r for r in self.valid_rotations(ids, k) if r != rots[k]]
            if alts:
                out.append((k, alts))
        return out

    def mutate(self, p: GridPlacement, rng: random.Random, mode: Optional[MutationMode] = None) -> GridPlacement:
        return self.mutate_candidate(p, rng, mode).placement

    def mutate_candidate(self, p: GridPlacement, rng: random.Random,
                         mode: Optional[MutationMode] = None) -> Candidate:
        mode = self.mode if mode is None else MutationMode.parse(mode)
        for _ in range(RETRY_CAP):
            ids = list(p.ids)
            rots = list(p.rots)
            if mode.both:
                self._swap(ids, rots, mode.neighbor, rng)
                if not self._repair(ids, rots, rng):
                    continue
                options = self._rotation_options(ids, rots)
                if options:
                    k, alts = rng.choice(options)
                    rots[k] = rng.choice(alts)
            else:
                options = self._rotation_options(ids, rots) if rng.random() >= 0.5 else None
                if options:
                    k, alts = rng.choice(options)
                    rots[k] = rng.choice(alts)
                else:
                    self._swap(ids, rots, mode.neighbor, rng)
                    if not self._repair(ids, rots, rng):
                        continue
            cand = self._finish(ids, rots)
            if cand is not None and cand.placement != p:
                return cand
        raise MutationExhausted(f"no connected mutation after {RETRY_CAP} attempts")

    def merge(self, x: GridPlacement, y: GridPlacement, rng: random.Random) -> GridPlacement:
        return self.merge_candidate(x, y, rng).placement

    def fixed_cells(self, x: GridPlacement, y: GridPlacement) -> list[int]:
        return [
            k for k in range(len(x.ids))
            if self._content_type(x.ids[k]) == self._content_type(y.ids[k])
        ]

    def merge_candidate(self, x: GridPlacement, y: GridPlacement, rng: random.Random) -> Candidate:
        if (x.rows, x.cols) != (y.rows, y.cols):
            raise ValueError("merge needs placements on the same grid")
        nc = len(x.ids)
        fixed = set(self.fixed_cells(x, y))
        remaining = {t: list(v) for t, v in ((t.code, self._instances[t]) for t in ChipletType)}
        remaining[_EMPTY_TYPE] = [EMPTY] * (nc - self.arch.n)
        base = [EMPTY] * nc
        keep_rot = [False] * nc
        for k in sorted(fixed):
            t = self._content_type(x.ids[k])
            base[k] = remaining[t].pop()
            keep_rot[k] = base[k] != EMPTY and x.rots[k] == y.rots[k]
        leftover = [v for t in sorted(remaining) for v in remaining[t]]
        free = [k for k in range(nc) if k not in fixed]
        for _ in range(RETRY_CAP):
            ids = list(base)
            rng.shuffle(leftover)
            for k, i in zip(free, leftover):
                ids[k] = i
            rots = [x.rots[k] if keep_rot[k] else 0 for k in range(nc)]
            keep = [keep_rot[k] or ids[k] == EMPTY or not self._single[ids[k]] for k in range(nc)]
            if not self._repair(ids, rots, rng, keep=keep):
                continue
            for k, i in enumerate(ids):
                if i != EMPTY and not self._single[i] and not keep_rot[k]:
                    rots[k] = rng.choice(self._allowed[i])
            cand = self._finish(ids, rots)
            if cand is not None:
                return cand
        raise MergeExhausted(f"no connected merge after {RETRY_CAP} attempts")

    def extract_topology(self, p: GridPlacement) -> IciTopology:
        """Link every pair of facing PHYs of 4-adjacent chiplets.

        Raises ``Unconnected`` when some chiplets cannot reach each other.
        """
        ids, rots, cols = p.ids, p.rots, p.cols
        spacing = self.arch.grid_spacing_mm
        side_phy = self._side_phy
        links = []
        nc = len(ids)
        for k in range(nc):
            a = ids[k]
            if a == EMPTY:
                continue
            sa = side_phy[a][rots[k]]
            if (k % cols) < cols - 1:
                b = ids[k + 1]
                if b != EMPTY:
                    pa = sa.get(Side.EAST)
                    pb = side_phy[b][rots[k + 1]].get(Side.WEST)
                    if pa is not None and pb is not None:
                        links.append(_link(a, pa, b, pb, spacing))
            if k + cols < nc:
                b = ids[k + cols]
                if b != EMPTY:
                    pa = sa.get(Side.NORTH)
                    pb = side_phy[b][rots[k + cols]].get(Side.SOUTH)
                    if pa is not None and pb is not None:
                        links.append(_link(a, pa, b, pb, spacing))
        links.sort()
        topo = self.arch.topology(links)
        if not topo.is_connected():
            raise Unconnected("grid placement leaves chiplets unreachable")
        return topo

    def area(self, p: Optional[GridPlacement] = None) -> float:
        rows, cols = (self.rows, self.cols) if p is None else (p.rows, p.cols)
        return self.chiplet_area * rows * cols

    def placed_chiplets(self, p: GridPlacement) -> list[PlacedChiplet]:
        out = []
        for k, i in enumerate(p.ids):
            if i == EMPTY:
                continue
            r, c = divmod(k, p.cols)
            out.append(PlacedChiplet(self.arch.chiplets[i], i, (c * self.pitch, r * self.pitch), Rotation(p.rots[k])))
        out.sort(key=lambda pc: pc.instance_id)
        return out


def _link(a, pa, b, pb, length):
    na, nb = (a, pa), (b, pb)
    return (na, nb, length) if na < nb else (nb, na, length)


@lru_cache(maxsize=16)
def _rep(arch: Architecture) -> HomogeneousRepresentation:
    return HomogeneousRepresentation(arch)


def random_placement(arch: Architecture, rng: random.Random) -> GridPlacement:
    return _rep(arch).random_placement(rng)


def mutate(arch: Architecture, p: GridPlacement, mode: MutationMode, rng: random.Random) -> GridPlacement:
    return _rep(arch).mutate(p, rng, mode)


def merge(arch: Architecture, x: GridPlacement, y: GridPlacement, rng: random.Random) -> GridPlacement:
    return _rep(arch).merge(x, y, rng)


def extract_topology(arch: Architecture, p: GridPlacement) -> IciTopology:
    return _rep(arch).extract_topology(p)


def area(arch: Architecture, p: GridPlacement) -> float:
    return _rep(arch).area(p)
