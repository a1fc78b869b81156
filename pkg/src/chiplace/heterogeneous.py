"""Order/rotation genome for heterogeneously shaped chiplets.

The optimizer manipulates the order and rotations in which a deterministic
corner placer puts the chiplets down, so every genome decodes to an
overlap-free layout. Orders are canonical by chiplet type: instance ids of a
type always appear in increasing order.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from . import kernels
from .errors import (
    GenerationExhausted,
    InvalidSpec,
    MergeExhausted,
    MutationExhausted,
    NoValidMove,
    Unconnected,
)
from .homogeneous import RETRY_CAP, MutationMode
from .model import (
    Architecture,
    Candidate,
    ChipletType,
    DistanceType,
    IciTopology,
    PlacedChiplet,
    Rotation,
    chiplets_connected,
)


@dataclass(frozen=True)
class Genome:
    """``rotations[i]`` is the rotation of the chiplet at ``order[i]``."""

    order: tuple[int, ...]
    rotations: tuple[int, ...]

    def key(self, arch: Architecture) -> tuple:
        return tuple(arch.types[i] for i in self.order), self.rotations

    def to_dict(self) -> dict:
        return {"kind": "genome", "order": list(self.order), "rotations": list(self.rotations)}

    @classmethod
    def from_dict(cls, d: dict) -> "Genome":
        return cls(tuple(int(i) for i in d["order"]), tuple(int(r) for r in d["rotations"]))


@dataclass(frozen=True)
class Layout:
    """Placed chiplets indexed by instance id; the layout starts at the origin."""

    placed: tuple[PlacedChiplet, ...]

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        rects = [p.rect for p in self.placed]
        return (
            min(r[0] for r in rects),
            min(r[1] for r in rects),
            max(r[2] for r in rects),
            max(r[3] for r in rects),
        )

    @property
    def width(self) -> float:
        x0, _, x1, _ = self.bounding_box
        return x1 - x0

    @property
    def height(self) -> float:
        _, y0, _, y1 = self.bounding_box
        return y1 - y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def to_dict(self) -> dict:
        return {"placed": [[p.instance_id, p.origin[0], p.origin[1], int(p.rotation)] for p in self.placed]}

    @classmethod
    def from_dict(cls, d: dict, arch: Architecture) -> "Layout":
        return cls(tuple(
            PlacedChiplet(arch.chiplets[i], i, (float(x), float(y)), Rotation(r)) for i, x, y, r in d["placed"]
        ))


class HeterogeneousRepresentation:
    def __init__(self, arch: Architecture, mode: MutationMode = MutationMode.ANY_ONE):
        self.arch = arch
        self.mode = MutationMode.parse(mode)
        by_type = {}
        for s in arch.chiplets:
            if by_type.setdefault(s.ctype, s) != s:
                raise InvalidSpec(f"all {s.ctype.value} chiplets must share one definition")
        self._type = arch.type_codes
        self._allowed = [tuple(int(r) for r in s.allowed_rotations) for s in arch.chiplets]
        self._instances = {t.code: arch.instances_of(t) for t in ChipletType}
        offsets = []
        total = 0
        for c in arch.phy_counts:
            offsets.append(total)
            total += c
        self._offsets = offsets
        self._owner = [i for i, c in enumerate(arch.phy_counts) for _ in range(c)]
        self._local = [k for c in arch.phy_counts for k in range(c)]
        self._internal = [
            (0.0, offsets[i] + a, offsets[i] + b)
            for i, s in enumerate(arch.chiplets) if s.relays
            for a in range(len(s.phys)) for b in range(a + 1, len(s.phys))
        ]

    # -- genome plumbing ------------------------------------------------------

    def canonical(self, order, rotations) -> Genome:
        nxt = {t: iter(ids) for t, ids in self._instances.items()}
        return Genome(tuple(next(nxt[self._type[i]]) for i in order), tuple(int(r) for r in rotations))

    def random_genome(self, rng: random.Random) -> Genome:
        return self.random_candidate(rng).placement

    def _draw(self, rng):
        order = list(range(self.arch.n))
        rng.shuffle(order)
        rots = [rng.choice(self._allowed[i]) for i in order]
        return self.canonical(order, rots)

    def random_candidate(self, rng: random.Random) -> Candidate:
        for _ in range(RETRY_CAP):
            cand = self._finish(self._draw(rng))
            if cand is not None:
                return cand
        raise GenerationExhausted(f"no connected placement after {RETRY_CAP} attempts")

    def _finish(self, g: Genome) -> Optional[Candidate]:
        layout = self.decode(g)
        try:
            topo = self.infer_topology(layout)
        except Unconnected:
            return None
        return Candidate(g, topo, layout.area, layout)

    def decode(self, g: Genome) -> Layout:
        specs = self.arch.chiplets
        ws = []
        hs = []
        for i, r in zip(g.order, g.rotations):
            w, h = specs[i].footprint(r)
            ws.append(w)
            hs.append(h)
        xs, ys = kernels.decode(ws, hs)
        placed = [None] * len(g.order)
        for i, r, x, y in zip(g.order, g.rotations, xs, ys):
            placed[i] = PlacedChiplet(specs[i], i, (x, y), Rotation(r))
        return Layout(tuple(placed))

    def _swap(self, order, rots, neighbor, rng):
        n = len(order)
        if neighbor:
            options = [i for i in range(n - 1) if self._type[order[i]] != self._type[order[i + 1]]]
            if not options:
                raise NoValidMove("no adjacent order positions with different types")
            a = rng.choice(options)
            b = a + 1
        else:
            if len({self._type[i] for i in order}) < 2:
                raise NoValidMove("all chiplets have the same type")
            while True:
                a = rng.randrange(n)
                b = rng.randrange(n)
                if self._type[order[a]] != self._type[order[b]]:
                    break
        order[a], order[b] = order[b], order[a]
        rots[a], rots[b] = rots[b], rots[a]

    def _rotate(self, order, rots, rng) -> bool:
        options = [k for k, i in enumerate(order) if len(self._allowed[i]) > 1]
        if not options:
            return False
        k = rng.choice(options)
        rots[k] = rng.choice([r for r in self._allowed[order[k]] if r != rots[k]])
        return True

    def mutate_genome(self, g: Genome, rng: random.Random, mode: Optional[MutationMode] = None) -> Genome:
        return self.mutate_candidate(g, rng, mode).placement

    def mutate_candidate(self, g: Genome, rng: random.Random, mode: Optional[MutationMode] = None) -> Candidate:
        mode = self.mode if mode is None else MutationMode.parse(mode)
        for _ in range(RETRY_CAP):
            order = list(g.order)
            rots = list(g.rotations)
            if mode.both:
                self._swap(order, rots, mode.neighbor, rng)
                self._rotate(order, rots, rng)
            elif rng.random() < 0.5 or not self._rotate(order, rots, rng):
                self._swap(order, rots, mode.neighbor, rng)
            cand = self._finish(self.canonical(order, rots))
            if cand is not None:
                return cand
        raise MutationExhausted(f"no connected mutation after {RETRY_CAP} attempts")

    def fixed_indices(self, x: Genome, y: Genome) -> list[int]:
        return [i for i, (a, b) in enumerate(zip(x.order, y.order)) if self._type[a] == self._type[b]]

    def merge_genomes(self, x: Genome, y: Genome, rng: random.Random) -> Genome:
        return self.merge_candidate(x, y, rng).placement

    def merge_candidate(self, x: Genome, y: Genome, rng: random.Random) -> Candidate:
        n = len(x.order)
        if len(y.order) != n:
            raise ValueError("merge needs genomes of the same architecture")
        fixed = set(self.fixed_indices(x, y))
        pool = {t: list(ids) for t, ids in self._instances.items()}
        base = [-1] * n
        for i in sorted(fixed):
            base[i] = pool[self._type[x.order[i]]].pop()
        leftover = [v for t in sorted(pool) for v in pool[t]]
        free = [i for i in range(n) if i not in fixed]
        for _ in range(RETRY_CAP):
            order = list(base)
            rng.shuffle(leftover)
            for i, v in zip(free, leftover):
                order[i] = v
            rots = []
            for i, v in enumerate(order):
                if i in fixed and x.rotations[i] == y.rotations[i]:
                    rots.append(x.rotations[i])
                else:
                    rots.append(rng.choice(self._allowed[v]))
            cand = self._finish(self.canonical(order, rots))
            if cand is not None:
                return cand
        raise MergeExhausted(f"no connected merge after {RETRY_CAP} attempts")

    # -- topology ---------------------------------------------------------------

    def infer_topology(self, layout: Layout, max_len: Optional[float] = None,
                       distance: Optional[DistanceType] = None) -> IciTopology:
        """Spanning-tree topology over PHYs, then greedy extra links.

        Candidate edges join PHYs of different chiplets at most ``max_len``
        apart; relay chiplets get zero-weight internal edges. Links come from
        Kruskal's algorithm restricted to edges whose PHYs are both still
        free, so each PHY carries at most one link; this equals the MST
        whenever the MST itself respects that limit. Remaining candidates are
        then added by increasing length when both PHYs are unused.
        """
        arch = self.arch
        max_len = arch.max_link_length_mm if max_len is None else max_len
        distance = arch.distance if distance is None else DistanceType(distance)
        px = []
        py = []
        for p in layout.placed:
            for x, y in p.absolute_phys():
                px.append(x)
                py.append(y)
        cands = kernels.candidate_edges(px, py, self._owner, max_len, distance == DistanceType.MANHATTAN)
        _, mst_weight = spanning_tree(len(px), cands, self._internal)
        tree, _ = spanning_tree(len(px), cands, self._internal, one_link_per_vertex=True)

        owner, local = self._owner, self._local
        used = set()
        links = []
        for w, a, b in tree:
            used.add(a)
            used.add(b)
            links.append(((owner[a], local[a]), (owner[b], local[b]), w))
        if not chiplets_connected(arch.phy_counts, arch.relay, ((a, b) for a, b, _ in links)):
            raise Unconnected("a chiplet has no D2D path to the rest")
        for w, a, b in cands:
            if a not in used and b not in used:
                used.add(a)
                used.add(b)
                links.append(((owner[a], local[a]), (owner[b], local[b]), w))
        links.sort()
        return arch.topology(links, mst_weight=mst_weight)

    def area(self, layout: Layout) -> float:
        return layout.area


def spanning_tree(n_vertices, candidates, internal, one_link_per_vertex=False):
    """Kruskal over candidate and internal edges, ordered by (weight, u, v).

    Returns the chosen candidate edges and their correctly rounded total
    weight (internal edges weigh 0 and are not returned). With ``one_link_per_vertex`` a candidate
    edge is skipped when one of its vertices already has a chosen candidate
    edge.
    """
    parent = list(range(n_vertices))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    edges = sorted([(w, a, b, True) for w, a, b in candidates] + [(w, a, b, False) for w, a, b in internal])
    used = set()
    chosen = []
    for w, a, b, is_candidate in edges:
        if is_candidate and one_link_per_vertex and (a in used or b in used):
            continue
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[ra] = rb
        if is_candidate:
            used.add(a)
            used.add(b)
            chosen.append((w, a, b))
    return chosen, math.fsum(w for w, _, _ in chosen)


@lru_cache(maxsize=16)
def _rep(arch: Architecture) -> HeterogeneousRepresentation:
    return HeterogeneousRepresentation(arch)


def decode(genome: Genome, arch: Architecture) -> Layout:
    return _rep(arch).decode(genome)


def random_genome(arch: Architecture, rng: random.Random) -> Genome:
    return _rep(arch).random_genome(rng)


def mutate_genome(arch: Architecture, g: Genome, mode: MutationMode, rng: random.Random) -> Genome:
    return _rep(arch).mutate_genome(g, rng, mode)


def merge_genomes(arch: Architecture, x: Genome, y: Genome, rng: random.Random) -> Genome:
    return _rep(arch).merge_genomes(x, y, rng)


def infer_topology(layout: Layout, arch: Architecture, max_len_mm: Optional[float] = None,
                   distance: Optional[DistanceType] = None) -> IciTopology:
    return _rep(arch).infer_topology(layout, max_len_mm, distance)


def area(layout: Layout) -> float:
    return layout.area
