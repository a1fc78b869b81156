"""Domain types: chiplet catalog, rotations, placed chiplets and ICI topologies."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .errors import InvalidSpec

EPS = 1e-9


class ChipletType(str, enum.Enum):
    COMPUTE = "compute"
    MEMORY = "memory"
    IO = "io"

    @property
    def code(self) -> int:
        return _TYPE_CODES[self]


_TYPE_CODES = {ChipletType.COMPUTE: 0, ChipletType.MEMORY: 1, ChipletType.IO: 2}


class Rotation(enum.IntEnum):
    """Counterclockwise quarter turns."""

    R0 = 0
    R90 = 1
    R180 = 2
    R270 = 3


class RotationClass(enum.Enum):
    INVARIANT = "invariant"
    HYBRID = "hybrid"
    SENSITIVE = "sensitive"


class DistanceType(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"


class Side(enum.IntEnum):
    """Chiplet sides, numbered so that a CCW quarter turn maps ``s`` to ``(s + 1) % 4``."""

    SOUTH = 0
    EAST = 1
    NORTH = 2
    WEST = 3


ALLOWED_ROTATIONS = {
    RotationClass.INVARIANT: (Rotation.R0,),
    RotationClass.HYBRID: (Rotation.R0, Rotation.R90),
    RotationClass.SENSITIVE: (Rotation.R0, Rotation.R90, Rotation.R180, Rotation.R270),
}


def rotate_point(x: float, y: float, width: float, height: float, rotation: Rotation) -> tuple[float, float]:
    """Rotate a point of a ``width x height`` rectangle CCW about its center.

    The rotated rectangle is re-anchored so its lower-left corner is at the origin.
    """
    r = int(rotation) % 4
    if r == 0:
        return x, y
    if r == 1:
        return height - y, x
    if r == 2:
        return width - x, height - y
    return y, width - x


def rotated_size(width: float, height: float, rotation: Rotation) -> tuple[float, float]:
    return (height, width) if int(rotation) % 2 else (width, height)


def side_of(x: float, y: float, width: float, height: float) -> Optional[Side]:
    """Side a boundary point lies on; ``None`` for corners and interior points."""
    on = []
    if abs(y) <= EPS:
        on.append(Side.SOUTH)
    if abs(x - width) <= EPS:
        on.append(Side.EAST)
    if abs(y - height) <= EPS:
        on.append(Side.NORTH)
    if abs(x) <= EPS:
        on.append(Side.WEST)
    return on[0] if len(on) == 1 else None


def _on_boundary(x: float, y: float, width: float, height: float) -> bool:
    inside = -EPS <= x <= width + EPS and -EPS <= y <= height + EPS
    edge = abs(x) <= EPS or abs(y) <= EPS or abs(x - width) <= EPS or abs(y - height) <= EPS
    return inside and edge


@dataclass(frozen=True)
class Phy:
    """PHY position in mm, relative to the unrotated chiplet's lower-left corner."""

    x: float
    y: float


@dataclass(frozen=True)
class ChipletSpec:
    name: str
    ctype: ChipletType
    width: float
    height: float
    phys: tuple[Phy, ...]
    can_relay: bool = False

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidSpec(f"chiplet {self.name!r}: width and height must be positive")
        if not self.phys:
            raise InvalidSpec(f"chiplet {self.name!r}: needs at least one PHY")
        object.__setattr__(self, "phys", tuple(self.phys))
        object.__setattr__(self, "ctype", ChipletType(self.ctype))
        for i, p in enumerate(self.phys):
            if not _on_boundary(p.x, p.y, self.width, self.height):
                raise InvalidSpec(
                    f"chiplet {self.name!r}: PHY {i} at ({p.x}, {p.y}) is not on the chiplet boundary"
                )

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def relays(self) -> bool:
        """True when the chiplet can actually forward traffic (needs two PHYs)."""
        return self.can_relay and len(self.phys) >= 2

    def footprint(self, rotation: Rotation) -> tuple[float, float]:
        return rotated_size(self.width, self.height, rotation)

    def rotated_phys(self, rotation: Rotation) -> tuple[tuple[float, float], ...]:
        return self._rotated_phys[int(rotation)]

    @cached_property
    def _rotated_phys(self):
        return tuple(
            tuple(rotate_point(p.x, p.y, self.width, self.height, r) for p in self.phys)
            for r in Rotation
        )

    def phy_sides(self, rotation: Rotation) -> tuple[Optional[Side], ...]:
        w, h = self.footprint(rotation)
        return tuple(side_of(x, y, w, h) for x, y in self.rotated_phys(rotation))

    @cached_property
    def rotation_class(self) -> RotationClass:
        return rotation_class(self)

    @cached_property
    def allowed_rotations(self) -> tuple[Rotation, ...]:
        return ALLOWED_ROTATIONS[self.rotation_class]


def _rotation_signature(spec: ChipletSpec, rotation: Rotation):
    w, h = spec.footprint(rotation)
    pts = sorted(spec.rotated_phys(rotation))
    return (w, h), pts


def _same_signature(a, b) -> bool:
    (wa, ha), pa = a
    (wb, hb), pb = b
    if abs(wa - wb) > EPS or abs(ha - hb) > EPS or len(pa) != len(pb):
        return False
    # Sorting can order near-equal points differently, so match greedily.
    remaining = list(pb)
    for x, y in pa:
        for k, (u, v) in enumerate(remaining):
            if abs(x - u) <= EPS and abs(y - v) <= EPS:
                del remaining[k]
                break
        else:
            return False
    return True


def rotation_class(spec: ChipletSpec) -> RotationClass:
    sig = [_rotation_signature(spec, r) for r in Rotation]
    if _same_signature(sig[0], sig[1]):
        # A quarter-turn symmetry implies full symmetry.
        return RotationClass.INVARIANT
    if _same_signature(sig[0], sig[2]):
        return RotationClass.HYBRID
    return RotationClass.SENSITIVE


def allowed_rotations(spec_or_class) -> tuple[Rotation, ...]:
    if isinstance(spec_or_class, ChipletSpec):
        return spec_or_class.allowed_rotations
    return ALLOWED_ROTATIONS[spec_or_class]


@dataclass(frozen=True)
class PlacedChiplet:
    spec: ChipletSpec
    instance_id: int
    origin: tuple[float, float]
    rotation: Rotation = Rotation.R0

    @property
    def size(self) -> tuple[float, float]:
        return self.spec.footprint(self.rotation)

    @property
    def rect(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1)."""
        w, h = self.size
        x, y = self.origin
        return x, y, x + w, y + h

    def absolute_phys(self) -> list[tuple[float, float]]:
        return absolute_phys(self)


def absolute_phys(p: PlacedChiplet) -> list[tuple[float, float]]:
    ox, oy = p.origin
    return [(ox + x, oy + y) for x, y in p.spec.rotated_phys(p.rotation)]


def rects_overlap(a, b) -> bool:
    """Interior intersection test for (x0, y0, x1, y1) rectangles; shared edges are fine."""
    return a[0] < b[2] - EPS and b[0] < a[2] - EPS and a[1] < b[3] - EPS and b[1] < a[3] - EPS


@dataclass(frozen=True)
class LatencyParams:
    """Cycle counts for one PHY traversal, one link, and one relay hop."""

    l_phy: int = 12
    l_link: int = 1
    l_relay: int = 10

    def __post_init__(self):
        for name in ("l_phy", "l_link", "l_relay"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InvalidSpec(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def hop(self) -> int:
        return 2 * self.l_phy + self.l_link


Node = tuple[int, int]  # (instance_id, phy index)


@dataclass(frozen=True)
class IciTopology:
    """Graph over PHY nodes.

    ``d2d_links`` are ``(node_a, node_b, length_mm)`` with ``node_a < node_b``.
    ``mst_weight`` is the spanning-tree weight computed during inference, when
    the topology was inferred by spanning tree.
    """

    chiplet_types: tuple[ChipletType, ...]
    phy_counts: tuple[int, ...]
    relay: tuple[bool, ...]
    d2d_links: tuple[tuple[Node, Node, float], ...]
    relay_edges: tuple[tuple[Node, Node], ...] = ()
    mst_weight: Optional[float] = None

    @property
    def n_chiplets(self) -> int:
        return len(self.chiplet_types)

    @property
    def nodes(self) -> list[Node]:
        return [(i, k) for i, n in enumerate(self.phy_counts) for k in range(n)]

    def chiplet_links(self) -> list[tuple[int, int]]:
        return [(a[0], b[0]) for a, b, _ in self.d2d_links]

    def is_connected(self) -> bool:
        return chiplets_connected(self.phy_counts, self.relay, ((a, b) for a, b, _ in self.d2d_links))

    def violations(self, max_link_length: Optional[float] = None) -> list[str]:
        out = []
        used: dict[Node, int] = {}
        for k, (a, b, length) in enumerate(self.d2d_links):
            for node in (a, b):
                if not (0 <= node[0] < self.n_chiplets and 0 <= node[1] < self.phy_counts[node[0]]):
                    out.append(f"link {k}: unknown node {node}")
                if node in used:
                    out.append(f"link {k}: PHY {node} already used by link {used[node]}")
                used[node] = k
            if a[0] == b[0]:
                out.append(f"link {k}: connects two PHYs of chiplet {a[0]}")
            if max_link_length is not None and length > max_link_length + EPS:
                out.append(f"link {k}: length {length} exceeds {max_link_length}")
        expected = set(relay_edges_for(self.phy_counts, self.relay))
        if set(self.relay_edges) != expected:
            out.append("relay edges do not match the relay-capable chiplets")
        if not self.is_connected():
            out.append("chiplets are not mutually reachable")
        return out

    def to_dict(self) -> dict:
        return {
            "chiplet_types": [t.value for t in self.chiplet_types],
            "phy_counts": list(self.phy_counts),
            "relay": list(self.relay),
            "d2d_links": [[list(a), list(b), length] for a, b, length in self.d2d_links],
            "relay_edges": [[list(a), list(b)] for a, b in self.relay_edges],
            "mst_weight": self.mst_weight,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IciTopology":
        return cls(
            chiplet_types=tuple(ChipletType(t) for t in d["chiplet_types"]),
            phy_counts=tuple(d["phy_counts"]),
            relay=tuple(d["relay"]),
            d2d_links=tuple((tuple(a), tuple(b), float(length)) for a, b, length in d["d2d_links"]),
            relay_edges=tuple((tuple(a), tuple(b)) for a, b in d["relay_edges"]),
            mst_weight=d.get("mst_weight"),
        )


def relay_edges_for(phy_counts: Sequence[int], relay: Sequence[bool]) -> list[tuple[Node, Node]]:
    edges = []
    for i, (n, r) in enumerate(zip(phy_counts, relay)):
        if r:
            edges.extend(((i, a), (i, b)) for a in range(n) for b in range(a + 1, n))
    return edges


def chiplets_connected(phy_counts: Sequence[int], relay: Sequence[bool], links: Iterable[tuple[Node, Node]]) -> bool:
    """True when every pair of chiplets can exchange messages.

    Messages may leave the source from any of its PHYs, but can only pass
    through relay-capable chiplets in between.
    """
    n = len(phy_counts)
    if n <= 1:
        return True
    offsets = [0] * n
    total = 0
    for i, c in enumerate(phy_counts):
        offsets[i] = total
        total += c
    parent = list(range(total))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def union(u, v):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv

    for i in range(n):
        if relay[i]:
            base = offsets[i]
            for k in range(1, phy_counts[i]):
                union(base, base + k)
    for a, b in links:
        union(offsets[a[0]] + a[1], offsets[b[0]] + b[1])
    roots = [{find(offsets[i] + k) for k in range(phy_counts[i])} for i in range(n)]
    common = set.intersection(*roots)
    if common:
        return True
    for i in range(n):
        for j in range(i + 1, n):
            if roots[i].isdisjoint(roots[j]):
                return False
    return True


@dataclass(frozen=True)
class Architecture:
    """A concrete chiplet population; instance ids index ``chiplets``."""

    chiplets: tuple[ChipletSpec, ...]
    latency: LatencyParams = field(default_factory=LatencyParams)
    max_link_length_mm: float = 3.0
    distance: DistanceType = DistanceType.EUCLIDEAN
    grid_rows: Optional[int] = None
    grid_cols: Optional[int] = None
    grid_spacing_mm: float = 0.5

    def __post_init__(self):
        if not self.chiplets:
            raise InvalidSpec("architecture has no chiplets")
        object.__setattr__(self, "chiplets", tuple(self.chiplets))
        object.__setattr__(self, "distance", DistanceType(self.distance))
        if self.max_link_length_mm <= 0:
            raise InvalidSpec("max_link_length_mm must be positive")
        if self.grid_spacing_mm < 0:
            raise InvalidSpec("grid_spacing_mm must be non-negative")

    @classmethod
    def from_counts(cls, catalog: Sequence[tuple[ChipletSpec, int]], **kwargs) -> "Architecture":
        chiplets = []
        for spec, count in catalog:
            if count < 0:
                raise InvalidSpec(f"negative count for {spec.name!r}")
            chiplets.extend([spec] * count)
        return cls(tuple(chiplets), **kwargs)

    @property
    def n(self) -> int:
        return len(self.chiplets)

    @cached_property
    def types(self) -> tuple[ChipletType, ...]:
        return tuple(s.ctype for s in self.chiplets)

    @cached_property
    def type_codes(self) -> tuple[int, ...]:
        return tuple(t.code for t in self.types)

    @cached_property
    def phy_counts(self) -> tuple[int, ...]:
        return tuple(len(s.phys) for s in self.chiplets)

    @cached_property
    def relay(self) -> tuple[bool, ...]:
        return tuple(s.relays for s in self.chiplets)

    @cached_property
    def relay_edges(self) -> tuple[tuple[Node, Node], ...]:
        return tuple(relay_edges_for(self.phy_counts, self.relay))

    def count(self, ctype: ChipletType) -> int:
        return sum(1 for t in self.types if t == ctype)

    def instances_of(self, ctype: ChipletType) -> list[int]:
        return [i for i, t in enumerate(self.types) if t == ctype]

    @cached_property
    def specs_by_type(self) -> dict[ChipletType, ChipletSpec]:
        """First spec seen for each chiplet type."""
        out: dict[ChipletType, ChipletSpec] = {}
        for s in self.chiplets:
            out.setdefault(s.ctype, s)
        return out

    def topology(self, links, mst_weight=None) -> IciTopology:
        return IciTopology(
            chiplet_types=self.types,
            phy_counts=self.phy_counts,
            relay=self.relay,
            d2d_links=tuple(links),
            relay_edges=self.relay_edges,
            mst_weight=mst_weight,
        )


@dataclass(frozen=True)
class Candidate:
    """A placement together with its inferred topology and area.

    ``placement`` is a ``GridPlacement`` or a ``Genome``; ``layout`` is the
    decoded geometry for heterogeneous placements.
    """

    placement: object
    topology: IciTopology
    area: float
    layout: object = None
