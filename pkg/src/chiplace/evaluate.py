"""Latency/throughput proxies, normalizers and the weighted cost function.

Latency proxy: mean over the ordered chiplet pairs of a traffic class of the
min-latency path, where each D2D hop costs ``2*l_phy + l_link`` and every
intermediate (relaying) chiplet adds ``l_relay``.

Throughput proxy: one unit flow per ordered pair, routed on the same
deterministic paths; the result is ``1 / max_link_load`` clipped to 1, i.e.
the per-flow saturation rate as a fraction of one link's capacity.
"""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from . import kernels
from .errors import UnreachablePair
from .model import Candidate, ChipletType, IciTopology, LatencyParams

log = logging.getLogger(__name__)


class TrafficClass(str, enum.Enum):
    C2C = "c2c"
    C2M = "c2m"
    C2I = "c2i"
    M2I = "m2i"

    @property
    def index(self) -> int:
        return _CLASS_INDEX[self]

    @property
    def endpoints(self) -> tuple[ChipletType, ChipletType]:
        return _ENDPOINTS[self]


CLASSES = (TrafficClass.C2C, TrafficClass.C2M, TrafficClass.C2I, TrafficClass.M2I)
_CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}
_ENDPOINTS = {
    TrafficClass.C2C: (ChipletType.COMPUTE, ChipletType.COMPUTE),
    TrafficClass.C2M: (ChipletType.COMPUTE, ChipletType.MEMORY),
    TrafficClass.C2I: (ChipletType.COMPUTE, ChipletType.IO),
    TrafficClass.M2I: (ChipletType.MEMORY, ChipletType.IO),
}

COMPONENT_NAMES = tuple(
    [f"latency_{c.value}" for c in CLASSES] + [f"throughput_{c.value}" for c in CLASSES] + ["area"]
)


def _four(values, name) -> tuple[float, ...]:
    if isinstance(values, dict):
        values = [values[c.value] if c.value in values else values[c] for c in CLASSES]
    values = tuple(float(v) for v in values)
    if len(values) != 4:
        raise ValueError(f"{name} needs one value per traffic class")
    return values


@dataclass(frozen=True)
class CostWeights:
    latency: tuple[float, float, float, float]
    throughput: tuple[float, float, float, float]
    area: float

    def __post_init__(self):
        object.__setattr__(self, "latency", _four(self.latency, "latency"))
        object.__setattr__(self, "throughput", _four(self.throughput, "throughput"))
        object.__setattr__(self, "area", float(self.area))
        allw = self.as_vector()
        if any(w < 0 for w in allw):
            raise ValueError("cost weights must be non-negative")
        if not any(w > 0 for w in allw):
            raise ValueError("at least one cost weight must be positive")

    @classmethod
    def running_example(cls) -> "CostWeights":
        """Cache-coherence weighting: C2M, M2I and area 2; C2C and C2I 0.1."""
        w = (0.1, 2.0, 0.1, 2.0)
        return cls(w, w, 2.0)

    def as_vector(self) -> tuple[float, ...]:
        return self.latency + self.throughput + (self.area,)

    def to_dict(self) -> dict:
        return {
            "latency": {c.value: v for c, v in zip(CLASSES, self.latency)},
            "throughput": {c.value: v for c, v in zip(CLASSES, self.throughput)},
            "area": self.area,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CostWeights":
        return cls(d["latency"], d["throughput"], d["area"])


@dataclass(frozen=True)
class Proxies:
    latency: tuple[float, ...]
    throughput: tuple[float, ...]
    pairs: tuple[int, ...]


def proxies(topo: IciTopology, lat: LatencyParams) -> Proxies:
    """Latency and throughput proxies of all four traffic classes in one routing pass."""
    la = [a[0] for a, _, _ in topo.d2d_links]
    lb = [b[0] for _, b, _ in topo.d2d_links]
    codes = [t.code for t in topo.chiplet_types]
    hop_sum, pairs, max_load, unreachable = kernels.route(topo.n_chiplets, la, lb, topo.relay, codes)
    for c, k in zip(CLASSES, unreachable):
        if k:
            raise UnreachablePair(f"{k} {c.value.upper()} pairs have no route")
    hop, lr = lat.hop, lat.l_relay
    latency = []
    throughput = []
    for h, p, m in zip(hop_sum, pairs, max_load):
        if p == 0:
            latency.append(0.0)
            throughput.append(1.0)
            continue
        latency.append((hop * h + lr * (h - p)) / p)
        throughput.append(min(1.0, 1.0 / m))
    return Proxies(tuple(latency), tuple(throughput), tuple(pairs))


def latency_proxy(topo: IciTopology, cls: TrafficClass, lat: LatencyParams) -> float:
    return proxies(topo, lat).latency[TrafficClass(cls).index]


def throughput_proxy(topo: IciTopology, cls: TrafficClass) -> float:
    return proxies(topo, LatencyParams()).throughput[TrafficClass(cls).index]


@dataclass(frozen=True)
class Normalizers:
    """Means of raw latency, inverse throughput and area over random samples."""

    latency: tuple[float, float, float, float]
    inv_throughput: tuple[float, float, float, float]
    area: float
    samples: int = 1

    def __post_init__(self):
        vec = self.as_vector()
        if any(not v > 0 for v in vec):
            raise ValueError("normalizers must be positive")
        if self.samples < 1:
            raise ValueError("normalizers need at least one sample")

    def as_vector(self) -> tuple[float, ...]:
        return tuple(self.latency) + tuple(self.inv_throughput) + (self.area,)

    def scaled(self, factor: float) -> "Normalizers":
        return Normalizers(
            tuple(v * factor for v in self.latency),
            tuple(v * factor for v in self.inv_throughput),
            self.area * factor,
            self.samples,
        )

    def to_dict(self) -> dict:
        return {
            "latency": list(self.latency),
            "inv_throughput": list(self.inv_throughput),
            "area": self.area,
            "samples": self.samples,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizers":
        return cls(tuple(d["latency"]), tuple(d["inv_throughput"]), d["area"], d["samples"])


@dataclass(frozen=True)
class CostReport:
    latency: tuple[float, ...]
    throughput: tuple[float, ...]
    area: float
    normalized: tuple[float, ...]
    total: float

    def component(self, name: str) -> float:
        return self.normalized[COMPONENT_NAMES.index(name)]

    def to_dict(self) -> dict:
        return {
            "latency": {c.value: v for c, v in zip(CLASSES, self.latency)},
            "throughput": {c.value: v for c, v in zip(CLASSES, self.throughput)},
            "area": self.area,
            "normalized": dict(zip(COMPONENT_NAMES, self.normalized)),
            "total": self.total,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CostReport":
        return cls(
            latency=tuple(d["latency"][c.value] for c in CLASSES),
            throughput=tuple(d["throughput"][c.value] for c in CLASSES),
            area=d["area"],
            normalized=tuple(d["normalized"][n] for n in COMPONENT_NAMES),
            total=d["total"],
        )


_warned: set = set()


def _warn_empty(c: TrafficClass) -> None:
    if c not in _warned:
        _warned.add(c)
        log.warning("traffic class %s has no chiplet pairs; its cost terms are 0", c.value.upper())


def cost(px: Proxies, area: float, weights: CostWeights, norm: Normalizers) -> CostReport:
    """Weighted sum of normalized components; throughput terms enter inverted."""
    normalized = []
    for i, c in enumerate(CLASSES):
        if px.pairs[i] == 0:
            _warn_empty(c)
            normalized.append(0.0)
        else:
            normalized.append(px.latency[i] / norm.latency[i])
    for i, c in enumerate(CLASSES):
        if px.pairs[i] == 0:
            normalized.append(0.0)
        else:
            normalized.append((1.0 / px.throughput[i]) / norm.inv_throughput[i])
    normalized.append(area / norm.area)
    total = 0.0
    for w, v in zip(weights.as_vector(), normalized):
        total += w * v
    return CostReport(px.latency, px.throughput, area, tuple(normalized), total)


def estimate_normalizers(representation, lat: LatencyParams, samples: int, rng: random.Random) -> Normalizers:
    """Mean raw components over ``samples`` random valid placements.

    Classes without pairs get a normalizer of 1 (their terms are always 0).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lat_sum = [0.0] * 4
    inv_sum = [0.0] * 4
    area_sum = 0.0
    pairs: Optional[Sequence[int]] = None
    for _ in range(samples):
        cand = representation.random_candidate(rng)
        px = proxies(cand.topology, lat)
        pairs = px.pairs
        for i in range(4):
            lat_sum[i] += px.latency[i]
            inv_sum[i] += 1.0 / px.throughput[i]
        area_sum += cand.area

    def mean(total, i):
        if pairs[i] == 0:
            return 1.0
        return total / samples

    return Normalizers(
        tuple(mean(lat_sum[i], i) for i in range(4)),
        tuple(mean(inv_sum[i], i) for i in range(4)),
        area_sum / samples,
        samples,
    )


class Evaluator:
    """Scores candidates with fixed weights and normalizers."""

    def __init__(self, lat: LatencyParams, weights: CostWeights, normalizers: Normalizers):
        self.lat = lat
        self.weights = weights
        self.normalizers = normalizers

    def report(self, cand: Candidate) -> CostReport:
        return cost(proxies(cand.topology, self.lat), cand.area, self.weights, self.normalizers)


class PlacementProblem:
    """What an optimizer sees: random/mutate/merge over candidates, plus cost."""

    def __init__(self, representation, evaluator: Evaluator):
        self.representation = representation
        self.evaluator = evaluator

    def random(self, rng: random.Random) -> Candidate:
        return self.representation.random_candidate(rng)

    def mutate(self, cand: Candidate, rng: random.Random) -> Candidate:
        return self.representation.mutate_candidate(cand.placement, rng)

    def merge(self, a: Candidate, b: Candidate, rng: random.Random) -> Candidate:
        return self.representation.merge_candidate(a.placement, b.placement, rng)

    def evaluate(self, cand: Candidate) -> CostReport:
        return self.evaluator.report(cand)
