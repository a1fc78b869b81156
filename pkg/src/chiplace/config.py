"""Experiment configuration: JSON schema, semantic checks and defaults."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import ConfigError, InvalidSpec
from .evaluate import CostWeights
from .homogeneous import MutationMode
from .model import Architecture, ChipletSpec, ChipletType, DistanceType, LatencyParams, Phy
from .optimize import ALGORITHMS, Budget, GaParams, SaParams, Schedule

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}
_NONNEG_INT = {"type": "integer", "minimum": 0}
_PER_CLASS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["c2c", "c2m", "c2i", "m2i"],
    "properties": {k: _NONNEG for k in ("c2c", "c2m", "c2i", "m2i")},
}


def _obj(props, required=()):
    return {"type": "object", "additionalProperties": False, "required": list(required), "properties": props}


SCHEMA = _obj({
    "general": _obj({
        "representation": {"enum": ["homogeneous", "heterogeneous"]},
        "algorithms": {"type": "array", "minItems": 1, "uniqueItems": True, "items": {"enum": list(ALGORITHMS)}},
        "time_budget_s": _POS,
        "eval_budget": _POS_INT,
        "repetitions": _POS_INT,
        "norm_samples": _POS_INT,
        "mutation_mode": {"enum": [m.value for m in MutationMode] + ["neighbors-one", "neighbors-both"]},
        "seed": _NONNEG_INT,
        "jobs": _POS_INT,
    }, required=["representation"]),
    "architecture": _obj({
        "chiplets": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": _obj({
                "type": {"enum": [t.value for t in ChipletType]},
                "count": _NONNEG_INT,
                "width": _POS,
                "height": _POS,
                "phys": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NONNEG},
                },
            }, required=["type", "count", "width", "height", "phys"]),
        },
        "relay_chiplets": {"type": "array", "uniqueItems": True, "items": {"type": "string"}},
        "max_link_length_mm": _POS,
        "distance_type": {"enum": [d.value for d in DistanceType]},
        "l_relay": _NONNEG_INT,
        "l_phy": _NONNEG_INT,
        "l_link": _NONNEG_INT,
        "grid_rows": _POS_INT,
        "grid_cols": _POS_INT,
        "grid_spacing_mm": _NONNEG,
    }, required=["chiplets"]),
    "weights": _obj({"latency": _PER_CLASS, "throughput": _PER_CLASS, "area": _NONNEG}),
    "ga": _obj({
        "population": {"type": "integer", "minimum": 2},
        "elitism": _NONNEG_INT,
        "tournament": _POS_INT,
        "mutation_prob": {"type": "number", "minimum": 0, "maximum": 1},
    }),
    "sa": _obj({
        "t0": _POS,
        "iterations": _POS_INT,
        "alpha": _NONNEG,
        "beta": _NONNEG,
        "schedule": {"enum": [s.value for s in Schedule]},
    }),
    "output": _obj({"svg_scale": _POS, "svg": {"type": "boolean"}}),
}, required=["general", "architecture"])

_RUNNING = {"c2c": 0.1, "c2m": 2.0, "c2i": 0.1, "m2i": 2.0}
DEFAULTS = {
    "general": {
        "algorithms": ["br", "ga", "sa"],
        "time_budget_s": 3600,
        "repetitions": 10,
        "norm_samples": 500,
        "mutation_mode": "neighbor-one",
        "seed": 0,
        "jobs": 1,
    },
    "architecture": {
        "relay_chiplets": [],
        "max_link_length_mm": 3.0,
        "distance_type": "euclidean",
        "l_relay": 10,
        "l_phy": 12,
        "l_link": 1,
        "grid_spacing_mm": 0.5,
    },
    "weights": {"latency": _RUNNING, "throughput": _RUNNING, "area": 2.0},
    "ga": {"population": 50, "elitism": 8, "tournament": 8, "mutation_prob": 0.5},
    "sa": {"t0": 40.0, "iterations": 250, "alpha": 1.0, "beta": 5.0, "schedule": "lin-mult"},
    "output": {"svg_scale": 20.0, "svg": True},
}


BUNDLED_DIR = Path(__file__).parent / "configs"


def bundled(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``bundled("homogeneous_32core")``."""
    path = BUNDLED_DIR / (name if name.endswith(".json") else name + ".json")
    if not path.is_file():
        raise FileNotFoundError(f"no bundled config {name!r}")
    return path


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _merge_defaults(raw: dict) -> dict:
    out = copy.deepcopy(DEFAULTS)
    for section, values in raw.items():
        if isinstance(values, dict) and isinstance(out.get(section), dict):
            out[section].update(copy.deepcopy(values))
        else:
            out[section] = copy.deepcopy(values)
    return out


def _semantic_errors(cfg: dict) -> list[tuple[str, str]]:
    errs = []
    arch = cfg["architecture"]
    names = arch["chiplets"]
    for i, name in enumerate(arch["relay_chiplets"]):
        if name not in names:
            errs.append((f"/architecture/relay_chiplets/{i}", f"unknown chiplet {name!r}"))
    if sum(c["count"] for c in names.values()) == 0:
        errs.append(("/architecture/chiplets", "architecture has no chiplets"))
    for name, c in names.items():
        base = "/architecture/chiplets" + _pointer([name])
        try:
            _spec(name, c, name in arch["relay_chiplets"])
        except InvalidSpec as e:
            errs.append((base + "/phys", str(e)))
    ga = cfg["ga"]
    if ga["elitism"] > ga["population"]:
        errs.append(("/ga/elitism", "elitism must not exceed population"))
    if ga["tournament"] > ga["population"]:
        errs.append(("/ga/tournament", "tournament must not exceed population"))
    w = cfg["weights"]
    if not (any(w["latency"].values()) or any(w["throughput"].values()) or w["area"]):
        errs.append(("/weights", "at least one weight must be positive"))
    rows, cols = arch.get("grid_rows"), arch.get("grid_cols")
    if rows and cols and rows * cols < sum(c["count"] for c in names.values()):
        errs.append(("/architecture/grid_rows", f"a {rows}x{cols} grid cannot hold every chiplet"))
    if arch.get("grid_spacing_mm", 0) > arch["max_link_length_mm"]:
        errs.append(("/architecture/grid_spacing_mm", "grid spacing exceeds the maximum link length"))
    return errs


def validate(raw: dict) -> dict:
    """Schema-check ``raw`` and return it with defaults filled in; raises ``ConfigError``."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errs = sorted(
        ((_pointer(e.absolute_path), e.message) for e in validator.iter_errors(raw)),
        key=lambda pe: pe[0],
    )
    if errs:
        raise ConfigError(errs)
    cfg = _merge_defaults(raw)
    errs = _semantic_errors(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError([("", f"cannot read {path}: {e.strerror}")]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([("", f"{path}: invalid JSON at line {e.lineno}: {e.msg}")]) from None
    return validate(raw)


def _spec(name: str, c: dict, relay: bool) -> ChipletSpec:
    phys = tuple(Phy(float(x), float(y)) for x, y in c["phys"])
    return ChipletSpec(name, ChipletType(c["type"]), float(c["width"]), float(c["height"]), phys, relay)


@dataclass(frozen=True)
class Experiment:
    """A validated config turned into domain objects."""

    config: dict
    arch: Architecture
    representation: str
    mode: MutationMode
    weights: CostWeights
    ga: GaParams
    sa: SaParams
    budget: Budget
    algorithms: tuple[str, ...]
    repetitions: int
    norm_samples: int
    seed: int
    jobs: int


def build(cfg: dict, seed: Optional[int] = None, algorithms=None, eval_budget: Optional[int] = None,
          jobs: Optional[int] = None) -> Experiment:
    g = cfg["general"]
    a = cfg["architecture"]
    relay = set(a["relay_chiplets"])
    # instance ids must not depend on JSON key order (results are written with sorted keys)
    type_rank = {t.value: k for k, t in enumerate(ChipletType)}
    entries = sorted(a["chiplets"].items(), key=lambda kv: (type_rank[kv[1]["type"]], kv[0]))
    catalog = [(_spec(name, c, name in relay), c["count"]) for name, c in entries]
    lat = LatencyParams(l_phy=a["l_phy"], l_link=a["l_link"], l_relay=a["l_relay"])
    try:
        arch = Architecture.from_counts(
            catalog,
            latency=lat,
            max_link_length_mm=float(a["max_link_length_mm"]),
            distance=DistanceType(a["distance_type"]),
            grid_rows=a.get("grid_rows"),
            grid_cols=a.get("grid_cols"),
            grid_spacing_mm=float(a["grid_spacing_mm"]),
        )
    except InvalidSpec as e:
        raise ConfigError([("/architecture", str(e))]) from None
    if algorithms is not None:
        unknown = [x for x in algorithms if x not in ALGORITHMS]
        if unknown:
            raise ConfigError([("/general/algorithms", f"unknown algorithm {unknown[0]!r}")])
    algs = tuple(algorithms) if algorithms is not None else tuple(g["algorithms"])
    evals = eval_budget if eval_budget is not None else g.get("eval_budget")
    budget = Budget(max_evals=evals) if evals is not None else Budget(seconds=float(g["time_budget_s"]))
    w = cfg["weights"]
    return Experiment(
        config=cfg,
        arch=arch,
        representation=g["representation"],
        mode=MutationMode.parse(g["mutation_mode"]),
        weights=CostWeights(w["latency"], w["throughput"], w["area"]),
        ga=GaParams(**cfg["ga"]),
        sa=SaParams(**cfg["sa"]),
        budget=budget,
        algorithms=algs,
        repetitions=g["repetitions"],
        norm_samples=g["norm_samples"],
        seed=g["seed"] if seed is None else seed,
        jobs=(jobs if jobs is not None else g.get("jobs", 1)),
    )
