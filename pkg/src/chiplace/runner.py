"""Experiment runner: normalizers, baseline, repeated runs and their outputs."""

from __future__ import annotations

import copy
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import config as cfgmod
from .baseline import build_baseline
from .errors import ChiplaceError
from .evaluate import CostReport, Evaluator, Normalizers, PlacementProblem, estimate_normalizers
from .heterogeneous import Genome, HeterogeneousRepresentation, Layout
from .homogeneous import GridPlacement, HomogeneousRepresentation
from .model import Candidate, IciTopology
from .optimize import run_algorithm
from .render import render_svg, write_atomic

log = logging.getLogger(__name__)


def make_representation(exp: cfgmod.Experiment):
    if exp.representation == "homogeneous":
        return HomogeneousRepresentation(exp.arch, exp.mode)
    return HeterogeneousRepresentation(exp.arch, exp.mode)


def placed_chiplets(rep, cand: Candidate):
    if cand.layout is not None:
        return list(cand.layout.placed)
    return rep.placed_chiplets(cand.placement)


def _placement_to_dict(p):
    return None if p is None else p.to_dict()


def _placement_from_dict(d):
    if d is None:
        return None
    return GridPlacement.from_dict(d) if d["kind"] == "grid" else Genome.from_dict(d)


@dataclass
class Solution:
    """A scored candidate as stored in the results."""

    placement: object
    layout: Optional[Layout]
    topology: IciTopology
    report: CostReport

    @classmethod
    def of(cls, cand: Candidate, report: CostReport) -> "Solution":
        return cls(cand.placement, cand.layout, cand.topology, report)

    def candidate(self) -> Candidate:
        return Candidate(self.placement, self.topology, self.report.area, self.layout)

    def to_dict(self) -> dict:
        return {
            "placement": _placement_to_dict(self.placement),
            "layout": None if self.layout is None else self.layout.to_dict(),
            "topology": self.topology.to_dict(),
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict, arch) -> "Solution":
        layout = None if d["layout"] is None else Layout.from_dict(d["layout"], arch)
        return cls(_placement_from_dict(d["placement"]), layout, IciTopology.from_dict(d["topology"]),
                   CostReport.from_dict(d["report"]))


@dataclass
class RunRecord:
    algorithm: str
    repetition: int
    evaluations: int = 0
    points: list = field(default_factory=list)
    solution: Optional[Solution] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "repetition": self.repetition,
            "evaluations": self.evaluations,
            "trace": [[e, c] for e, c in self.points],
            "solution": None if self.solution is None else self.solution.to_dict(),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict, arch) -> "RunRecord":
        sol = None if d["solution"] is None else Solution.from_dict(d["solution"], arch)
        return cls(d["algorithm"], d["repetition"], d["evaluations"], [tuple(p) for p in d["trace"]], sol, d["error"])


@dataclass
class ResultBundle:
    config: dict
    normalizers: Normalizers
    baseline: Optional[Solution]
    baseline_error: Optional[str]
    runs: list[RunRecord]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "normalizers": self.normalizers.to_dict(),
            "baseline": None if self.baseline is None else self.baseline.to_dict(),
            "baseline_error": self.baseline_error,
            "runs": [r.to_dict() for r in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ResultBundle":
        arch = cfgmod.build(cfgmod.validate(d["config"])).arch
        return cls(
            d["config"],
            Normalizers.from_dict(d["normalizers"]),
            None if d["baseline"] is None else Solution.from_dict(d["baseline"], arch),
            d["baseline_error"],
            [RunRecord.from_dict(r, arch) for r in d["runs"]],
        )

    @classmethod
    def load(cls, path) -> "ResultBundle":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def best(self, algorithm: str) -> Optional[RunRecord]:
        ok = [r for r in self.runs if r.algorithm == algorithm and r.solution is not None]
        return min(ok, key=lambda r: (r.solution.report.total, r.repetition), default=None)


def effective_config(cfg: dict, seed=None, algorithms=None, eval_budget=None) -> dict:
    """Config with CLI overrides folded in, so the stored config alone reproduces the run."""
    out = copy.deepcopy(cfg)
    g = out["general"]
    if seed is not None:
        g["seed"] = seed
    if algorithms is not None:
        g["algorithms"] = list(algorithms)
    if eval_budget is not None:
        g["eval_budget"] = eval_budget
    g.pop("jobs", None)
    return out


def run_rng(seed: int, algorithm: str, repetition: int) -> random.Random:
    return random.Random(f"{seed}-{algorithm}-{repetition}")


def _setup(cfg: dict):
    exp = cfgmod.build(cfg)
    rep = make_representation(exp)
    return exp, rep


def normalizers_for(exp: cfgmod.Experiment, rep) -> Normalizers:
    return estimate_normalizers(rep, exp.arch.latency, exp.norm_samples, random.Random(f"{exp.seed}-norm"))


def _one_run(cfg: dict, norm: dict, algorithm: str, repetition: int) -> RunRecord:
    exp, rep = _setup(cfg)
    evaluator = Evaluator(exp.arch.latency, exp.weights, Normalizers.from_dict(norm))
    problem = PlacementProblem(rep, evaluator)
    rec = RunRecord(algorithm, repetition)
    try:
        trace = run_algorithm(algorithm, problem, exp.budget, run_rng(exp.seed, algorithm, repetition), exp.ga, exp.sa)
    except ChiplaceError as e:
        rec.error = f"{type(e).__name__}: {e}"
        return rec
    rec.evaluations = trace.evaluations
    rec.points = list(trace.points)
    rec.solution = Solution.of(trace.best, trace.report)
    return rec


def run_experiment(cfg: dict, jobs: int = 1) -> ResultBundle:
    """Run every (algorithm, repetition) of a validated, effective config."""
    exp, rep = _setup(cfg)
    norm = normalizers_for(exp, rep)
    evaluator = Evaluator(exp.arch.latency, exp.weights, norm)
    baseline = None
    baseline_error = None
    try:
        b = build_baseline(exp.arch, rep)
        baseline = Solution.of(b, evaluator.report(b))
    except ChiplaceError as e:
        baseline_error = f"{type(e).__name__}: {e}"
    tasks = [(a, r) for a in exp.algorithms for r in range(exp.repetitions)]
    nd = norm.to_dict()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_one_run, cfg, nd, a, r) for a, r in tasks]
            runs = [f.result() for f in futures]
    else:
        runs = [_one_run(cfg, nd, a, r) for a, r in tasks]
    return ResultBundle(cfg, norm, baseline, baseline_error, runs)


def write_trace_csv(path, points) -> None:
    lines = ["eval,best_cost"] + [f"{e},{c!r}" for e, c in points]
    write_atomic(path, "\n".join(lines) + "\n")


def write_svgs(bundle: ResultBundle, out: Path) -> None:
    exp, rep = _setup(bundle.config)
    scale = bundle.config["output"]["svg_scale"]
    if bundle.baseline is not None:
        cand = bundle.baseline.candidate()
        render_svg(placed_chiplets(rep, cand), cand.topology, out / "baseline.svg", scale, "baseline")
    for r in bundle.runs:
        if r.solution is None:
            continue
        cand = r.solution.candidate()
        render_svg(placed_chiplets(rep, cand), cand.topology, out / f"placement_{r.algorithm}_{r.repetition}.svg",
                   scale, f"{r.algorithm} repetition {r.repetition}")


def write_outputs(bundle: ResultBundle, out) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for r in bundle.runs:
        write_trace_csv(out / f"trace_{r.algorithm}_{r.repetition}.csv", r.points)
    if bundle.config["output"]["svg"]:
        write_svgs(bundle, out)
    write_atomic(out / "results.json", bundle.to_json())
