"""Best Random, a genetic algorithm and simulated annealing.

All three work against a problem object exposing ``random(rng)``,
``mutate(cand, rng)``, ``merge(a, b, rng)`` and ``evaluate(cand)``; see
``evaluate.PlacementProblem``. The budget counts cost evaluations (or wall
clock seconds, checked between evaluations).
"""

from __future__ import annotations

import enum
import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import DegeneratePopulation, NonPositiveTemperature


class Schedule(str, enum.Enum):
    EXP_MULT = "exp-mult"
    LOG_MULT = "log-mult"
    LIN_MULT = "lin-mult"
    QUAD_MULT = "quad-mult"


@dataclass(frozen=True)
class GaParams:
    population: int = 50
    elitism: int = 8
    tournament: int = 8
    mutation_prob: float = 0.5

    def __post_init__(self):
        if self.population < 2:
            raise DegeneratePopulation("population needs at least 2 individuals")
        if not 0 <= self.elitism <= self.population:
            raise ValueError("elitism must be in [0, population]")
        if not 1 <= self.tournament <= self.population:
            raise ValueError("tournament must be in [1, population]")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")


@dataclass(frozen=True)
class SaParams:
    t0: float = 40.0
    iterations: int = 250
    alpha: float = 1.0
    beta: float = 5.0
    schedule: Schedule = Schedule.LIN_MULT

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        if not self.t0 > 0:
            raise NonPositiveTemperature("initial temperature must be positive")
        if self.iterations < 1:
            raise ValueError("iterations per round must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")


@dataclass(frozen=True)
class Budget:
    max_evals: Optional[int] = None
    seconds: Optional[float] = None

    def __post_init__(self):
        if (self.max_evals is None) == (self.seconds is None):
            raise ValueError("set exactly one of max_evals and seconds")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be positive")
        if self.seconds is not None and not self.seconds > 0:
            raise ValueError("seconds must be positive")


@dataclass
class RunTrace:
    """Best-so-far cost at every evaluation that improved it, plus the last one."""

    algorithm: str
    points: list[tuple[int, float]] = field(default_factory=list)
    evaluations: int = 0
    best: object = None
    report: object = None

    @property
    def best_cost(self) -> float:
        return self.report.total


class _Tracker:
    def __init__(self, problem, budget: Budget, trace: RunTrace):
        self.problem = problem
        self.budget = budget
        self.trace = trace
        self.best_cost = math.inf
        self._deadline = None if budget.seconds is None else time.monotonic() + budget.seconds

    def exhausted(self) -> bool:
        if self.budget.max_evals is not None:
            return self.trace.evaluations >= self.budget.max_evals
        return time.monotonic() >= self._deadline

    def evaluate(self, cand) -> float:
        report = self.problem.evaluate(cand)
        t = self.trace
        t.evaluations += 1
        if report.total < self.best_cost:
            self.best_cost = report.total
            t.best = cand
            t.report = report
            t.points.append((t.evaluations, report.total))
        return report.total

    def finish(self) -> RunTrace:
        t = self.trace
        if t.points and t.points[-1][0] != t.evaluations:
            t.points.append((t.evaluations, self.best_cost))
        return t


def best_random(problem, budget: Budget, rng: random.Random) -> RunTrace:
    tr = _Tracker(problem, budget, RunTrace("br"))
    while not tr.exhausted():
        tr.evaluate(problem.random(rng))
    return tr.finish()


def tournament(costs: list[float], size: int, rng: random.Random, exclude: Optional[int] = None) -> int:
    """Index of the cheapest of ``size`` distinct random individuals.

    Ties go to the lower index. ``exclude`` removes one individual from the
    draw.
    """
    pool = [i for i in range(len(costs)) if i != exclude]
    picks = rng.sample(pool, min(size, len(pool)))
    best = picks[0]
    for i in picks[1:]:
        if costs[i] < costs[best] or (costs[i] == costs[best] and i < best):
            best = i
    return best


def select_parents(costs: list[float], size: int, rng: random.Random, redraws: int = 100) -> tuple[int, int]:
    first = tournament(costs, size, rng)
    if size < len(costs):
        for _ in range(redraws):
            second = tournament(costs, size, rng)
            if second != first:
                return first, second
    # a full-population tournament always returns the same winner
    return first, tournament(costs, size, rng, exclude=first)


def genetic_algorithm(problem, params: GaParams, budget: Budget, rng: random.Random) -> RunTrace:
    tr = _Tracker(problem, budget, RunTrace("ga"))
    pop = []
    while len(pop) < params.population and not tr.exhausted():
        cand = problem.random(rng)
        pop.append((tr.evaluate(cand), cand))
    if len(pop) < params.population or params.elitism >= params.population:
        return tr.finish()
    while not tr.exhausted():
        costs = [c for c, _ in pop]
        ranked = sorted(range(len(pop)), key=costs.__getitem__)
        nxt = [pop[i] for i in ranked[:params.elitism]]
        while len(nxt) < params.population and not tr.exhausted():
            a, b = select_parents(costs, params.tournament, rng)
            child = problem.merge(pop[a][1], pop[b][1], rng)
            if rng.random() < params.mutation_prob:
                child = problem.mutate(child, rng)
            nxt.append((tr.evaluate(child), child))
        pop = nxt
    return tr.finish()


def schedule_temperature(schedule: Schedule, t0: float, alpha: float, k: int) -> float:
    schedule = Schedule(schedule)
    if schedule is Schedule.EXP_MULT:
        t = t0 * alpha ** k
    elif schedule is Schedule.LOG_MULT:
        t = t0 / (1 + alpha * math.log(1 + k))
    elif schedule is Schedule.LIN_MULT:
        t = t0 / (1 + alpha * k)
    else:
        t = t0 / (1 + alpha * k * k)
    if not t > 0:
        raise NonPositiveTemperature(f"{schedule.value} schedule gives T={t} at round {k}")
    return t


def adaptive_factor(c_cur: float, c_best: float, beta: float) -> float:
    assert c_cur > 0, "costs are positive by construction"
    return (1 + (c_cur - c_best) / c_cur) ** beta


def acceptance_probability(delta: float, temperature: float) -> float:
    if not temperature > 0:
        raise NonPositiveTemperature(f"temperature {temperature} is not positive")
    if delta <= 0:
        return 1.0
    return math.exp(-delta / temperature)


def metropolis_accept(delta: float, temperature: float, rng: random.Random) -> bool:
    p = acceptance_probability(delta, temperature)
    if p >= 1.0:
        return True
    return rng.random() < p


def simulated_annealing(problem, params: SaParams, budget: Budget, rng: random.Random) -> RunTrace:
    tr = _Tracker(problem, budget, RunTrace("sa"))
    cur = problem.random(rng)
    c_cur = tr.evaluate(cur)
    k = 0
    temp = schedule_temperature(params.schedule, params.t0, params.alpha, k)
    while not tr.exhausted():
        for _ in range(params.iterations):
            if tr.exhausted():
                break
            nb = problem.mutate(cur, rng)
            c_nb = tr.evaluate(nb)
            t_eff = temp * adaptive_factor(c_cur, tr.best_cost, params.beta)
            if metropolis_accept(c_nb - c_cur, t_eff, rng):
                cur, c_cur = nb, c_nb
        k += 1
        temp = schedule_temperature(params.schedule, params.t0, params.alpha, k)
    return tr.finish()


ALGORITHMS = ("br", "ga", "sa")


def run_algorithm(name: str, problem, budget: Budget, rng: random.Random,
                  ga: Optional[GaParams] = None, sa: Optional[SaParams] = None) -> RunTrace:
    if name == "br":
        return best_random(problem, budget, rng)
    if name == "ga":
        return genetic_algorithm(problem, ga or GaParams(), budget, rng)
    if name == "sa":
        return simulated_annealing(problem, sa or SaParams(), budget, rng)
    raise ValueError(f"unknown algorithm {name!r}")
