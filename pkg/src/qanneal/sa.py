"""Simulated annealing with a geometric temperature schedule."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import Problem, as_problem
from .trace import Budget, SearchTrace

__all__ = ["SaParams", "metropolis_step", "sa_run"]


@dataclass(frozen=True)
class SaParams:
    t0: float = 3.0
    ratio: float = 0.99
    moves_per_step: int | None = None  # None -> 16 * problem size
    max_evaluations: int | None = 1_000_000
    max_seconds: float | None = None
    target_cost: float | None = None

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.moves_per_step is not None and self.moves_per_step < 1:
            raise ValueError("moves_per_step must be at least 1")
        if self.max_evaluations is None and self.max_seconds is None:
            raise ValueError("set max_evaluations or max_seconds")

    def temperature(self, k: int) -> float:
        return self.t0 * self.ratio**k


def _accept(delta: float, temperature: float, u: float) -> bool:
    if delta <= 0:
        return True
    if temperature <= 0.0:  # the schedule can underflow on very long runs
        return False
    return u < math.exp(-delta / temperature)


def metropolis_step(c, temperature: float, problem: Problem, rng: np.random.Generator,
                    cost: float | None = None):
    """Propose a uniform neighbor and accept it with the Metropolis rule.

    Returns ``(configuration, cost)`` after the step.
    """
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    if cost is None:
        cost = problem.cost(c)
    deg = problem.degree(c)
    y = problem.neighbor(c, int(rng.integers(deg)))
    cy = problem.cost(y)
    if _accept(cy - cost, temperature, rng.random()):
        return y, cy
    return c, cost


def _size(problem: Problem) -> int:
    n = getattr(problem, "n", None)
    return n if n is not None else len(problem.costs)


def sa_run(instance, params: SaParams | None = None, seed: int = 0, init=None):
    """Anneal at ``t_k = t0 * ratio**k`` with ``moves_per_step`` proposals per
    temperature.  Returns ``(best_configuration, trace)``."""
    problem = as_problem(instance)
    params = params or SaParams()
    moves = params.moves_per_step or 16 * _size(problem)
    budget = Budget(params.max_evaluations, params.max_seconds)
    rng = np.random.default_rng([int(seed), 0x5A, 1])
    trace = SearchTrace()

    c = problem.random_configuration(rng) if init is None else init
    problem.validate(c)
    cur = problem.cost(c)
    budget.charge()
    best, v_min = c, cur
    trace.record(budget, cur, v_min, "init")

    def done():
        if params.target_cost is not None and v_min <= params.target_cost:
            return True
        return budget.exhausted()

    k = 0
    while not done():
        temp = params.temperature(k)
        picks = rng.random(moves)
        us = rng.random(moves)
        for m in range(moves):
            deg = problem.degree(c)
            y = problem.neighbor(c, min(int(picks[m] * deg), deg - 1))
            cy = problem.cost(y)
            budget.charge()
            if _accept(cy - cur, temp, us[m]):
                c, cur = y, cy
                if cur < v_min:
                    best, v_min = c, cur
                    trace.record(budget, cur, v_min, "improve")
            if done():
                break
        trace.record(budget, cur, v_min, "anneal_step")
        k += 1
    return best, trace
