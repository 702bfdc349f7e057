"""Quantum Stochastic Optimization.

The search moves between nearest neighbors.  At each quantum transition a
random subset of the neighborhood is scored with Feynman-Kac estimates of
the imaginary-time evolved wavefunction and one member is drawn with
probability proportional to its estimate.  Steepest descent runs every
``t_loc`` non-improving transitions, and after ``t_drill`` non-improving
descent rounds the search follows one long path and jumps to its end.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fk import FkParams, estimate_psi, path_rng, sample_path
from .problems import Problem, as_problem
from .trace import Budget, SearchTrace

__all__ = [
    "QsoParams",
    "PathStreams",
    "quantum_transition",
    "local_optimization",
    "drill_jump",
    "qso_run",
]


@dataclass(frozen=True)
class QsoParams:
    fk: FkParams = field(default_factory=lambda: FkParams(nu=1.0, duration=20.0, n_paths=4))
    neigh_size: int = 5
    t_loc: int = 10
    t_drill: int = 5
    drill_duration: float | None = None  # defaults to fk.duration
    max_evaluations: int | None = 1_000_000
    max_seconds: float | None = None
    target_cost: float | None = None

    def __post_init__(self):
        if self.neigh_size < 1:
            raise ValueError("neigh_size must be at least 1")
        if self.t_loc < 1 or self.t_drill < 1:
            raise ValueError("t_loc and t_drill must be at least 1")
        if self.max_evaluations is None and self.max_seconds is None:
            raise ValueError("set max_evaluations or max_seconds")

    @property
    def drill_params(self) -> FkParams:
        t = self.fk.duration if self.drill_duration is None else self.drill_duration
        return FkParams(nu=self.fk.nu, duration=t, n_paths=1)


_QSO_TAG = 0x9150


class PathStreams:
    """Hands out counter-based random streams, one per evaluation point."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.points = 0

    def next(self) -> tuple[int, ...]:
        key = (self.seed, _QSO_TAG, 2, self.points)
        self.points += 1
        return key


def _charge(budget, n):
    if budget is not None:
        budget.charge(n)


def quantum_transition(current, problem: Problem, params: QsoParams,
                       rng: np.random.Generator, streams: PathStreams,
                       budget: Budget | None = None):
    """Score a random subset of neighbors by their estimated wavefunction and
    draw one with probability proportional to the estimate.

    If ``budget`` runs out partway, only the neighbors scored so far compete.
    """
    deg = problem.degree(current)
    if deg == 0:
        raise ValueError("configuration has no neighbors")
    picks = rng.choice(deg, size=min(params.neigh_size, deg), replace=False)
    candidates = [problem.neighbor(current, int(k)) for k in picks]
    logs = []
    for y in candidates:
        # stop scoring once the budget runs out so callers never overshoot by a whole subset
        if logs and budget is not None and budget.exhausted():
            break
        est = estimate_psi(y, problem, params.fk, streams.next())
        _charge(budget, est.evaluations)
        logs.append(est.log_psi)
    candidates = candidates[:len(logs)]
    logs = np.asarray(logs)
    p = np.exp(logs - logs.max())
    p /= p.sum()
    return candidates[int(rng.choice(len(candidates), p=p))]


def local_optimization(c, problem: Problem, budget: Budget | None = None,
                       respect_budget: bool = True):
    """Steepest descent over the full neighborhood.

    Moves to the strictly best neighbor (lowest move index on ties) until no
    neighbor improves.  With ``respect_budget`` the descent also stops once
    the budget is spent, possibly short of a local minimum.
    """
    while True:
        if respect_budget and budget is not None and budget.exhausted():
            return c
        deltas = problem.neighbor_deltas(c)
        _charge(budget, len(deltas))
        if not len(deltas):
            return c
        k = int(np.argmin(deltas))
        if deltas[k] >= 0:
            return c
        c = problem.neighbor(c, k)


def drill_jump(c, problem: Problem, params: QsoParams, streams: PathStreams,
               budget: Budget | None = None):
    """Follow one jump-process path of length ``drill_duration`` and return its end."""
    path = sample_path(c, problem, params.drill_params, path_rng(streams.next(), 0))
    _charge(budget, path.n_jumps + 1)
    return path.end


def qso_run(instance, params: QsoParams | None = None, seed: int = 0, init=None):
    """Run the QSO main loop until the budget is spent (or ``target_cost`` is hit).

    Returns ``(best_configuration, trace)``.  In evaluation-budget mode the
    result is a deterministic function of ``seed``.
    """
    problem = as_problem(instance)
    params = params or QsoParams()
    budget = Budget(params.max_evaluations, params.max_seconds)
    rng = np.random.default_rng([int(seed), _QSO_TAG, 1])
    streams = PathStreams(seed)
    trace = SearchTrace()

    eps = problem.random_configuration(rng) if init is None else init
    problem.validate(eps)
    cur = problem.cost(eps)
    budget.charge()
    best, v_min = eps, cur
    trace.record(budget, cur, v_min, "init")

    def cost_of(x):
        budget.charge()
        return problem.cost(x)

    if budget.exhausted():
        eps = local_optimization(eps, problem, budget, respect_budget=False)
        cur = cost_of(eps)
        if cur < v_min:
            best, v_min = eps, cur
        trace.record(budget, cur, v_min, "local_opt")
        return best, trace

    def done():
        if params.target_cost is not None and v_min <= params.target_cost:
            return True
        return budget.exhausted()

    while not done():
        j = 0
        while True:
            i = 0
            while True:
                eps = quantum_transition(eps, problem, params, rng, streams, budget)
                cur = cost_of(eps)
                if cur < v_min:
                    best, v_min = eps, cur
                    i = j = 0
                else:
                    i += 1
                trace.record(budget, cur, v_min, "transition")
                if i > params.t_loc or done():
                    break
            if done():
                break
            eps = local_optimization(eps, problem, budget)
            cur = cost_of(eps)
            if cur < v_min:
                best, v_min = eps, cur
                j = 0
            else:
                j += 1
            trace.record(budget, cur, v_min, "local_opt")
            if j > params.t_drill or done():
                break
        if done():
            break
        eps = drill_jump(eps, problem, params, streams, budget)
        eps = local_optimization(eps, problem, budget)
        cur = cost_of(eps)
        if cur < v_min:
            best, v_min = eps, cur
        trace.record(budget, cur, v_min, "drill")
    return best, trace
