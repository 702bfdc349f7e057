"""Feynman-Kac estimation of the imaginary-time evolved wavefunction.

For a jump process that leaves every configuration at rate ``nu`` towards a
uniformly chosen neighbor,

    (exp(-t H) psi0)(y) = E[ exp(-int_0^t V(eps(s)) ds) psi0(eps(t)) | eps(0) = y ]

with ``H = -Q + V``, ``Q`` the generator of the jump process.  We take
``psi0 = 1`` and estimate the expectation by sampling paths.

Every path draws from its own generator seeded by ``(*stream, path_index)``,
so estimates do not depend on evaluation order or worker count.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .problems import Problem

__all__ = ["FkParams", "PathSample", "FkEstimate", "sample_path", "estimate_psi", "path_rng"]


@dataclass(frozen=True)
class FkParams:
    nu: float = 1.0
    duration: float = 20.0
    n_paths: int = 4

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be at least 1, got {self.n_paths}")

    @property
    def chain_length(self) -> float:
        """Expected number of jumps per path."""
        return self.nu * self.duration


@dataclass
class PathSample:
    states: list
    holding_times: np.ndarray
    costs: np.ndarray
    cost_integral: float

    @property
    def n_jumps(self) -> int:
        return len(self.states) - 1

    @property
    def end(self):
        return self.states[-1]


@dataclass(frozen=True)
class FkEstimate:
    """Sample mean of ``exp(-cost_integral)`` kept in log scale."""

    log_psi: float
    log_se: float  # log of the standard error of the mean; -inf when it is zero
    n_paths: int
    evaluations: int

    @property
    def psi(self) -> float:
        return float(np.exp(self.log_psi))

    @property
    def std_error(self) -> float:
        return float(np.exp(self.log_se))


def path_rng(stream: Sequence[int], index: int) -> np.random.Generator:
    # SeedSequence ignores trailing zeros, so keys must end in a nonzero word
    return np.random.default_rng([*map(int, stream), int(index) + 1])


def sample_path(start, problem: Problem, params: FkParams, rng: np.random.Generator,
                start_cost: float | None = None) -> PathSample:
    """Draw one trajectory of the nearest-neighbor jump process on ``(0, duration]``.

    The jump count is Poisson(nu * duration) and, given the count, jump times
    are uniform order statistics; this is the same law as exponential(nu)
    holding times truncated at ``duration``.
    """
    t = params.duration
    n_jumps = rng.poisson(params.nu * t)
    times = np.sort(rng.uniform(0.0, t, n_jumps))
    picks = rng.random(n_jumps)
    holding = np.diff(np.concatenate(([0.0], times, [t])))

    state = start
    cost = problem.cost(start) if start_cost is None else start_cost
    states, costs = [state], [cost]
    for u in picks:
        deg = problem.degree(state)
        if deg == 0:
            raise ValueError("configuration has no neighbors")
        state = problem.neighbor(state, min(int(u * deg), deg - 1))
        states.append(state)
        costs.append(problem.cost(state))
    costs = np.asarray(costs, dtype=float)
    # V0 * t + sum_j (V_j - V_{j-1}) * (t - tau_j): exact when V is constant
    integral = costs[0] * t + float(np.dot(np.diff(costs), t - times))
    return PathSample(states, holding, costs, integral)


def estimate_psi(y, problem: Problem, params: FkParams, stream: Sequence[int],
                 start_cost: float | None = None) -> FkEstimate:
    """Estimate ``(exp(-t H) 1)(y)`` from ``params.n_paths`` independent paths.

    ``evaluations`` in the result counts cost-function calls (one for ``y``
    unless ``start_cost`` is supplied, plus one per jump).
    """
    n = params.n_paths
    if n < 1:
        raise ValueError("n_paths must be at least 1")
    evaluations = 0
    if start_cost is None:
        start_cost = problem.cost(y)
        evaluations += 1
    log_w = np.empty(n)
    for i in range(n):
        path = sample_path(y, problem, params, path_rng(stream, i), start_cost)
        evaluations += path.n_jumps
        log_w[i] = -path.cost_integral

    shift = log_w.max()
    w = np.exp(log_w - shift)
    log_mean = shift + np.log(w.mean())
    if n > 1:
        var = np.sum((w - w.mean()) ** 2) / (n - 1)
        with np.errstate(divide="ignore"):
            log_se = shift + 0.5 * np.log(var / n)
    else:
        log_se = np.inf
    return FkEstimate(float(log_mean), float(log_se), n, evaluations)
