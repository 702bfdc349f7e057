import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qanneal.problems import GraphInstance, StateGraphProblem, as_problem, brute_force_min, gen_gnp
from qanneal.sa import SaParams, metropolis_step, sa_run


def test_params_validate_and_defaults():
    with pytest.raises(ValueError):
        SaParams(t0=0)
    with pytest.raises(ValueError):
        SaParams(ratio=1.0)
    with pytest.raises(ValueError):
        SaParams(moves_per_step=0)
    p = SaParams()
    assert (p.t0, p.ratio) == (3.0, 0.99)


@settings(max_examples=30)
@given(t0=st.floats(0.01, 100), ratio=st.floats(0.01, 0.999), k=st.integers(0, 500))
def test_temperatures_strictly_decrease(t0, ratio, k):
    p = SaParams(t0=t0, ratio=ratio)
    assert p.temperature(k + 1) <= p.temperature(k)
    if p.temperature(k + 1) > 0:
        assert p.temperature(k + 1) < p.temperature(k)
    assert p.temperature(k) == pytest.approx(t0 * ratio**k)


def test_downhill_moves_always_accepted():
    prob = StateGraphProblem([5.0, 1.0], [(1,), (0,)])
    rng = np.random.default_rng(0)
    for _ in range(200):
        assert metropolis_step(0, 1e-9, prob, rng) == (1, 1.0)


def test_uphill_rejected_as_temperature_vanishes():
    prob = StateGraphProblem([0.0, 1.0], [(1,), (0,)])
    rng = np.random.default_rng(1)
    assert all(metropolis_step(0, 1e-6, prob, rng)[0] == 0 for _ in range(1000))


def test_nonpositive_temperature_rejected():
    prob = StateGraphProblem([0.0, 1.0], [(1,), (0,)])
    with pytest.raises(ValueError):
        metropolis_step(0, 0.0, prob, np.random.default_rng(0))


@pytest.mark.parametrize("delta,temp", [(1.0, 1.0), (0.5, 2.0)])
def test_two_state_occupation_matches_boltzmann(delta, temp):
    prob = StateGraphProblem([0.0, delta], [(1,), (0,)])
    rng = np.random.default_rng(2)
    c, cost, upper, n = 0, 0.0, 0, 100_000
    for _ in range(n):
        c, cost = metropolis_step(c, temp, prob, rng, cost)
        upper += c
    a = math.exp(-delta / temp)
    p1 = a / (1 + a)
    assert abs(upper / n - p1) < 3 * math.sqrt(p1 * (1 - p1) / n)


def test_schedule_underflow_degrades_to_descent():
    g = gen_gnp(10, 0.3, 2)
    params = SaParams(t0=1.0, ratio=0.01, moves_per_step=1, max_evaluations=2000)
    assert params.temperature(1000) == 0.0
    _, trace = sa_run(g, params, seed=1)
    steps = [c for c, ev in zip(trace.current_cost, trace.event) if ev == "anneal_step"]
    assert len(steps) > 1500
    # from step 200 on the temperature is exactly zero
    assert np.all(np.diff(steps[200:]) <= 0)


def test_edgeless_graph_is_solved_at_once():
    best, trace = sa_run(GraphInstance(10, []), SaParams(max_evaluations=100), seed=0)
    assert trace.final_best == 0 and trace.best_cost[0] == 0


def test_zero_budget_returns_initial_configuration():
    g = gen_gnp(12, 0.3, 1)
    init = as_problem(g).random_configuration(np.random.default_rng(5))
    best, trace = sa_run(g, SaParams(max_evaluations=0), seed=0, init=init)
    assert np.array_equal(best, init) and trace.event == ["init"]


def test_reaches_brute_force_optimum_on_small_graphs():
    hits = 0
    for seed in range(5):
        g = gen_gnp(12, 0.3, 100 + seed)
        opt = brute_force_min(as_problem(g))[0]
        _, trace = sa_run(g, SaParams(max_evaluations=200_000, target_cost=opt), seed=seed)
        hits += trace.final_best == opt
    assert hits == 5


def test_trace_is_monotone_and_runs_are_reproducible():
    g = gen_gnp(16, 0.3, 7)
    params = SaParams(max_evaluations=20_000)
    best, a = sa_run(g, params, seed=3)
    _, b = sa_run(g, params, seed=3)
    assert np.all(np.diff(a.best_cost) <= 0)
    assert a.same_path(b)
    assert a.total_evaluations == 20_000
    assert as_problem(g).cost(best) == a.final_best


def test_default_moves_per_step_is_sixteen_n():
    g = gen_gnp(10, 0.3, 7)
    _, trace = sa_run(g, SaParams(max_evaluations=1 + 16 * 10 * 3), seed=0)
    steps = [e for e, ev in zip(trace.evaluations, trace.event) if ev == "anneal_step"]
    assert steps == [1 + 160, 1 + 320, 1 + 480]
