import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg, stats

from qanneal.fk import FkParams, estimate_psi, path_rng, sample_path
from qanneal.problems import StateGraphProblem, gen_gnp, gen_random_3sat, as_problem

RING = StateGraphProblem.ring([0.0, 1.0, 2.0, 1.0])


def exact_psi(problem, nu, t):
    """exp(t (Q - diag V)) applied to the all-ones vector."""
    h = problem.generator(nu) - np.diag(problem.costs)
    return linalg.expm(t * h) @ np.ones(len(problem.costs))


def test_params_validate():
    with pytest.raises(ValueError):
        FkParams(nu=0)
    with pytest.raises(ValueError):
        FkParams(duration=-1)
    with pytest.raises(ValueError):
        FkParams(n_paths=0)
    assert FkParams(nu=2, duration=5).chain_length == 10


def test_vanishing_rate_gives_no_jumps():
    p = sample_path(2, RING, FkParams(nu=1e-12, duration=3.0), np.random.default_rng(0))
    assert p.n_jumps == 0 and p.end == 2
    assert p.cost_integral == pytest.approx(2.0 * 3.0, abs=1e-15)


def test_mean_jump_count_is_nu_t():
    rng = np.random.default_rng(1)
    params = FkParams(nu=2.0, duration=5.0)
    counts = np.array([sample_path(0, RING, params, rng).n_jumps for _ in range(100_000)])
    assert abs(counts.mean() - 10.0) < 4 * np.sqrt(10.0 / counts.size)


def test_jump_counts_pass_poisson_goodness_of_fit():
    rng = np.random.default_rng(2)
    params = FkParams(nu=1.0, duration=3.0)
    counts = np.array([sample_path(0, RING, params, rng).n_jumps for _ in range(100_000)])
    kmax = 9
    observed = np.bincount(np.minimum(counts, kmax), minlength=kmax + 1)
    probs = stats.poisson.pmf(np.arange(kmax), 3.0)
    probs = np.append(probs, 1 - probs.sum())
    assert stats.chisquare(observed, probs * counts.size).pvalue > 0.01


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), nu=st.floats(0.1, 5), t=st.floats(0.1, 10))
def test_path_structure(seed, nu, t):
    g = gen_gnp(8, 0.5, seed % 1000)
    prob = as_problem(g)
    rng = np.random.default_rng(seed)
    start = prob.random_configuration(rng)
    path = sample_path(start, prob, FkParams(nu, t), rng)
    assert path.holding_times.sum() == pytest.approx(t, abs=1e-12)
    assert np.all(path.holding_times >= 0)
    for a, b in zip(path.states, path.states[1:]):
        assert any(np.array_equal(b, y) for y in prob.neighbors(a))
    direct = float(np.dot(path.costs, path.holding_times))
    assert path.cost_integral == pytest.approx(direct, rel=1e-12, abs=1e-9)
    assert path.cost_integral >= 0


def test_zero_potential_estimate_is_exactly_one():
    flat = StateGraphProblem.ring([0.0] * 5)
    est = estimate_psi(0, flat, FkParams(n_paths=50), (7, 1))
    assert est.psi == 1.0 and est.std_error == 0.0


def test_constant_potential_has_zero_variance():
    flat = StateGraphProblem.ring([0.7] * 5)
    est = estimate_psi(3, flat, FkParams(duration=2.0, n_paths=30), (7, 2))
    assert est.log_psi == pytest.approx(-1.4, abs=1e-12)
    assert est.std_error == 0.0


def test_single_path_reports_infinite_error():
    est = estimate_psi(0, RING, FkParams(n_paths=1), (1, 1))
    assert np.isinf(est.log_se) and est.log_se > 0


def test_ring_estimate_within_three_standard_errors():
    exact = exact_psi(RING, 1.0, 1.0)
    params = FkParams(nu=1.0, duration=1.0, n_paths=20_000)
    for y in range(4):
        est = estimate_psi(y, RING, params, (11, y + 1))
        assert abs(est.psi - exact[y]) < 3 * est.std_error


def test_unbiased_on_irregular_graph():
    # a 6-state path graph: degrees 1 and 2 exercise the nu/deg convention
    adj = [(1,), (0, 2), (1, 3), (2, 4), (3, 5), (4,)]
    prob = StateGraphProblem([0.0, 0.5, 2.0, 0.3, 1.0, 0.0], adj)
    exact = exact_psi(prob, 1.5, 2.0)
    params = FkParams(nu=1.5, duration=2.0, n_paths=20_000)
    for y in (0, 2, 5):
        est = estimate_psi(y, prob, params, (12, y + 1))
        assert abs(est.psi - exact[y]) < 3 * est.std_error


def test_huge_costs_stay_finite_in_log_scale():
    big = StateGraphProblem.ring([5000.0, 5001.0, 5002.0])
    est = estimate_psi(0, big, FkParams(duration=1.0, n_paths=8), (3, 3))
    assert np.isfinite(est.log_psi) and est.log_psi < -4999
    assert est.psi == 0.0  # underflows outside log scale, which is the point


def test_evaluations_count_start_plus_jumps():
    f = gen_random_3sat(6, 10, 1)
    p = as_problem(f)
    c = p.random_configuration(np.random.default_rng(0))
    params = FkParams(n_paths=3, duration=4.0)
    est = estimate_psi(c, p, params, (5, 5))
    jumps = sum(sample_path(c, p, params, path_rng((5, 5), i)).n_jumps for i in range(3))
    assert est.evaluations == 1 + jumps
    assert estimate_psi(c, p, params, (5, 5), start_cost=p.cost(c)).evaluations == jumps


def test_estimates_are_reproducible_and_stream_dependent():
    params = FkParams(n_paths=10)
    a = estimate_psi(1, RING, params, (9, 4))
    assert a == estimate_psi(1, RING, params, (9, 4))
    assert a != estimate_psi(1, RING, params, (9, 5))


def test_path_streams_do_not_collide_on_trailing_zero():
    a = path_rng((3,), 0).random()
    b = np.random.default_rng(3).random()
    assert a != b
