import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qanneal.problems import (
    CnfFormula,
    GraphInstance,
    PartitionProblem,
    SatProblem,
    StateGraphProblem,
    as_problem,
    brute_force_min,
    gen_gnp,
    gen_random_3sat,
    gp_cost,
    neighbors,
    parse_dimacs,
    parse_edgelist,
    read_dimacs,
    read_edgelist,
    sat_cost,
    write_dimacs,
    write_edgelist,
)


def clause_by_clause(clauses, assignment):
    """Reference evaluator written independently of the library."""
    bad = 0
    for clause in clauses:
        ok = False
        for lit in clause:
            v = assignment[abs(lit) - 1]
            if (lit > 0 and v) or (lit < 0 and not v):
                ok = True
        bad += not ok
    return bad


def cut_by_loop(edges, part):
    return sum(1 for u, v in edges if part[u] != part[v])


# ---- sat_cost ---------------------------------------------------------------

def test_single_clause_satisfied_by_x1():
    f = CnfFormula(3, [(1, 2, 3)])
    assert sat_cost(f, np.array([True, False, False])) == 0


def test_single_clause_all_false_violates():
    f = CnfFormula(3, [(1, 2, 3)])
    assert sat_cost(f, np.array([False, False, False])) == 1


def test_sat_cost_matches_reference_on_every_assignment():
    f = gen_random_3sat(8, 20, seed=11)
    for bits in itertools.product([False, True], repeat=8):
        a = np.array(bits)
        assert sat_cost(f, a) == clause_by_clause(f.clauses, a)


def test_sat_cost_rejects_wrong_length():
    f = CnfFormula(3, [(1, 2, 3)])
    with pytest.raises(ValueError):
        sat_cost(f, np.array([True, False]))


def test_cnf_rejects_repeated_variable_and_bad_index():
    with pytest.raises(ValueError):
        CnfFormula(3, [(1, -1, 2)])
    with pytest.raises(ValueError):
        CnfFormula(3, [(1, 2, 4)])
    with pytest.raises(ValueError):
        CnfFormula(3, [(1, 0, 2)])


# ---- gp_cost ----------------------------------------------------------------

def test_edgeless_graph_costs_zero():
    g = GraphInstance(6, [])
    assert gp_cost(g, np.array([1, 1, 1, 0, 0, 0], dtype=bool)) == 0


def test_k4_every_balanced_partition_cuts_four():
    g = GraphInstance(4, list(itertools.combinations(range(4), 2)))
    for side in itertools.combinations(range(4), 2):
        c = np.zeros(4, dtype=bool)
        c[list(side)] = True
        assert gp_cost(g, c) == 4


def test_gp_cost_rejects_unbalanced():
    g = GraphInstance(4, [(0, 1)])
    with pytest.raises(ValueError):
        gp_cost(g, np.array([True, True, True, False]))


def test_gnp_brute_force_matches_enumeration():
    g = gen_gnp(12, 0.3, seed=4)
    best = min(
        cut_by_loop(g.edges, [i in side for i in range(12)])
        for side in itertools.combinations(range(12), 6)
    )
    assert brute_force_min(as_problem(g))[0] == best


def test_graph_rejects_odd_self_loop_and_duplicates():
    with pytest.raises(ValueError):
        GraphInstance(3, [])
    with pytest.raises(ValueError):
        GraphInstance(4, [(1, 1)])
    with pytest.raises(ValueError):
        GraphInstance(4, [(0, 1), (1, 0)])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), p=st.floats(0, 1))
def test_cut_invariant_under_complement(seed, p):
    g = gen_gnp(10, p, seed)
    c = PartitionProblem(g).random_configuration(np.random.default_rng(seed))
    assert gp_cost(g, c) == gp_cost(g, ~c) == cut_by_loop(g.edges, c)


# ---- neighborhoods ----------------------------------------------------------

def test_sat_three_vars_has_three_neighbors():
    f = CnfFormula(3, [(1, 2, 3)])
    assert len(neighbors(f, np.zeros(3, dtype=bool))) == 3


def test_gp_four_nodes_has_four_neighbors():
    g = GraphInstance(4, [(0, 1)])
    nb = neighbors(g, np.array([True, True, False, False]))
    assert len(nb) == 4
    assert all(np.count_nonzero(y) == 2 for y in nb)


def _symmetric(problem, configs):
    for c in configs:
        for y in problem.neighbors(c):
            assert any(np.array_equal(c, z) for z in problem.neighbors(y))
    return True


def test_neighbor_relation_is_symmetric_gp():
    p = PartitionProblem(gen_gnp(6, 0.5, 2))
    configs = []
    for side in itertools.combinations(range(6), 3):
        c = np.zeros(6, dtype=bool)
        c[list(side)] = True
        configs.append(c)
    assert _symmetric(p, configs)


def test_neighbor_relation_is_symmetric_sat():
    p = SatProblem(gen_random_3sat(5, 8, 1))
    configs = [np.array(b) for b in itertools.product([False, True], repeat=5)]
    assert _symmetric(p, configs)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_vectorized_deltas_match_direct_costs(seed):
    rng = np.random.default_rng(seed)
    for inst in (gen_gnp(10, 0.4, seed), gen_random_3sat(7, 25, seed)):
        p = as_problem(inst)
        c = p.random_configuration(rng)
        base = p.cost(c)
        direct = [p.cost(y) - base for y in p.neighbors(c)]
        assert list(p.neighbor_deltas(c)) == direct


def test_state_graph_rejects_asymmetric_adjacency():
    with pytest.raises(ValueError):
        StateGraphProblem([0, 1], [(1,), ()])


def test_ring_generator_rows_sum_to_zero():
    q = StateGraphProblem.ring([0, 1, 2, 1]).generator(2.0)
    assert np.allclose(q.sum(axis=1), 0)
    assert q[0, 1] == q[0, 3] == 1.0


# ---- generators -------------------------------------------------------------

def test_gnp_extremes():
    assert gen_gnp(8, 0.0, 1).num_edges == 0
    assert gen_gnp(8, 1.0, 1).num_edges == comb(8, 2)


def test_gnp_odd_n_rejected():
    with pytest.raises(ValueError):
        gen_gnp(5, 0.5, 0)


def test_gnp_is_pure_function_of_seed():
    assert gen_gnp(20, 0.2, 9) == gen_gnp(20, 0.2, 9)
    assert gen_gnp(20, 0.2, 9) != gen_gnp(20, 0.2, 10)


def test_gnp_500_edge_count_within_4_sigma():
    mean = comb(500, 2) * 0.01
    sd = (comb(500, 2) * 0.01 * 0.99) ** 0.5
    counts = np.array([gen_gnp(500, 0.01, s).num_edges for s in range(100)])
    # the average over 100 seeds has standard deviation sd / 10
    assert abs(counts.mean() - mean) < 4 * sd / 10
    assert np.all(np.abs(counts - mean) < 6 * sd)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(3, 12), M=st.integers(0, 60), seed=st.integers(0, 10**6))
def test_planted_formula_is_satisfied_by_hidden_assignment(N, M, seed):
    f = gen_random_3sat(N, M, seed, planted=True)
    assert f.planted is not None
    assert sat_cost(f, np.asarray(f.planted)) == 0
    assert f.num_clauses == M


def test_empty_formula_costs_zero_everywhere():
    f = gen_random_3sat(4, 0, 0)
    for bits in itertools.product([False, True], repeat=4):
        assert sat_cost(f, np.array(bits)) == 0


def test_small_n_rejected():
    with pytest.raises(ValueError):
        gen_random_3sat(2, 3, 0)


def test_clause_triples_are_distinct_and_uniform():
    f = gen_random_3sat(6, 10_000, seed=5)
    triples = [tuple(sorted(abs(l) for l in c)) for c in f.clauses]
    assert all(len(set(t)) == 3 for t in triples)
    counts = np.array([triples.count(t) for t in itertools.combinations(range(1, 7), 3)])
    assert counts.sum() == 10_000
    assert stats.chisquare(counts).pvalue > 0.01
    signs = np.array([l > 0 for c in f.clauses for l in c])
    assert abs(signs.mean() - 0.5) < 4 * (0.25 / signs.size) ** 0.5


# ---- file formats -----------------------------------------------------------

def test_dimacs_round_trip(tmp_path):
    f = gen_random_3sat(9, 17, 3, planted=True)
    path = tmp_path / "f.cnf"
    write_dimacs(f, path)
    g = read_dimacs(path)
    assert g.num_vars == 9 and list(map(tuple, g.clauses)) == list(map(tuple, f.clauses))
    assert np.array_equal(np.asarray(g.planted), np.asarray(f.planted))


def test_dimacs_parses_comments_and_multiline_clauses():
    text = "c hello\np cnf 4 2\n1 -2\n3 0 -1 2 4 0\n"
    f = parse_dimacs(text)
    assert [tuple(c) for c in f.clauses] == [(1, -2, 3), (-1, 2, 4)]


def test_dimacs_rejects_missing_header_and_wrong_count():
    with pytest.raises(ValueError):
        parse_dimacs("1 2 3 0\n")
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 3 2\n1 2 3 0\n")


def test_edgelist_round_trip(tmp_path):
    g = gen_gnp(10, 0.3, 8)
    path = tmp_path / "g.txt"
    write_edgelist(g, path)
    assert read_edgelist(path) == g
    assert write_edgelist(g).splitlines()[0] == f"10 {g.num_edges}"


def test_edgelist_rejects_wrong_count():
    with pytest.raises(ValueError):
        parse_edgelist("4 2\n0 1\n")
