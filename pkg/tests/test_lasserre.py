import itertools

import numpy as np

from hypernorm.lasserre import lasserre_roundtrip, solve_lasserre_maxcut, solve_sos_maxcut
from hypernorm.pseudoexp import validate_pef
from hypernorm.sse import RegularGraph, complete_graph, cycle_graph


def exact_maxcut(g):
    return max(sum((b[u] - b[v]) ** 2 / 4 for u, v in g.edges) / len(g.edges)
               for b in itertools.product([-1, 1], repeat=g.n))


def test_single_edge_both_one():
    rep = lasserre_roundtrip(RegularGraph(2, [(0, 1)]))
    assert abs(rep.lasserre_value - 1.0) <= 1e-6
    assert abs(rep.sos_value - 1.0) <= 1e-6
    assert rep.converted_pe_valid


def test_c5_roundtrip_agreement():
    rep = lasserre_roundtrip(cycle_graph(5))
    assert rep.value_gap <= 1e-5
    assert rep.max_moment_discrepancy <= 1e-6
    assert abs(rep.lasserre_converted_objective - rep.lasserre_value) <= 1e-6
    assert abs(rep.sos_converted_objective - rep.sos_value) <= 1e-6
    assert rep.converted_pe_valid
    # both relaxations upper-bound the true cut
    assert rep.lasserre_value >= exact_maxcut(cycle_graph(5)) - 1e-6


def test_k3_matches_exact_cut():
    g = complete_graph(3)
    rep = lasserre_roundtrip(g)
    exact = exact_maxcut(g)
    assert np.isclose(exact, 2.0 / 3.0)
    assert rep.value_gap <= 1e-5
    assert rep.lasserre_value >= exact - 1e-6


def test_sos_solution_is_valid_pef():
    _, pe, _ = solve_sos_maxcut(cycle_graph(5))
    rep = validate_pef(pe, 1e-6)
    assert rep.passed


def test_lasserre_gram_constraints_hold():
    val, y, sets, _ = solve_lasserre_maxcut(cycle_graph(5))
    idx = {s: k for k, s in enumerate(sets)}
    assert abs(y[idx[frozenset()], idx[frozenset()]] - 1.0) <= 1e-6
    # symmetric-difference consistency on a few classes
    a, b = idx[frozenset([0])], idx[frozenset([1])]
    ab = idx[frozenset([0, 1])]
    assert abs(y[a, b] - y[idx[frozenset()], ab]) <= 1e-6
