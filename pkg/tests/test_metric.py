from fractions import Fraction

import pytest

from zeroext.corpus import complete_bipartite, complete_graph, cycle_graph, hypercube, k33_minus, path_graph
from zeroext.exceptions import DisconnectedGraph, InvalidInput, NegativeLength, NotAMetric, UnknownPoint
from zeroext.metric import (
    FiniteMetric,
    Graph,
    as_rat,
    between,
    cartesian_product,
    format_rat,
    interval,
    is_isometric_subgraph,
    medians,
    path_metric,
    underlying_graph,
    weighted_path_metric,
)


def test_rationals_are_exact():
    assert as_rat("6/4") == Fraction(3, 2)
    assert as_rat("4/2") == 2 and isinstance(as_rat("4/2"), int)
    assert format_rat(Fraction(3, 2)) == "3/2"
    with pytest.raises(InvalidInput):
        as_rat(0.1)
    with pytest.raises(InvalidInput):
        as_rat("one")


def test_path_metric_of_square():
    m = path_metric(cycle_graph(4))
    assert m("v0", "v2") == 2 and m("v1", "v3") == 2
    assert m("v0", "v1") == 1


def test_path_metric_of_k33_minus_edge():
    m = path_metric(k33_minus())
    assert m.max_distance() == 3
    assert m("a1", "b1") == 3
    assert m("a2", "a3") == 2


def test_cube_antipodes():
    m = path_metric(hypercube(3))
    assert m("000", "111") == 3
    assert m.max_distance() == 3


def test_weighted_path_metric_variants():
    g = cycle_graph(4)
    assert weighted_path_metric(g, {e: 1 for e in g.edges}) == path_metric(g)
    v = g.nodes
    orbit = {frozenset((v[0], v[1])), frozenset((v[2], v[3]))}
    m = weighted_path_metric(g, {e: int(e in orbit) for e in g.edges})
    assert m(v[1], v[2]) == 0 and m(v[0], v[3]) == 0
    assert m(v[0], v[1]) == 1 and m(v[0], v[2]) == 1
    zero = weighted_path_metric(g, {e: 0 for e in g.edges})
    assert all(x == 0 for row in zero.dist for x in row)


def test_weighted_path_metric_rejects_bad_lengths():
    g = path_graph(3)
    with pytest.raises(NegativeLength):
        weighted_path_metric(g, {e: -1 for e in g.edges})
    with pytest.raises(InvalidInput):
        weighted_path_metric(g, {next(iter(g.edges)): 1})
    with pytest.raises(DisconnectedGraph):
        path_metric(Graph(("a", "b"), frozenset()))


def test_triangle_violation_is_rejected():
    with pytest.raises(InvalidInput):
        FiniteMetric(["a", "b", "c"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(UnknownPoint):
        path_metric(path_graph(2))("p0", "zz")


def test_betweenness():
    k3 = path_metric(complete_graph(3))
    assert not between(k3, "t0", "t1", "t2")
    p = path_metric(path_graph(3))
    assert between(p, "p0", "p1", "p2")
    assert between(k3, "t0", "t0", "t1")
    assert interval(p, "p0", "p2") == {"p0", "p1", "p2"}


def test_underlying_graph():
    k3 = path_metric(complete_graph(3))
    assert underlying_graph(k3)[0].edges == complete_graph(3).edges
    k23 = complete_bipartite(2, 3)
    assert underlying_graph(path_metric(k23))[0].edges == k23.edges
    m = FiniteMetric(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert underlying_graph(m)[0].edges == {frozenset("ab"), frozenset("bc")}
    semi = FiniteMetric(["a", "b"], [[0, 0], [0, 0]], validate=False)
    with pytest.raises(NotAMetric):
        underlying_graph(semi)


def test_medians():
    assert medians(path_metric(complete_graph(3)), "t0", "t1", "t2") == frozenset()
    assert medians(path_metric(path_graph(3)), "p0", "p1", "p2") == {"p1"}
    q3 = path_metric(hypercube(3))
    assert all(len(medians(q3, *t)) == 1 for t in [("000", "011", "110"), ("001", "010", "100")])


def test_round_trip_through_underlying_graph(metrics):
    for name, m in metrics.items():
        g, lengths = underlying_graph(m)
        assert weighted_path_metric(g, lengths) == m, name


def test_isometric_subgraph():
    c6 = cycle_graph(6)
    assert is_isometric_subgraph(c6, ["v0", "v1", "v2", "v3"])
    assert not is_isometric_subgraph(c6, ["v0", "v1", "v2", "v3", "v4"])
    q3 = hypercube(3)
    sub = ["000", "001", "011", "111", "110", "100"]
    assert is_isometric_subgraph(q3, sub)
    full = path_metric(q3)
    restricted = path_metric(q3.induced(sub))
    assert all(restricted(u, v) == full(u, v) for u in sub for v in sub)


def test_cartesian_product_distances():
    k = cartesian_product([path_graph(3), complete_graph(2)])
    assert len(k.nodes) == 6 and len(k.edges) == 7
    assert path_metric(k)(("p0", "t0"), ("p2", "t1")) == 3
