import pytest

from zeroext.corpus import (
    bipartite_graphs_up_to,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    fig2_graph,
    hypercube,
    k33_minus,
    path_graph,
    rectangle_metric,
    tree_graph,
)
from zeroext.exceptions import NotAnOrbit, NotBipartite, NotModular
from zeroext.isomorphism import are_isomorphic, find_isomorphism
from zeroext.metric import Graph, cartesian_product, path_metric
from zeroext.modular import (
    Orientation,
    Twist,
    canonical_embedding,
    check_orientation,
    classify,
    compute_orbits,
    is_frame,
    is_hereditary_modular,
    is_median_metric,
    is_modular,
    isometric_circuits,
    layer_check,
    orbit_decomposition,
    orbit_graph,
    orbit_invariance,
    orient,
)


def test_modularity():
    assert not is_modular(path_metric(complete_graph(3)))
    assert is_modular(path_metric(complete_bipartite(2, 3)))
    for g in (tree_graph(), path_graph(5), complete_bipartite(1, 4)):
        assert is_modular(path_metric(g))
    assert is_median_metric(path_metric(hypercube(3)))
    assert not is_median_metric(path_metric(complete_bipartite(2, 3)))


def test_orbits_of_small_graphs():
    c4 = compute_orbits(cycle_graph(4))
    assert sorted(len(q) for q in c4) == [2, 2]
    assert len(compute_orbits(complete_bipartite(2, 3))) == 1
    assert len(compute_orbits(fig2_graph())) == 3
    with pytest.raises(NotBipartite):
        compute_orbits(complete_graph(3))


def test_orbit_graphs():
    c4 = cycle_graph(4)
    for q in compute_orbits(c4):
        g, _ = orbit_graph(c4, q)
        assert are_isomorphic(g, complete_graph(2))
    h = fig2_graph()
    sizes = sorted(len(orbit_graph(h, q)[0].nodes) for q in compute_orbits(h))
    assert sizes == [2, 2, 5]
    thin = max(compute_orbits(h), key=len)
    assert are_isomorphic(orbit_graph(h, thin)[0], complete_bipartite(2, 3))
    q3 = hypercube(3)
    for q in compute_orbits(q3):
        assert are_isomorphic(orbit_graph(q3, q)[0], complete_graph(2))
    with pytest.raises(NotAnOrbit):
        orbit_graph(c4, {next(iter(c4.edges))})


def test_orbit_invariance_and_weights():
    ok, w = orbit_invariance(rectangle_metric(1, 2))
    assert ok and sorted(w) == [1, 2]
    ok, w = orbit_invariance(path_metric(hypercube(3)))
    assert ok and w == (1, 1, 1)


def test_decomposition_sums_back():
    for m in (rectangle_metric(1, 2), path_metric(hypercube(3)), path_metric(complete_bipartite(2, 3))):
        dec = orbit_decomposition(m)
        for x, y in m.pairs():
            assert sum(h * mi(x, y) for h, mi in zip(dec.weights, dec.orbit_metrics)) == m(x, y)
    q3 = orbit_decomposition(path_metric(hypercube(3)))
    for mi in q3.orbit_metrics:
        assert {v for row in mi.dist for v in row} == {0, 1}
    with pytest.raises(NotModular):
        orbit_decomposition(path_metric(complete_graph(3)))


def test_orientation():
    assert isinstance(orient(cycle_graph(4)), Orientation)
    assert check_orientation(cycle_graph(4), orient(cycle_graph(4)))
    assert isinstance(orient(tree_graph()), Orientation)
    tw = orient(k33_minus())
    assert isinstance(tw, Twist)
    assert tw.steps[-1] == tuple(reversed(tw.steps[0]))


def test_twist_steps_are_opposite_in_squares():
    h = k33_minus()
    tw = orient(h)
    for (s0, t0), (s1, t1) in zip(tw.steps, tw.steps[1:]):
        assert h.has_edge(s0, t0) and h.has_edge(s1, t1)
        assert h.has_edge(s0, s1) and h.has_edge(t0, t1)


def test_hereditary_modularity():
    assert not is_hereditary_modular(hypercube(3))
    assert isometric_circuits(hypercube(3), 6, first_only=True)
    assert is_hereditary_modular(k33_minus())
    assert not is_frame(k33_minus())
    for g in bipartite_graphs_up_to(5):
        assert is_frame(g)


def test_classification():
    k23 = classify(path_metric(complete_bipartite(2, 3)))
    assert k23.is_minimizable and not k23.is_median
    q3 = classify(path_metric(hypercube(3)))
    assert q3.is_median and q3.theorem3_applicable and not q3.is_minimizable
    assert not classify(path_metric(complete_graph(3))).is_modular
    assert classify(path_metric(complete_graph(3))).is_intractable


def test_canonical_embedding():
    q3 = orbit_decomposition(path_metric(hypercube(3)))
    emb = canonical_embedding(q3)
    assert len(set(emb.phi.values())) == 8 == 2 ** 3
    fig2 = orbit_decomposition(path_metric(fig2_graph()))
    emb = canonical_embedding(fig2)
    assert [len(g.nodes) for g in emb.factors] == [2, 5, 2]
    assert len(emb.phi) == 14
    k23 = orbit_decomposition(path_metric(complete_bipartite(2, 3)))
    assert are_isomorphic(canonical_embedding(k23).factors[0], complete_bipartite(2, 3))


def test_layer_check():
    q3 = orbit_decomposition(path_metric(hypercube(3)))
    assert all(layer_check(q3, i) for i in range(q3.k))
    fig2 = orbit_decomposition(path_metric(fig2_graph()))
    assert all(layer_check(fig2, i) for i in range(fig2.k))
    prod = orbit_decomposition(path_metric(cartesian_product([path_graph(3), cycle_graph(4)])))
    assert all(layer_check(prod, i) for i in range(prod.k))


def test_isomorphism_search():
    g = cycle_graph(4)
    h = Graph.from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
    iso = find_isomorphism(g, h)
    assert iso is not None
    assert all(h.has_edge(iso[u], iso[v]) for u, v in (tuple(e) for e in g.edges))
    assert find_isomorphism(g, path_graph(4)) is None
