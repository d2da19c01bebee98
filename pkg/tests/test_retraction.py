import itertools

import pytest

from zeroext.corpus import complete_bipartite, complete_graph, cycle_graph, fig2_graph, hypercube, path_graph, tree_graph
from zeroext.exceptions import HypothesisViolation, NotCyclicallyEven, PropertyViolated
from zeroext.metric import FiniteMetric, cartesian_product, path_metric
from zeroext.modular import canonical_embedding, orbit_decomposition
from zeroext.retraction import (
    aux_metric,
    PRODUCT,
    ProductSubgraph,
    Retraction,
    build_delta,
    excess_table,
    loose_pair,
    product_retraction,
    tighten,
    two_orbit_retraction,
)

K2 = complete_graph(2)
A, B = K2.nodes


def corner_path():
    return ProductSubgraph((K2, K2), frozenset({(A, A), (A, B), (B, A)}))


def test_excess_on_the_square():
    ps = corner_path()
    et = excess_table(ps)
    assert all(et.delta[z] == 0 and et.nearest[z] == {z} for z in ps.nodes)
    assert et.delta[(B, B)] == 1
    assert et.nearest[(B, B)] == {(A, B), (B, A)}


def test_excess_bounded_by_radius():
    k23 = complete_bipartite(2, 3)
    k = cartesian_product([k23, K2])
    nodes = [z for z in k.nodes if z[1] == A or z[0] == "a1"]
    ps = ProductSubgraph((k23, K2), frozenset(nodes))
    et = excess_table(ps)
    s = ps.origin
    for x in k.nodes:
        for i, f in enumerate(ps.factors):
            assert et.delta[x] <= f.hop_distances[s[i]][x[i]]


def test_delta_lengths():
    ps = corner_path()
    dl = build_delta(ps)
    g0, g1 = dl.aux
    for e in ps.product.edges:
        tags = frozenset((PRODUCT, z) for z in e)
        assert g0.lengths[tags] + g1.lengths[tags] == 1
    e = frozenset({(PRODUCT, (A, A)), (PRODUCT, (A, B))})
    assert (g0.lengths[e], g1.lengths[e]) == (0, 1)
    origin = ps.origin
    for b in g0.b_edges:
        (x,) = [n[1] for n in b if n[0] == PRODUCT]
        if x in ps.nodes:
            assert g0.lengths[b] == K2.hop_distances[origin[0]][x[0]]


def test_tighten_examples():
    m = FiniteMetric(["u", "v", "x"], [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    t = tighten(m, ["u", "v"])
    assert (t("u", "x"), t("x", "v")) == (0, 1)
    assert tighten(t, ["u", "v"]) == t
    tight = path_metric(path_graph(3))
    assert tighten(tight, tight.points) == tight
    with pytest.raises(NotCyclicallyEven):
        tighten(path_metric(complete_graph(3)), ["t0", "t1"])


def test_tighten_never_increases():
    m = FiniteMetric(["u", "v", "x", "y"], [[0, 2, 2, 4], [2, 0, 2, 2], [2, 2, 0, 2], [4, 2, 2, 0]])
    t = tighten(m, ["u", "v"])
    for i, j in itertools.combinations(range(4), 2):
        assert t.dist[i][j] <= m.dist[i][j]
        if m.dist[i][j] <= 1:
            assert t.dist[i][j] == m.dist[i][j]
    assert loose_pair(t, ["u", "v"]) is None


def _loose_pairs(d, tidx):
    n = len(d)
    for i, j in itertools.combinations(range(n), 2):
        if i in tidx and j in tidx or d[i][j] < 2:
            continue
        if not any(d[u][i] + d[i][j] + d[j][v] == d[u][v] for u in tidx for v in tidx):
            yield i, j


def _all_orders(m, terminals):
    """Every fixed point reachable by shrinking loose pairs in any order."""
    tidx = {m.idx(t) for t in terminals}
    n = len(m.points)
    seen, out, stack = set(), set(), [m.dist]
    while stack:
        d = stack.pop()
        if d in seen:
            continue
        seen.add(d)
        moves = list(_loose_pairs(d, tidx))
        if not moves:
            out.add(d)
        for i, j in moves:
            nd = [list(r) for r in d]
            nd[i][j] = nd[j][i] = d[i][j] - 2
            for k in range(n):
                for a in range(n):
                    for b in range(n):
                        nd[a][b] = min(nd[a][b], nd[a][k] + nd[k][b])
            stack.append(tuple(map(tuple, nd)))
    return out


def test_tighten_fixed_points_over_all_orders():
    terms = ["u", "v"]
    unique = [
        FiniteMetric(["u", "v", "x"], [[0, 1, 2], [1, 0, 3], [2, 3, 0]]),
        FiniteMetric(["u", "v", "x", "y"], [[0, 2, 3, 3], [2, 0, 3, 3], [3, 3, 0, 2], [3, 3, 2, 0]]),
    ]
    for m in unique:
        assert _all_orders(m, terms) == {tighten(m, terms).dist}
    # Two free points each able to collapse onto either terminal: the fixed
    # point depends on the order, but terminal distances never move.
    m = FiniteMetric(["u", "v", "x", "y"], [[0, 2, 2, 4], [2, 0, 2, 2], [2, 2, 0, 2], [4, 2, 2, 0]])
    finals = _all_orders(m, terms)
    assert tighten(m, terms).dist in finals and len(finals) == 4
    assert all(d[0][1] == 2 and not list(_loose_pairs(d, {0, 1})) for d in finals)


def _valid_subgraphs(factors):
    k = cartesian_product(factors)
    for r in range(1, len(k.nodes) + 1):
        for nodes in itertools.combinations(k.nodes, r):
            ps = ProductSubgraph(tuple(factors), frozenset(nodes))
            try:
                ps.check_hypotheses(frames=True)
            except HypothesisViolation:
                continue
            yield ps


@pytest.mark.parametrize(
    "left", [complete_graph(2), complete_bipartite(2, 2), complete_bipartite(2, 3)], ids=["K2", "C4", "K23"]
)
def test_every_tightening_order_gives_a_retraction(left):
    """Each order leaves exactly one zero node per product node.  The chosen
    node may change with the order (it does on some C4 x K2 subgraphs), but
    every combination still satisfies the retraction axioms."""
    for ps in _valid_subgraphs((left, K2)):
        per_factor = []
        for gi in build_delta(ps).aux:
            m = aux_metric(gi)
            fidx = [m.idx(v) for v in gi.factor_nodes]
            maps = set()
            for d in _all_orders(m, gi.factor_nodes):
                pick = {}
                for x in ps.product.nodes:
                    i = m.idx((PRODUCT, x))
                    zeros = [m.points[f][1] for f in fidx if d[i][f] == 0]
                    assert len(zeros) == 1
                    pick[x] = zeros[0]
                maps.add(tuple(sorted(pick.items())))
            per_factor.append([dict(p) for p in maps])
        for g0, g1 in itertools.product(*per_factor):
            gamma = {x: (g0[x], g1[x]) for x in ps.product.nodes}
            assert Retraction(ps, gamma).violations(limit=1) == []


def test_two_orbit_retraction_on_square():
    r = two_orbit_retraction(corner_path())
    assert r((B, B)) == (A, A)
    assert r.verify()


def test_full_product_is_identity():
    k23 = complete_bipartite(2, 3)
    k = cartesian_product([k23, K2])
    r = two_orbit_retraction(ProductSubgraph((k23, K2), frozenset(k.nodes)))
    assert all(r(z) == z for z in k.nodes)


def test_hypothesis_gates():
    with pytest.raises(HypothesisViolation) as info:
        two_orbit_retraction(ProductSubgraph((K2, K2), frozenset({(A, A), (B, B)})))
    assert info.value.hypothesis == "isometric"
    with pytest.raises(HypothesisViolation) as info:
        ProductSubgraph((K2, K2), frozenset({(A, "zz")}))
    assert info.value.hypothesis == "membership"
    c6 = cycle_graph(6)
    with pytest.raises(HypothesisViolation) as info:
        product_retraction((c6, K2), cartesian_product([c6, K2]).nodes)
    assert info.value.hypothesis == "modular"


def test_verify_reports_broken_maps():
    ps = corner_path()
    gamma = {z: z for z in ps.nodes}
    gamma[(B, B)] = (A, B)
    gamma[(A, A)] = (A, B)
    with pytest.raises(PropertyViolated):
        Retraction(ps, gamma).verify()


def test_retraction_distance_parity():
    ps = corner_path()
    r = two_orbit_retraction(ps)
    for x in ps.product.nodes:
        assert ps.product_distance(x, r(x)) % 2 == 0


def test_product_retraction_fig2():
    dec = orbit_decomposition(path_metric(fig2_graph()))
    emb = canonical_embedding(dec)
    r = product_retraction(emb.factors, emb.phi.values())
    assert r.violations(limit=1) == []
    assert len(r.ps.product.nodes) == 20 and len(r.ps.nodes) == 14


def test_product_retraction_cube_and_tree():
    q3 = orbit_decomposition(path_metric(hypercube(3)))
    emb = canonical_embedding(q3)
    r = product_retraction(emb.factors, emb.phi.values())
    assert all(r(z) == z for z in r.ps.product.nodes)
    tree = orbit_decomposition(path_metric(tree_graph()))
    emb = canonical_embedding(tree)
    r = product_retraction(emb.factors, emb.phi.values())
    assert r.violations(limit=1) == []
    assert len(r.info["steps"]) > 0
    pots = r.info["potentials"]
    assert all(b < a for a, b in zip(pots, pots[1:]))


def test_k2_factor_pairs_delegate():
    ps = corner_path()
    assert product_retraction(ps.factors, ps.nodes).gamma == two_orbit_retraction(ps).gamma
