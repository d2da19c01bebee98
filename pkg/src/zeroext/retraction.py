"""Retractions of Cartesian products onto isometric modular subgraphs.

For two factors the map is read off tight cyclically even extensions of the
factor metrics over auxiliary graphs built from excess values; for more
factors, pairwise retractions are lifted and applied until every point lands
on the subgraph.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .exceptions import (
    CyclicOddness,
    HypothesisViolation,
    LemmaViolation,
    NoZeroNode,
    NonTermination,
    NotCyclicallyEven,
)
from .metric import FiniteMetric, Graph, cartesian_product, edge, edge_ends, floyd_warshall, path_metric

# Auxiliary-graph nodes are tagged so factor nodes never collide with product tuples.
FACTOR, PRODUCT = "H", "K"


@dataclass(frozen=True)
class ProductSubgraph:
    """A subgraph of ``factors[0] x factors[1] x ...`` given by its node tuples.

    ``edges`` defaults to the induced subgraph.  ``origin`` is filled in for
    two factors by scanning for a node whose row and column are fully present.
    """

    factors: tuple
    nodes: frozenset
    edges: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "nodes", frozenset(tuple(z) for z in self.nodes))
        k = len(self.factors)
        for z in self.nodes:
            if len(z) != k or any(c not in f.index for c, f in zip(z, self.factors)):
                raise HypothesisViolation("membership", f"{z!r} is not a product node")
        if self.edges is None:
            object.__setattr__(self, "edges", self.product.induced(self.nodes).edges)
        else:
            object.__setattr__(self, "edges", frozenset(frozenset(map(tuple, e)) for e in self.edges))
            for e in self.edges:
                if not e <= self.nodes or e not in self.product.edges:
                    raise HypothesisViolation("subgraph", f"{sorted(e)!r} is not a product edge on the node set")

    @cached_property
    def product(self) -> Graph:
        return cartesian_product(self.factors)

    @cached_property
    def graph(self) -> Graph:
        order = [z for z in self.product.nodes if z in self.nodes]
        return Graph(tuple(order), self.edges)

    def product_distance(self, x, y) -> int:
        return sum(f.hop_distances[a][b] for f, a, b in zip(self.factors, x, y))

    @cached_property
    def origin(self):
        """First two-factor node ``s`` with ``(u, s2)`` and ``(s1, v)`` in the subgraph for all u, v."""
        if len(self.factors) != 2:
            return None
        f1, f2 = self.factors
        for s1 in f1.nodes:
            if not all((s1, v) in self.nodes for v in f2.nodes):
                continue
            for s2 in f2.nodes:
                if all((u, s2) in self.nodes for u in f1.nodes):
                    return (s1, s2)
        return None

    def check_isometric(self) -> None:
        g = self.graph
        if not g.is_connected():
            raise HypothesisViolation("isometric", "subgraph is disconnected")
        hops = g.hop_distances
        for x, y in itertools.combinations(g.nodes, 2):
            if hops[x][y] != self.product_distance(x, y):
                raise HypothesisViolation("isometric", f"distance differs at {x!r}, {y!r}")

    def check_hypotheses(self, frames: bool = True) -> None:
        """Raise :class:`HypothesisViolation` naming the first failed condition."""
        from .modular import is_frame, is_modular

        self.check_isometric()
        if not is_modular(path_metric(self.graph)):
            raise HypothesisViolation("modular", "subgraph is not modular")
        if len(self.factors) == 2:
            if self.origin is None:
                raise HypothesisViolation("origin", "no node has its full row and column in the subgraph")
        if frames:
            for i, f in enumerate(self.factors):
                if not is_frame(f):
                    raise HypothesisViolation("frame", f"factor {i} is not a frame")


@dataclass(frozen=True)
class ExcessTable:
    """Distance from each product node to the subgraph and its nearest nodes."""

    delta: Mapping
    nearest: Mapping
    ps: ProductSubgraph = field(repr=False)

    def minimal_element(self, x):
        """The node of ``nearest[x]`` lying on a shortest path from the origin
        in the first factor to every other nearest node's first coordinate."""
        f1 = self.ps.factors[0]
        s1 = self.ps.origin[0]
        d1 = f1.hop_distances
        near = self.nearest[x]
        cands = [t for t in near if all(d1[s1][t[0]] + d1[t[0]][g[0]] == d1[s1][g[0]] for g in near)]
        if len(cands) != 1:
            raise HypothesisViolation("t_min-unique", f"{len(cands)} minimal nearest nodes for {x!r}")
        return cands[0]


def excess_table(ps: ProductSubgraph) -> ExcessTable:
    """Multi-source BFS from the subgraph nodes through the product graph."""
    k = ps.product
    delta = {z: 0 for z in ps.nodes}
    queue = deque(z for z in k.nodes if z in ps.nodes)
    while queue:
        z = queue.popleft()
        for w in k.adjacency[z]:
            if w not in delta:
                delta[w] = delta[z] + 1
                queue.append(w)
    nearest = {}
    for x in k.nodes:
        nearest[x] = frozenset(t for t in ps.nodes if ps.product_distance(x, t) == delta[x])
    return ExcessTable(delta, nearest, ps)


@dataclass(frozen=True)
class AuxiliaryGraph:
    """Factor ``i`` joined to the product by ``A`` edges (t -- t_i) and ``B``
    edges (x -- s_i), with edge lengths ``lengths``."""

    index: int
    graph: Graph
    lengths: Mapping
    factor_nodes: tuple
    product_nodes: tuple
    a_edges: frozenset
    b_edges: frozenset
    factor: Graph = field(repr=False)


@dataclass(frozen=True)
class DeltaLengths:
    """Edge classes of the product by coordinate and excess change, and the
    lengths of both auxiliary graphs."""

    equal: tuple  # per coordinate: edges moving it with equal excess at both ends
    unequal: tuple  # per coordinate: edges moving it with different excess
    aux: tuple  # AuxiliaryGraph per coordinate


def _moving_coordinate(x, y) -> int:
    return next(p for p in range(len(x)) if x[p] != y[p])


def build_delta(ps: ProductSubgraph, et: ExcessTable | None = None) -> DeltaLengths:
    """Auxiliary graphs and lengths for both coordinates of a two-factor product."""
    if len(ps.factors) != 2:
        raise HypothesisViolation("two-factors", "the construction needs exactly two factors")
    et = et or excess_table(ps)
    s = ps.origin
    if s is None:
        raise HypothesisViolation("origin", "no node has its full row and column in the subgraph")
    k = ps.product
    delta = et.delta
    equal = ([], [])
    unequal = ([], [])
    for e in k.edges:
        x, y = edge_ends(e)
        p = _moving_coordinate(x, y)
        (equal if delta[x] == delta[y] else unequal)[p].append(e)
    aux = []
    for i in (0, 1):
        other = 1 - i
        hi = ps.factors[i]
        rank = hi.hop_distances[s[i]]
        lengths = {}

        def put(u, v, w):
            key = edge(u, v)
            if key in lengths and lengths[key] != w:
                raise CyclicOddness(f"conflicting lengths {lengths[key]} and {w} on {sorted(key, key=repr)!r}")
            lengths[key] = w

        for e in hi.edges:
            u, v = edge_ends(e)
            put((FACTOR, u), (FACTOR, v), 1)
        for e in equal[i] + unequal[other]:
            x, y = edge_ends(e)
            put((PRODUCT, x), (PRODUCT, y), 1)
        for e in unequal[i] + equal[other]:
            x, y = edge_ends(e)
            put((PRODUCT, x), (PRODUCT, y), 0)
        a_edges, b_edges = set(), set()
        for t in ps.nodes:
            put((PRODUCT, t), (FACTOR, t[i]), 0)
            a_edges.add(edge((PRODUCT, t), (FACTOR, t[i])))
        for x in k.nodes:
            put((PRODUCT, x), (FACTOR, s[i]), rank[x[i]] - delta[x])
            b_edges.add(edge((PRODUCT, x), (FACTOR, s[i])))
        fnodes = tuple((FACTOR, v) for v in hi.nodes)
        knodes = tuple((PRODUCT, x) for x in k.nodes)
        g = Graph(fnodes + knodes, frozenset(lengths))
        aux.append(AuxiliaryGraph(i, g, lengths, fnodes, knodes, frozenset(a_edges), frozenset(b_edges), hi))
        _check_even_lengths(g, lengths)
    return DeltaLengths(tuple(map(tuple, equal)), tuple(map(tuple, unequal)), tuple(aux))


def _check_even_lengths(g: Graph, lengths: Mapping) -> None:
    """Every cycle has even length iff edge parities admit a node 2-colouring."""
    colour = {}
    for root in g.nodes:
        if root in colour:
            continue
        colour[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                w = lengths[edge(u, v)]
                if w < 0 or w != int(w):
                    raise CyclicOddness(f"non-integral or negative length on {u!r}-{v!r}")
                want = colour[u] ^ (int(w) & 1)
                if v not in colour:
                    colour[v] = want
                    queue.append(v)
                elif colour[v] != want:
                    raise CyclicOddness(f"odd cycle through edge {u!r}-{v!r}")


def odd_triple(m: FiniteMetric):
    """First triple with odd perimeter, or a non-integral pair; None if cyclically even."""
    d = m.dist
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            if d[i][j] != int(d[i][j]):
                return (m.points[i], m.points[j])
    for i, j, k in itertools.combinations(range(n), 3):
        if (d[i][j] + d[j][k] + d[i][k]) % 2:
            return (m.points[i], m.points[j], m.points[k])
    return None


def is_cyclically_even(m: FiniteMetric) -> bool:
    return odd_triple(m) is None


def aux_metric(gi: AuxiliaryGraph, check: bool = True) -> FiniteMetric:
    """Shortest-path semimetric of an auxiliary graph, with the extension,
    edge-length and parity properties checked exhaustively."""
    g = gi.graph
    n = len(g.nodes)
    idx = g.index
    d = [[None] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for e, w in gi.lengths.items():
        u, v = tuple(e)
        a, b = idx[u], idx[v]
        if d[a][b] is None or w < d[a][b]:
            d[a][b] = d[b][a] = w
    floyd_warshall(d)
    m = FiniteMetric(g.nodes, d, validate=False)
    if check:
        hops = gi.factor.hop_distances
        for u, v in itertools.combinations(gi.factor.nodes, 2):
            if m((FACTOR, u), (FACTOR, v)) != hops[u][v]:
                raise LemmaViolation("auxiliary metric does not extend the factor metric", (u, v))
        for e, w in gi.lengths.items():
            u, v = tuple(e)
            if m(u, v) != w:
                raise LemmaViolation("auxiliary metric differs from an edge length", (u, v))
        bad = odd_triple(m)
        if bad is not None:
            raise LemmaViolation("auxiliary metric is not cyclically even", bad)
    return m


def loose_pair(m: FiniteMetric, terminals, minimum: int = 2):
    """First pair ``(x, y)`` (index order) with ``m(xy) >= minimum`` such that no
    terminals ``u, v`` make ``u, x, y, v`` a shortest path."""
    d = m.dist
    tidx = [m.idx(t) for t in terminals]
    tset = set(tidx)
    n = len(d)
    for i in range(n):
        di = d[i]
        for j in range(i + 1, n):
            if i in tset and j in tset:
                continue
            dij = di[j]
            if dij < minimum:
                continue
            dj = d[j]
            if not any(di[u] + dij + dj[v] == d[u][v] for u in tidx for v in tidx):
                return m.points[i], m.points[j]
    return None


def tighten(m: FiniteMetric, terminals) -> FiniteMetric:
    """Repeatedly shorten a loose pair by 2 and re-close until none is left."""
    terminals = tuple(terminals)
    if odd_triple(m) is not None:
        raise NotCyclicallyEven("tighten needs a cyclically even semimetric")
    tidx = [m.idx(t) for t in terminals]
    base = {(a, b): m.dist[a][b] for a in tidx for b in tidx}
    cur = m
    while True:
        pair = loose_pair(cur, terminals)
        if pair is None:
            return cur
        i, j = cur.idx(pair[0]), cur.idx(pair[1])
        d = [list(row) for row in cur.dist]
        d[i][j] = d[j][i] = d[i][j] - 2
        floyd_warshall(d)
        cur = FiniteMetric(cur.points, d, validate=False)
        for (a, b), v in base.items():
            if cur.dist[a][b] != v:
                raise LemmaViolation("tightening changed a terminal distance", (cur.points[a], cur.points[b]))


@dataclass(frozen=True)
class Retraction:
    """Map from every product node onto the subgraph."""

    ps: ProductSubgraph
    gamma: Mapping
    info: Mapping = field(default_factory=dict, compare=False)

    def __call__(self, x):
        return self.gamma[tuple(x)]

    def violations(self, limit: int = 1) -> list[tuple]:
        """Up to ``limit`` failures of the retraction axioms as ``(kind, witness)``."""
        out = []
        ps = self.ps
        g = self.gamma
        k = ps.product
        sub_adj = ps.graph.adjacency
        for z in k.nodes:
            if z not in g:
                out.append(("total", z))
            elif g[z] not in ps.nodes:
                out.append(("image", z))
            elif z in ps.nodes and g[z] != z:
                out.append(("identity", z))
            if len(out) >= limit:
                return out
        for e in k.edges:
            x, y = edge_ends(e)
            if g[y] not in sub_adj[g[x]]:
                out.append(("edge", (x, y)))
                if len(out) >= limit:
                    return out
        for x, y in itertools.combinations(k.nodes, 2):
            dxy = ps.product_distance(x, y)
            dg = ps.product_distance(g[x], g[y])
            if dg > dxy:
                out.append(("expansive", (x, y)))
            elif (dxy - dg) % 2:
                out.append(("parity", (x, y)))
            if len(out) >= limit:
                return out
        return out

    def verify(self) -> bool:
        from .exceptions import PropertyViolated

        bad = self.violations(1)
        if bad:
            kind, witness = bad[0]
            raise PropertyViolated(f"retraction axiom '{kind}' fails", witness)
        return True


def _zero_node(m: FiniteMetric, x, factor_nodes):
    row = m.dist[m.idx(x)]
    zeros = [v for v in factor_nodes if row[m.idx(v)] == 0]
    if not zeros:
        raise NoZeroNode(f"no factor node at distance zero from {x!r}", x)
    if len(zeros) > 1:
        raise NoZeroNode(f"several factor nodes at distance zero from {x!r}", (x, tuple(zeros)))
    return zeros[0][1]


def two_orbit_retraction(ps: ProductSubgraph, check: bool = True) -> Retraction:
    """Retraction of a two-factor product onto ``ps`` (factors must be frames)."""
    if len(ps.factors) != 2:
        raise HypothesisViolation("two-factors", "expected exactly two factors")
    if check:
        ps.check_hypotheses(frames=True)
    et = excess_table(ps)
    dl = build_delta(ps, et)
    tight = []
    for gi in dl.aux:
        mi = aux_metric(gi, check=check)
        tight.append(tighten(mi, gi.factor_nodes))
    gamma = {}
    for x in ps.product.nodes:
        tag = (PRODUCT, x)
        gamma[x] = tuple(_zero_node(tight[i], tag, dl.aux[i].factor_nodes) for i in (0, 1))
    r = Retraction(ps, gamma, {"excess": et, "delta": dl, "tight": tuple(tight), "steps": ()})
    if check:
        r.verify()
    return r


def pair_projection(ps: ProductSubgraph, i: int, j: int) -> ProductSubgraph:
    nodes = {(z[i], z[j]) for z in ps.nodes}
    edges = set()
    for e in ps.edges:
        x, y = tuple(e)
        if all(x[p] == y[p] for p in range(len(x)) if p not in (i, j)):
            a, b = (x[i], x[j]), (y[i], y[j])
            if a != b:
                edges.add(frozenset((a, b)))
    return ProductSubgraph((ps.factors[i], ps.factors[j]), frozenset(nodes), frozenset(edges))


class PairRetractions:
    """Lazily built pairwise retractions ``gamma_ij`` for a product subgraph."""

    def __init__(self, ps: ProductSubgraph, check: bool = True):
        self.ps = ps
        self.check = check
        self._maps = {}
        self.projections = {}
        k = len(ps.factors)
        for i, j in itertools.combinations(range(k), 2):
            self.projections[(i, j)] = frozenset((z[i], z[j]) for z in ps.nodes)

    def outside(self, z):
        """First pair ``(i, j)`` with ``(z_i, z_j)`` missing from the projection."""
        for (i, j), proj in self.projections.items():
            if (z[i], z[j]) not in proj:
                return i, j
        return None

    def gamma(self, i: int, j: int) -> Retraction:
        if (i, j) not in self._maps:
            self._maps[(i, j)] = two_orbit_retraction(pair_projection(self.ps, i, j), check=self.check)
        return self._maps[(i, j)]

    def psi(self, i: int, j: int, z: tuple) -> tuple:
        a, b = self.gamma(i, j)((z[i], z[j]))
        z = list(z)
        z[i], z[j] = a, b
        return tuple(z)


@dataclass
class UncrossingRun:
    config: dict
    steps: list
    potentials: list
    stalls: int


def uncross(config: Mapping, pairs: PairRetractions, keys, limit: int) -> UncrossingRun:
    """Apply lifted pairwise retractions to a whole configuration until every
    point lies in the subgraph.

    ``config`` maps keys to product nodes; ``keys`` fixes the scan order.
    Candidates are ``(key, (i, j))`` with the pair projection of the key's
    point missing from the subgraph's projection, in key order and then pair
    order.  The first candidate whose application strictly lowers the
    potential (sum over keys of product distance to the subgraph) is used;
    if none does, the first candidate is used and counted as a stall.
    """
    ps = pairs.ps
    nodes = list(ps.nodes)
    cache = {}

    def dist(z):
        if z not in cache:
            cache[z] = min(ps.product_distance(z, t) for t in nodes)
        return cache[z]

    config = dict(config)
    potential = sum(dist(config[q]) for q in keys)
    potentials = [potential]
    steps = []
    stalls = 0
    while True:
        candidates = []
        for q in keys:
            z = config[q]
            for (i, j), proj in pairs.projections.items():
                if (z[i], z[j]) not in proj:
                    candidates.append((q, i, j))
        if not candidates:
            break
        if len(steps) >= limit:
            raise NonTermination("uncrossing exceeded its iteration bound")
        chosen = None
        for q, i, j in candidates:
            new = {x: pairs.psi(i, j, z) for x, z in config.items()}
            value = sum(dist(new[x]) for x in keys)
            if value < potential:
                chosen = (q, i, j, new, value)
                break
        if chosen is None:
            stalls += 1
            q, i, j = candidates[0]
            new = {x: pairs.psi(i, j, z) for x, z in config.items()}
            chosen = (q, i, j, new, sum(dist(new[x]) for x in keys))
        q, i, j, config, potential = chosen
        steps.append((q, i, j))
        potentials.append(potential)
    return UncrossingRun(config, steps, potentials, stalls)


def product_retraction(factors, nodes, check: bool = True) -> Retraction:
    """Retraction of ``factors[0] x ... x factors[k-1]`` onto the subgraph on ``nodes``.

    Every product node starts at itself and the whole image set is moved by
    :func:`uncross`; a step that fails to lower the potential raises
    :class:`NonTermination`.
    """
    ps = nodes if isinstance(nodes, ProductSubgraph) else ProductSubgraph(tuple(factors), frozenset(nodes))
    if check:
        ps.check_hypotheses(frames=True)
        from .modular import layer_graphs_match

        if not layer_graphs_match(ps):
            raise HypothesisViolation("layers", "some factor is not isomorphic to any of its layers")
    k = len(ps.factors)
    if k == 1:
        gamma = {z: z for z in ps.product.nodes}
        return Retraction(ps, gamma, {"steps": (), "potentials": (0,)})
    if k == 2:
        return two_orbit_retraction(ps, check=check)
    pr = PairRetractions(ps, check=check)
    keys = ps.product.nodes
    limit = len(ps.nodes) ** 2 * len(keys)
    run = uncross({z: z for z in keys}, pr, keys, limit)
    if run.stalls:
        raise NonTermination(f"{run.stalls} uncrossing steps did not lower the potential")
    r = Retraction(ps, run.config, {"steps": tuple(run.steps), "potentials": tuple(run.potentials)})
    if check:
        r.verify()
    return r
