"""Exact-rational finite metrics, simple graphs and path metrics.

Distances are stored as ``int`` when integral and :class:`fractions.Fraction`
otherwise; both compare and hash consistently, and keeping integers as
``int`` makes the graph-heavy code paths considerably faster.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Hashable, Iterable, Mapping

from .exceptions import (
    DisconnectedGraph,
    InvalidInput,
    NegativeLength,
    NotAMetric,
    UnknownPoint,
)

Rat = Fraction
Node = Hashable

#: Triangle inequalities are re-verified on construction up to this size.
TRIANGLE_CHECK_LIMIT = 30


def as_rat(value) -> int | Fraction:
    """Convert ``value`` to an exact rational.

    Accepts ints, Fractions and strings like ``"3"`` or ``"-7/4"``.
    Floats are rejected unless they are integral, to keep everything exact.
    """
    if isinstance(value, bool):
        raise InvalidInput(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, Rational):
        value = Fraction(value.numerator, value.denominator)
    elif isinstance(value, str):
        try:
            value = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not a rational number: {value!r}") from exc
    elif isinstance(value, float):
        if not value.is_integer():
            raise InvalidInput(f"inexact float {value!r}; pass a Fraction or 'p/q' string")
        return int(value)
    else:
        raise InvalidInput(f"not a rational number: {value!r}")
    if value.denominator == 1:
        return value.numerator
    return value


def format_rat(value) -> str:
    value = as_rat(value)
    if isinstance(value, int):
        return str(value)
    return f"{value.numerator}/{value.denominator}"


def sorted_nodes(nodes: Iterable[Node]) -> list:
    nodes = list(nodes)
    try:
        return sorted(nodes)
    except TypeError:
        return sorted(nodes, key=repr)


def edge(u: Node, v: Node) -> frozenset:
    if u == v:
        raise InvalidInput(f"loop at {u!r}")
    return frozenset((u, v))


def edge_ends(e: frozenset) -> tuple:
    """Endpoints of an edge in a deterministic order."""
    return tuple(sorted_nodes(e))


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph."""

    nodes: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise InvalidInput("duplicate node ids")
        object.__setattr__(self, "nodes", nodes)
        edges = frozenset(frozenset(e) for e in self.edges)
        node_set = set(nodes)
        for e in edges:
            if len(e) != 2:
                raise InvalidInput(f"loop or malformed edge {set(e)!r}")
            if not e <= node_set:
                raise InvalidInput(f"edge {set(e)!r} has endpoints outside the node set")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], nodes: Iterable[Node] | None = None) -> "Graph":
        edge_list = [edge(u, v) for u, v in edges]
        if nodes is None:
            seen = {}
            for e in edge_list:
                for v in edge_ends(e):
                    seen.setdefault(v, None)
            nodes = seen.keys()
        return cls(tuple(nodes), frozenset(edge_list))

    @cached_property
    def adjacency(self) -> dict:
        adj = {v: set() for v in self.nodes}
        for e in self.edges:
            u, v = tuple(e)
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(ns) for v, ns in adj.items()}

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.nodes)}

    def neighbors(self, v: Node) -> frozenset:
        return self.adjacency[v]

    def has_edge(self, u: Node, v: Node) -> bool:
        return frozenset((u, v)) in self.edges

    def degree(self, v: Node) -> int:
        return len(self.adjacency[v])

    def __len__(self):
        return len(self.nodes)

    @cached_property
    def hop_distances(self) -> dict:
        """All-pairs hop counts; missing keys mean unreachable."""
        return {v: bfs_distances(self, v) for v in self.nodes}

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        return len(self.hop_distances[self.nodes[0]]) == len(self.nodes)

    def components(self, edges: Iterable[frozenset] | None = None) -> list[frozenset]:
        """Connected components, optionally of the spanning subgraph on ``edges``."""
        if edges is None:
            adj = self.adjacency
        else:
            adj = {v: set() for v in self.nodes}
            for e in edges:
                u, v = tuple(e)
                adj[u].add(v)
                adj[v].add(u)
        seen: set = set()
        comps = []
        for v in self.nodes:
            if v in seen:
                continue
            comp = {v}
            queue = deque([v])
            while queue:
                u = queue.popleft()
                for w in adj[u]:
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            comps.append(frozenset(comp))
        return comps

    def bipartition(self) -> dict | None:
        """2-colouring ``node -> 0/1`` or None if the graph is not bipartite."""
        colour: dict = {}
        for start in self.nodes:
            if start in colour:
                continue
            colour[start] = 0
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if w not in colour:
                        colour[w] = 1 - colour[u]
                        queue.append(w)
                    elif colour[w] == colour[u]:
                        return None
        return colour

    def is_bipartite(self) -> bool:
        return self.bipartition() is not None

    def induced(self, nodes: Iterable[Node]) -> "Graph":
        keep = set(nodes)
        order = tuple(v for v in self.nodes if v in keep)
        return Graph(order, frozenset(e for e in self.edges if e <= keep))

    def relabel(self, mapping: Mapping) -> "Graph":
        return Graph(
            tuple(mapping[v] for v in self.nodes),
            frozenset(frozenset(mapping[v] for v in e) for e in self.edges),
        )


def bfs_distances(g: Graph, source: Node) -> dict:
    dist = {source: 0}
    queue = deque([source])
    adj = g.adjacency
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def contract(g: Graph, edges: Iterable[frozenset]) -> tuple[Graph, dict]:
    """Contract ``edges`` and merge the resulting parallel edges (``G//Z``).

    Each new node is named after the smallest original node it absorbs.
    Returns the contracted graph and the map ``original node -> new node``.
    """
    comps = g.components(edges)
    rep = {}
    for comp in comps:
        name = sorted_nodes(comp)[0]
        for v in comp:
            rep[v] = name
    new_nodes = tuple(sorted_nodes({rep[v] for v in g.nodes}))
    new_edges = set()
    for e in g.edges:
        u, v = tuple(e)
        if rep[u] != rep[v]:
            new_edges.add(frozenset((rep[u], rep[v])))
    return Graph(new_nodes, frozenset(new_edges)), rep


def cartesian_product(factors: Iterable[Graph]) -> Graph:
    """Cartesian product; nodes are coordinate tuples."""
    factors = list(factors)
    nodes = tuple(itertools.product(*(f.nodes for f in factors)))
    edges = set()
    for z in nodes:
        for i, f in enumerate(factors):
            for w in f.adjacency[z[i]]:
                y = z[:i] + (w,) + z[i + 1:]
                edges.add(frozenset((z, y)))
    return Graph(nodes, frozenset(edges))


@dataclass(frozen=True, eq=True)
class FiniteMetric:
    """A finite semimetric with exact rational distances.

    ``dist`` is a full symmetric matrix indexed in the order of ``points``.
    Construction validates symmetry, zero diagonal, nonnegativity and (up to
    :data:`TRIANGLE_CHECK_LIMIT` points, or when ``validate`` is forced) every
    triangle inequality.
    """

    points: tuple
    dist: tuple = field(repr=False)

    def __init__(self, points, dist, validate: bool | None = None):
        points = tuple(points)
        if len(set(points)) != len(points):
            raise InvalidInput("duplicate point ids")
        n = len(points)
        rows = tuple(tuple(as_rat(v) for v in row) for row in dist)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InvalidInput("distance matrix shape does not match the point list")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", rows)
        if validate is None:
            validate = n <= TRIANGLE_CHECK_LIMIT
        self._check_axioms(full=validate)

    def _check_axioms(self, full: bool) -> None:
        d = self.dist
        n = len(d)
        for i in range(n):
            if d[i][i] != 0:
                raise NotAMetric(f"nonzero diagonal at {self.points[i]!r}")
            for j in range(i + 1, n):
                if d[i][j] != d[j][i]:
                    raise NotAMetric(f"asymmetric at ({self.points[i]!r}, {self.points[j]!r})")
                if d[i][j] < 0:
                    raise NotAMetric(f"negative distance at ({self.points[i]!r}, {self.points[j]!r})")
        if full:
            bad = self.triangle_violation()
            if bad is not None:
                x, y, z = bad
                raise NotAMetric(f"triangle inequality fails for {x!r}, {y!r}, {z!r}")

    def triangle_violation(self) -> tuple | None:
        """First triple ``(x, y, z)`` with d(x,y)+d(y,z) < d(x,z), if any."""
        d = self.dist
        n = len(d)
        for j in range(n):
            dj = d[j]
            for i in range(n):
                dij = d[i][j]
                di = d[i]
                for k in range(n):
                    if dij + dj[k] < di[k]:
                        return self.points[i], self.points[j], self.points[k]
        return None

    @classmethod
    def from_function(cls, points, f, validate: bool | None = None) -> "FiniteMetric":
        points = tuple(points)
        rows = [[0 if i == j else f(x, y) for j, y in enumerate(points)] for i, x in enumerate(points)]
        return cls(points, rows, validate=validate)

    @classmethod
    def from_pairs(cls, points, values: Mapping, validate: bool | None = None) -> "FiniteMetric":
        """Build from ``{(x, y): value}``; each unordered pair must appear once."""
        lookup = {}
        for (x, y), v in values.items():
            lookup[frozenset((x, y))] = v
        return cls.from_function(points, lambda x, y: lookup[frozenset((x, y))], validate=validate)

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def idx(self, x) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownPoint(f"unknown point {x!r}") from None

    def __call__(self, x, y):
        return self.dist[self.idx(x)][self.idx(y)]

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return x in self.index

    def __hash__(self):
        return hash((self.points, self.dist))

    @property
    def is_metric(self) -> bool:
        d = self.dist
        return all(d[i][j] > 0 for i in range(len(d)) for j in range(len(d)) if i != j)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(v, int) for row in self.dist for v in row)

    def restrict(self, points: Iterable) -> "FiniteMetric":
        points = tuple(points)
        ids = [self.idx(p) for p in points]
        return FiniteMetric(points, [[self.dist[i][j] for j in ids] for i in ids], validate=False)

    def scaled(self, factor) -> "FiniteMetric":
        factor = as_rat(factor)
        return FiniteMetric(self.points, [[as_rat(v * factor) for v in row] for row in self.dist], validate=False)

    def max_distance(self):
        return max((v for row in self.dist for v in row), default=0)

    def pairs(self):
        """Unordered pairs of distinct points, in index order."""
        return itertools.combinations(self.points, 2)

    def __repr__(self):
        return f"FiniteMetric(points={self.points!r})"


def path_metric(g: Graph) -> FiniteMetric:
    """Hop-count shortest-path metric of a connected graph."""
    if not g.is_connected():
        raise DisconnectedGraph("path metric needs a connected graph")
    hops = g.hop_distances
    return FiniteMetric(g.nodes, [[hops[u][v] for v in g.nodes] for u in g.nodes], validate=False)


def weighted_path_metric(g: Graph, lengths: Mapping) -> FiniteMetric:
    """Shortest-path semimetric of ``g`` under nonnegative edge ``lengths``.

    ``lengths`` maps edges (frozensets or 2-tuples) to rationals and must
    cover every edge.
    """
    if not g.is_connected():
        raise DisconnectedGraph("path metric needs a connected graph")
    ell = _normalize_lengths(g, lengths)
    n = len(g.nodes)
    idx = g.index
    inf = None
    d = [[inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for e, w in ell.items():
        u, v = tuple(e)
        i, j = idx[u], idx[v]
        if d[i][j] is None or w < d[i][j]:
            d[i][j] = d[j][i] = w
    floyd_warshall(d)
    return FiniteMetric(g.nodes, d, validate=False)


def _normalize_lengths(g: Graph, lengths: Mapping) -> dict:
    ell = {}
    for key, w in lengths.items():
        e = frozenset(key)
        if e not in g.edges:
            raise InvalidInput(f"length given for non-edge {tuple(key)!r}")
        w = as_rat(w)
        if w < 0:
            raise NegativeLength(f"negative length on {tuple(key)!r}")
        ell[e] = w
    missing = g.edges - ell.keys()
    if missing:
        raise InvalidInput(f"{len(missing)} edge(s) lack a length, e.g. {edge_ends(next(iter(missing)))!r}")
    return ell


def floyd_warshall(d: list[list]) -> None:
    """In-place all-pairs shortest paths; ``None`` entries mean no edge."""
    n = len(d)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik is None:
                continue
            di = d[i]
            for j in range(n):
                dkj = dk[j]
                if dkj is None:
                    continue
                s = dik + dkj
                if di[j] is None or s < di[j]:
                    di[j] = s


def between(m: FiniteMetric, x, z, y) -> bool:
    """True iff ``z`` lies between ``x`` and ``y``: m(xz) + m(zy) = m(xy)."""
    return m(x, z) + m(z, y) == m(x, y)


def interval(m: FiniteMetric, x, y) -> frozenset:
    return frozenset(z for z in m.points if between(m, x, z, y))


def medians(m: FiniteMetric, s0, s1, s2) -> frozenset:
    """All points z lying simultaneously between each pair of the triple."""
    i0, i1, i2 = m.idx(s0), m.idx(s1), m.idx(s2)
    d = m.dist
    d01, d02, d12 = d[i0][i1], d[i0][i2], d[i1][i2]
    out = []
    for k, z in enumerate(m.points):
        a, b, c = d[i0][k], d[i1][k], d[i2][k]
        if a + b == d01 and a + c == d02 and b + c == d12:
            out.append(z)
    return frozenset(out)


def underlying_graph(m: FiniteMetric) -> tuple[Graph, dict]:
    """The least graph H(m) whose weighted path metric restores ``m``.

    Returns the graph and its edge lengths (``m`` restricted to the edges).
    """
    if not m.is_metric:
        raise NotAMetric("underlying graph needs positive off-diagonal distances")
    d = m.dist
    n = len(d)
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            dij = d[i][j]
            if not any(d[i][k] + d[k][j] == dij for k in range(n) if k != i and k != j):
                edges[frozenset((m.points[i], m.points[j]))] = dij
    return Graph(m.points, frozenset(edges)), edges


def is_isometric_subgraph(g: Graph, sub_nodes: Iterable[Node], metric: FiniteMetric | None = None) -> bool:
    """Whether the subgraph of ``g`` induced by ``sub_nodes`` is isometric."""
    sub = g.induced(sub_nodes)
    if not sub.is_connected():
        return False
    hops = g.hop_distances if metric is None else None
    sub_hops = sub.hop_distances
    for u in sub.nodes:
        for v in sub.nodes:
            full = hops[u][v] if metric is None else metric(u, v)
            if sub_hops[u][v] != full:
                return False
    return True
