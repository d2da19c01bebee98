"""Modularity, orbits, orbit graphs, orientations and metric classification."""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .exceptions import NotAMetric, NotAnOrbit, NotBipartite, NotModular, NotOrbitInvariant
from .isomorphism import are_isomorphic
from .metric import (
    FiniteMetric,
    Graph,
    contract,
    edge_ends,
    medians,
    path_metric,
    sorted_nodes,
    underlying_graph,
    weighted_path_metric,
)


@dataclass(frozen=True)
class Orbit:
    index: int
    edges: frozenset

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class Orientation:
    """Edge orientation ``edge -> (tail, head)`` consistent on every 4-circuit."""

    arcs: Mapping


@dataclass(frozen=True)
class Twist:
    """A projective sequence of oriented edges returning reversed.

    ``steps[i] = (s_i, t_i)`` for ``i = 0..k`` with consecutive edges opposite
    in the 4-circuit ``s_i t_i t_{i+1} s_{i+1}`` and ``steps[k] = (t_0, s_0)``.
    """

    steps: tuple

    @property
    def k(self) -> int:
        return len(self.steps) - 1


@dataclass(frozen=True)
class OrbitDecomposition:
    """``metric = sum(weights[i] * orbit_metrics[i])`` over the orbits of H(metric)."""

    metric: FiniteMetric
    graph: Graph
    lengths: Mapping
    orbits: tuple
    orbit_graphs: tuple
    partitions: tuple  # per orbit: {orbit-graph node: frozenset of T}
    weights: tuple
    orbit_metrics: tuple

    @property
    def k(self) -> int:
        return len(self.orbits)

    def block_of(self, i: int, v) -> object:
        """The orbit-graph node of orbit ``i`` whose block contains ``v``."""
        return self._block_index[i][v]

    @property
    def _block_index(self):
        cache = self.__dict__.get("_blocks")
        if cache is None:
            cache = tuple({v: t for t, block in part.items() for v in block} for part in self.partitions)
            object.__setattr__(self, "_blocks", cache)
        return cache


@dataclass(frozen=True)
class CanonicalEmbedding:
    factors: tuple
    phi: Mapping
    inverse: Mapping

    def __call__(self, v):
        return self.phi[v]


@dataclass(frozen=True)
class MetricClassification:
    is_metric: bool
    is_modular: bool = False
    underlying_modular: bool = False
    orbit_invariant: bool = False
    is_orientable: bool = False
    is_hereditary_modular: bool = False
    is_frame: bool = False
    is_median: bool = False
    is_minimizable: bool = False
    theorem3_applicable: bool = False
    orbit_count: int = 0
    orbit_graph_sizes: tuple = ()
    twist: Twist | None = field(default=None, repr=False)

    @property
    def is_intractable(self) -> bool:
        """Non-modular, or modular with a non-orientable underlying graph."""
        return self.is_metric and (not self.is_modular or not self.is_orientable)

    def as_dict(self) -> dict:
        return {
            "is_metric": self.is_metric,
            "is_modular": self.is_modular,
            "underlying_modular": self.underlying_modular,
            "orbit_invariant": self.orbit_invariant,
            "is_orientable": self.is_orientable,
            "is_hereditary_modular": self.is_hereditary_modular,
            "is_frame": self.is_frame,
            "is_median": self.is_median,
            "is_minimizable": self.is_minimizable,
            "theorem3_applicable": self.theorem3_applicable,
            "orbit_count": self.orbit_count,
            "orbit_graph_sizes": list(self.orbit_graph_sizes),
            "twist": None if self.twist is None else [list(step) for step in self.twist.steps],
        }


# --------------------------------------------------------------------------
# medians and modularity


def is_modular(m: FiniteMetric) -> bool:
    """Every triple of points has at least one median."""
    return _median_counts(m, stop_at_zero=True) is not None


def is_median_metric(m: FiniteMetric) -> bool:
    """Every triple of points has exactly one median."""
    counts = _median_counts(m, stop_at_zero=True)
    return counts is not None and all(c == 1 for c in counts)


def _median_counts(m: FiniteMetric, stop_at_zero: bool):
    d = m.dist
    n = len(d)
    counts = []
    for i, j, k in itertools.combinations(range(n), 3):
        dij, dik, djk = d[i][j], d[i][k], d[j][k]
        di, dj, dk = d[i], d[j], d[k]
        c = 0
        for z in range(n):
            if di[z] + dj[z] == dij and di[z] + dk[z] == dik and dj[z] + dk[z] == djk:
                c += 1
        if c == 0 and stop_at_zero:
            return None
        counts.append(c)
    return counts


def medianless_triples(m: FiniteMetric) -> list[tuple]:
    return [t for t in itertools.combinations(m.points, 3) if not medians(m, *t)]


def is_modular_graph(h: Graph) -> bool:
    return h.is_connected() and is_modular(path_metric(h))


# --------------------------------------------------------------------------
# 4-circuits, mates, orbits


def four_circuits(h: Graph):
    """Yield each 4-circuit once as a node tuple ``(v0, v1, v2, v3)``."""
    adj = h.adjacency
    idx = h.index
    seen = set()
    for u, w in itertools.combinations(h.nodes, 2):
        common = sorted_nodes(adj[u] & adj[w])
        for a, b in itertools.combinations(common, 2):
            key = frozenset((frozenset((u, w)), frozenset((a, b))))
            if key in seen:
                continue
            seen.add(key)
            yield (u, a, w, b) if idx[u] < idx[w] else (w, a, u, b)


@lru_cache(maxsize=256)
def _orbit_edge_sets(h: Graph) -> tuple:
    parent = {e: e for e in h.edges}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for v0, v1, v2, v3 in four_circuits(h):
        for e, f in (((v0, v1), (v2, v3)), ((v1, v2), (v3, v0))):
            a, b = find(frozenset(e)), find(frozenset(f))
            if a != b:
                parent[a] = b
    groups = defaultdict(set)
    for e in h.edges:
        groups[find(e)].add(e)
    classes = [frozenset(g) for g in groups.values()]
    classes.sort(key=lambda q: min(edge_ends(e) for e in q))
    return tuple(classes)


def compute_orbits(h: Graph) -> list[Orbit]:
    """Partition the edges of a bipartite graph into orbits (mate-closure classes)."""
    if not h.is_bipartite():
        raise NotBipartite("orbits are defined here for bipartite graphs")
    return [Orbit(i, q) for i, q in enumerate(_orbit_edge_sets(h))]


def orbit_graph(h: Graph, q: Orbit | frozenset) -> tuple[Graph, dict]:
    """Contract every edge outside ``q``; return the orbit graph and its blocks.

    The second value maps each orbit-graph node to the node set of ``h`` it
    absorbs; nodes are named by the smallest member of their block.
    """
    edges = q.edges if isinstance(q, Orbit) else frozenset(q)
    if edges not in _orbit_edge_sets(h):
        raise NotAnOrbit("edge set is not an orbit of the graph")
    g, rep = contract(h, h.edges - edges)
    blocks = defaultdict(set)
    for v, r in rep.items():
        blocks[r].add(v)
    return g, {t: frozenset(blocks[t]) for t in g.nodes}


def orbit_invariance(m: FiniteMetric) -> tuple[bool, tuple | None]:
    """Whether ``m`` is constant on each orbit of H(m); weights if so."""
    h, lengths = underlying_graph(m)
    weights = []
    for q in _orbit_edge_sets(h):
        values = {lengths[e] for e in q}
        if len(values) != 1:
            return False, None
        weights.append(values.pop())
    return True, tuple(weights)


def orbit_decomposition(m: FiniteMetric) -> OrbitDecomposition:
    """Decompose a modular metric as a weighted sum of its orbit metrics."""
    if not m.is_metric:
        raise NotAMetric("orbit decomposition needs a metric")
    if not is_modular(m):
        raise NotModular("metric is not modular")
    return _decompose(m)


@lru_cache(maxsize=64)
def _decompose(m: FiniteMetric) -> OrbitDecomposition:
    h, lengths = underlying_graph(m)
    ok, weights = orbit_invariance(m)
    if not ok:
        raise NotOrbitInvariant("modular metric is not orbit-invariant")
    orbits = compute_orbits(h)
    graphs, partitions, metrics = [], [], []
    for q in orbits:
        g, blocks = orbit_graph(h, q)
        graphs.append(g)
        partitions.append(blocks)
        metrics.append(weighted_path_metric(h, {e: int(e in q.edges) for e in h.edges}))
    for x, y in m.pairs():
        total = sum(w * mu(x, y) for w, mu in zip(weights, metrics))
        if total != m(x, y):
            raise NotOrbitInvariant(f"orbit sum mismatch at ({x!r}, {y!r})")
    return OrbitDecomposition(
        metric=m, graph=h, lengths=lengths, orbits=tuple(orbits), orbit_graphs=tuple(graphs),
        partitions=tuple(partitions), weights=tuple(weights), orbit_metrics=tuple(metrics),
    )


# --------------------------------------------------------------------------
# orientation


def _oriented_transitions(h: Graph) -> dict:
    trans = defaultdict(set)

    def link(a, b):
        trans[a].add(b)
        trans[b].add(a)

    for v0, v1, v2, v3 in four_circuits(h):
        link((v0, v1), (v3, v2))
        link((v1, v0), (v2, v3))
        link((v1, v2), (v0, v3))
        link((v2, v1), (v3, v0))
    return trans


def _find_orientation(h: Graph) -> Orientation | Twist:
    trans = _oriented_transitions(h)
    arcs = {}
    for e in sorted(h.edges, key=edge_ends):
        if e in arcs:
            continue
        s, t = edge_ends(e)
        start = (s, t)
        prev = {start: None}
        queue = deque([start])
        while queue:
            state = queue.popleft()
            for nxt in sorted(trans[state]):
                if nxt not in prev:
                    prev[nxt] = state
                    queue.append(nxt)
        if (t, s) in prev:
            steps = []
            cur = (t, s)
            while cur is not None:
                steps.append(cur)
                cur = prev[cur]
            return Twist(tuple(reversed(steps)))
        for a, b in prev:
            arcs[frozenset((a, b))] = (a, b)
    return Orientation(arcs)


def orient(h: Graph) -> Orientation | Twist:
    """Orient the edges consistently on all 4-circuits or exhibit a twist."""
    if not h.is_bipartite():
        raise NotBipartite("orient expects a bipartite graph")
    return _find_orientation(h)


def is_orientable(h: Graph) -> bool:
    return isinstance(_find_orientation(h), Orientation)


def check_orientation(h: Graph, orientation: Orientation) -> bool:
    arcs = orientation.arcs
    if set(arcs) != set(h.edges):
        return False
    for v0, v1, v2, v3 in four_circuits(h):
        cyc = (v0, v1, v2, v3)
        for i in (1, 2):
            a = cyc[i - 1], cyc[i % 4]
            b = cyc[(i + 2) % 4], cyc[(i + 1) % 4]
            if (arcs[frozenset(a)] == a) != (arcs[frozenset(b)] == b):
                return False
    return True


# --------------------------------------------------------------------------
# hereditary modularity and frames


def isometric_circuits(h: Graph, min_length: int = 6, first_only: bool = False) -> list[tuple]:
    """Isometric circuits of length >= ``min_length`` (each found from its
    smallest-index node, possibly in both directions)."""
    d = h.hop_distances
    idx = h.index
    n = len(h.nodes)
    diam = max((max(row.values()) for row in d.values()), default=0)
    found = []
    for length in range(min_length, min(n, 2 * diam + 1) + 1):
        half = length // 2
        for v0 in h.nodes:
            path = [v0]
            on_path = {v0}

            def extend():
                j = len(path)
                if j == length:
                    if d[path[-1]][v0] == 1:
                        found.append(tuple(path))
                        return first_only
                    return False
                for w in h.adjacency[path[-1]]:
                    if w in on_path or idx[w] < idx[v0]:
                        continue
                    ok = True
                    for i in range(j - 1):
                        gap = j - i
                        if d[path[i]][w] != min(gap, length - gap):
                            ok = False
                            break
                    if not ok:
                        continue
                    path.append(w)
                    on_path.add(w)
                    if extend():
                        return True
                    path.pop()
                    on_path.discard(w)
                return False

            if extend() and first_only:
                return found
        del half
    return found


def is_hereditary_modular(h: Graph) -> bool:
    """Bipartite, modular, and free of isometric circuits of length >= 6."""
    if not h.is_connected() or not h.is_bipartite():
        return False
    if not is_modular(path_metric(h)):
        return False
    return not isometric_circuits(h, 6, first_only=True)


def is_frame(h: Graph) -> bool:
    return is_hereditary_modular(h) and is_orientable(h)


# --------------------------------------------------------------------------
# embedding and layers


def canonical_embedding(dec: OrbitDecomposition) -> CanonicalEmbedding:
    """Embed H(mu) into the Cartesian product of its orbit graphs."""
    phi = {v: tuple(dec.block_of(i, v) for i in range(dec.k)) for v in dec.metric.points}
    inverse = {}
    for v, z in phi.items():
        if z in inverse:
            raise NotOrbitInvariant(f"embedding not injective: {v!r} and {inverse[z]!r}")
        inverse[z] = v
    hops = dec.graph.hop_distances
    factor_hops = [g.hop_distances for g in dec.orbit_graphs]
    for u, v in itertools.combinations(dec.metric.points, 2):
        dk = sum(fh[a][b] for fh, a, b in zip(factor_hops, phi[u], phi[v]))
        if dk != hops[u][v]:
            raise NotOrbitInvariant(f"embedding not isometric at ({u!r}, {v!r})")
    return CanonicalEmbedding(tuple(dec.orbit_graphs), phi, inverse)


def orbit_layers(dec: OrbitDecomposition, i: int) -> list[Graph]:
    """Components of the spanning subgraph (T, Q_i) with at least one edge."""
    q = dec.orbits[i].edges
    comps = dec.graph.components(q)
    return [Graph(tuple(v for v in dec.graph.nodes if v in c), frozenset(e for e in q if e <= c))
            for c in comps if len(c) > 1]


def layer_check(dec: OrbitDecomposition, i: int) -> bool:
    """Some component of (T, Q_i) is isomorphic to the orbit graph H_i."""
    target = dec.orbit_graphs[i]
    return any(are_isomorphic(layer, target) for layer in orbit_layers(dec, i))


def layer_graphs_match(ps) -> bool:
    """Each factor of a product subgraph is isomorphic to one of its layers.

    An i-layer is the subgraph induced by the nodes sharing all coordinates
    other than the i-th.
    """
    sub = ps.graph
    for i, factor in enumerate(ps.factors):
        groups = defaultdict(list)
        for z in sub.nodes:
            groups[z[:i] + z[i + 1:]].append(z)
        if not any(len(g) == len(factor.nodes) and are_isomorphic(
                sub.induced(g).relabel({z: z[i] for z in g}), factor) for g in groups.values()):
            return False
    return True


# --------------------------------------------------------------------------
# classification


@lru_cache(maxsize=128)
def classify(m: FiniteMetric) -> MetricClassification:
    if not m.is_metric:
        return MetricClassification(is_metric=False)
    modular = is_modular(m)
    h, _ = underlying_graph(m)
    h_modular = is_modular_graph(h)
    invariant, _ = orbit_invariance(m)
    orientation = _find_orientation(h)
    orientable = isinstance(orientation, Orientation)
    twist = None if orientable else orientation
    hered = is_hereditary_modular(h)
    median = modular and is_median_metric(m)
    sizes = ()
    count = 0
    thm3 = False
    if h.is_bipartite():
        count = len(_orbit_edge_sets(h))
    if modular:
        dec = orbit_decomposition(m)
        sizes = tuple(len(g) for g in dec.orbit_graphs)
        thm3 = all(is_frame(g) for g in dec.orbit_graphs) and all(
            layer_check(dec, i) for i in range(dec.k))
    frame = hered and orientable
    return MetricClassification(
        is_metric=True,
        is_modular=modular,
        underlying_modular=h_modular,
        orbit_invariant=invariant,
        is_orientable=orientable,
        is_hereditary_modular=hered,
        is_frame=frame,
        is_median=median,
        is_minimizable=modular and frame,
        theorem3_applicable=thm3,
        orbit_count=count,
        orbit_graph_sizes=sizes,
        twist=twist,
    )
