"""Named graphs and metrics used as fixtures, plus random instance generation."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .metric import FiniteMetric, Graph, path_metric, weighted_path_metric


def complete_graph(n: int, prefix: str = "t") -> Graph:
    nodes = [f"{prefix}{i}" for i in range(n)]
    return Graph.from_edges(itertools.combinations(nodes, 2), nodes)


def complete_bipartite(p: int, q: int) -> Graph:
    left = [f"a{i}" for i in range(1, p + 1)]
    right = [f"b{j}" for j in range(1, q + 1)]
    return Graph.from_edges(itertools.product(left, right), left + right)


def k33_minus() -> Graph:
    """K_{3,3} with the edge a1-b1 removed."""
    g = complete_bipartite(3, 3)
    return Graph(g.nodes, g.edges - {frozenset(("a1", "b1"))})


def cycle_graph(n: int, prefix: str = "v") -> Graph:
    nodes = [f"{prefix}{i}" for i in range(n)]
    return Graph.from_edges(((nodes[i], nodes[(i + 1) % n]) for i in range(n)), nodes)


def path_graph(n: int, prefix: str = "p") -> Graph:
    nodes = [f"{prefix}{i}" for i in range(n)]
    return Graph.from_edges(((nodes[i], nodes[i + 1]) for i in range(n - 1)), nodes)


def hypercube(dim: int) -> Graph:
    nodes = ["".join(bits) for bits in itertools.product("01", repeat=dim)]
    edges = [
        (u, v) for u, v in itertools.combinations(nodes, 2)
        if sum(a != b for a, b in zip(u, v)) == 1
    ]
    return Graph.from_edges(edges, nodes)


def fig2_graph() -> Graph:
    """Three-orbit graph: a K_{2,3} block with a pendant square, doubled.

    One layer has nodes a..g: the K_{2,3} on {b, d} x {a, e, g}, the extra
    edge c-f, and the two edges b-c, e-f closing the square b-c-f-e.  A second
    copy (suffix ``2``) is joined to the first by a perfect matching.  Its
    orbit graphs are K_{2,3}, K_2 and K_2.
    """
    layer = [
        ("a", "b"), ("a", "d"), ("e", "b"), ("e", "d"), ("g", "b"), ("g", "d"),
        ("c", "f"), ("b", "c"), ("e", "f"),
    ]
    names = "abcdefg"
    edges = []
    for suffix in ("1", "2"):
        edges += [(u + suffix, v + suffix) for u, v in layer]
    edges += [(v + "1", v + "2") for v in names]
    nodes = [v + s for s in ("1", "2") for v in names]
    return Graph.from_edges(edges, nodes)


def rectangle_metric(a=1, b=2) -> FiniteMetric:
    """4-circuit with opposite sides of lengths ``a`` and ``b``."""
    g = cycle_graph(4)
    v = g.nodes
    lengths = {
        (v[0], v[1]): a, (v[2], v[3]): a,
        (v[1], v[2]): b, (v[3], v[0]): b,
    }
    return weighted_path_metric(g, lengths)


def tree_graph() -> Graph:
    """A small tree with a degree-3 node and two branches of depth 2."""
    return Graph.from_edges([("r", "a"), ("r", "b"), ("a", "c"), ("a", "d"), ("b", "e")])


def grid_graph(p: int, q: int) -> Graph:
    nodes = [f"g{i}{j}" for i in range(p) for j in range(q)]
    edges = [(f"g{i}{j}", f"g{i + 1}{j}") for i in range(p - 1) for j in range(q)]
    edges += [(f"g{i}{j}", f"g{i}{j + 1}") for i in range(p) for j in range(q - 1)]
    return Graph.from_edges(edges, nodes)


def orbit_weighted_metric(g: Graph, weights) -> FiniteMetric:
    """Path metric of ``g`` with every edge of the i-th orbit given ``weights[i]``."""
    from .modular import compute_orbits

    lengths = {}
    for q, w in zip(compute_orbits(g), weights):
        for e in q.edges:
            lengths[e] = w
    return weighted_path_metric(g, lengths)


def named_metrics() -> dict[str, FiniteMetric]:
    """Fixture metrics keyed by short name."""
    return {
        "K2": path_metric(complete_graph(2)),
        "K3": path_metric(complete_graph(3)),
        "K23": path_metric(complete_bipartite(2, 3)),
        "C4": path_metric(cycle_graph(4)),
        "rect": rectangle_metric(1, 2),
        "Q3": path_metric(hypercube(3)),
        "K33m": path_metric(k33_minus()),
        "fig2": path_metric(fig2_graph()),
        "P3": path_metric(path_graph(3)),
        "P4": path_metric(path_graph(4)),
        "star": path_metric(complete_bipartite(1, 4)),
        "tree": path_metric(tree_graph()),
        "grid": path_metric(grid_graph(2, 3)),
        "fig2w": orbit_weighted_metric(fig2_graph(), (2, 1, 3)),
        "K23w": path_metric(complete_bipartite(2, 3)).scaled(Fraction(3, 2)),
    }


def bipartite_graphs_up_to(n_max: int = 5) -> list[Graph]:
    """Every connected bipartite graph on 2..n_max labelled nodes (deduplicated
    up to a canonical relabelling), for exhaustive corpus checks."""
    seen = set()
    out = []
    for n in range(2, n_max + 1):
        nodes = [f"v{i}" for i in range(n)]
        all_pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1, 1 << len(all_pairs)):
            chosen = [all_pairs[k] for k in range(len(all_pairs)) if mask >> k & 1]
            g = Graph.from_edges(((nodes[i], nodes[j]) for i, j in chosen), nodes)
            if not g.is_connected() or not g.is_bipartite():
                continue
            key = _canonical_key(n, chosen)
            if key in seen:
                continue
            seen.add(key)
            out.append(g)
    return out


def _canonical_key(n, pairs):
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted(tuple(sorted((perm[i], perm[j]))) for i, j in pairs))
        if best is None or key < best:
            best = key
    return n, best


def random_instance(metric: FiniteMetric, n_free: int, max_cost: int = 5, rng=None,
                    density: float = 0.7, fractional: bool = False):
    """Random instance over ``metric`` with ``n_free`` extra points.

    Costs are integers in ``[0, max_cost]`` (or halves when ``fractional``);
    each pair gets a nonzero cost with probability ``density``.
    """
    from .instance import Instance

    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    free = [f"x{i}" for i in range(n_free)]
    points = list(metric.points) + free
    costs = {}
    for u, v in itertools.combinations(points, 2):
        if u in metric.index and v in metric.index:
            if rng.random() < 0.3:
                costs[(u, v)] = rng.randint(0, max_cost)
            continue
        if rng.random() < density:
            c = rng.randint(0, max_cost)
            if fractional and rng.random() < 0.5:
                c = Fraction(2 * c + 1, 2)
            costs[(u, v)] = c
    return Instance.build(metric, free, costs)
