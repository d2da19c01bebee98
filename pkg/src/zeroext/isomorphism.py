"""Backtracking graph isomorphism for the tiny graphs met in layer checks."""

from __future__ import annotations

from .metric import Graph


def find_isomorphism(g1: Graph, g2: Graph) -> dict | None:
    """Return a node bijection ``g1 -> g2`` preserving adjacency, or None."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return None
    if sorted(g1.degree(v) for v in g1.nodes) != sorted(g2.degree(v) for v in g2.nodes):
        return None
    # Most constrained first: high degree nodes, then neighbours of mapped ones.
    order = []
    remaining = set(g1.nodes)
    while remaining:
        frontier = [v for v in remaining if any(u in g1.adjacency[v] for u in order)]
        pool = frontier or list(remaining)
        v = max(pool, key=lambda x: (g1.degree(x), -g1.index[x]))
        order.append(v)
        remaining.discard(v)

    mapping: dict = {}
    used: set = set()

    def extend(k: int) -> bool:
        if k == len(order):
            return True
        v = order[k]
        for w in g2.nodes:
            if w in used or g2.degree(w) != g1.degree(v):
                continue
            ok = True
            for u, image in mapping.items():
                if (u in g1.adjacency[v]) != (image in g2.adjacency[w]):
                    ok = False
                    break
            if not ok:
                continue
            mapping[v] = w
            used.add(w)
            if extend(k + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return dict(mapping) if extend(0) else None


def are_isomorphic(g1: Graph, g2: Graph) -> bool:
    return find_isomorphism(g1, g2) is not None
