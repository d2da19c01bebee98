"""Line-oriented text format for instances and product subgraphs.

Instance files::

    # comment
    TERMINALS
    a b c
    METRIC
    0 1 1
    1 0 1
    1 1 0
    POINTS
    x
    COSTS
    x a 1
    x b 1/2
    META
    note anything after the key is the value

Rationals are written ``p/q``.  Blank lines and ``#`` comments are ignored.
Product files list one ``FACTOR`` section per factor graph (one edge
``u v`` per line) and an optional ``NODES`` section of comma-joined tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .exceptions import InvalidInput, ParseError
from .instance import Instance
from .metric import FiniteMetric, Graph, as_rat, format_rat

INSTANCE_SECTIONS = ("TERMINALS", "METRIC", "POINTS", "COSTS", "META")
PRODUCT_SECTIONS = ("FACTOR", "NODES")


@dataclass(frozen=True)
class InstanceFile:
    instance: Instance
    meta: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class ProductFile:
    factors: tuple
    nodes: tuple | None


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with their 1-based columns."""
    out = []
    col = 0
    n = len(line)
    while col < n:
        while col < n and line[col].isspace():
            col += 1
        start = col
        while col < n and not line[col].isspace():
            col += 1
        if col > start:
            out.append((line[start:col], start + 1))
    return out


def _sections(text: str, allowed) -> list[tuple[str, int, list]]:
    """Split into ``(header, line number, [(line number, raw line)])``."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip()
        if head in allowed:
            out.append((head, lineno, []))
            continue
        if not out:
            raise ParseError("content before the first section header", lineno, 1)
        out[-1][2].append((lineno, line))
    return out


def _rat(token: str, lineno: int, col: int):
    try:
        return as_rat(token)
    except InvalidInput:
        raise ParseError(f"not a rational number: {token!r}", lineno, col) from None


def parse_instance(text: str) -> InstanceFile:
    found = {}
    for head, lineno, body in _sections(text, INSTANCE_SECTIONS):
        if head in found:
            raise ParseError(f"duplicate section {head}", lineno, 1)
        found[head] = (lineno, body)
    for need in ("TERMINALS", "METRIC"):
        if need not in found:
            raise ParseError(f"missing section {need}")

    terminals = [tok for _, line in found["TERMINALS"][1] for tok, _ in _tokens(line)]
    if not terminals:
        raise ParseError("no terminals", found["TERMINALS"][0], 1)
    seen = set()
    for lineno, line in found["TERMINALS"][1]:
        for tok, col in _tokens(line):
            if tok in seen:
                raise ParseError(f"duplicate terminal {tok!r}", lineno, col)
            seen.add(tok)

    rows = []
    for lineno, line in found["METRIC"][1]:
        toks = _tokens(line)
        if len(toks) != len(terminals):
            col = toks[len(terminals)][1] if len(toks) > len(terminals) else len(line) + 1
            raise ParseError(f"metric row has {len(toks)} entries, expected {len(terminals)}", lineno, col)
        rows.append([_rat(tok, lineno, col) for tok, col in toks])
    if len(rows) != len(terminals):
        raise ParseError(f"metric has {len(rows)} rows, expected {len(terminals)}", found["METRIC"][0], 1)
    metric_line = found["METRIC"][0]
    try:
        metric = FiniteMetric(terminals, rows)
    except InvalidInput as exc:
        raise ParseError(f"invalid metric: {exc}", metric_line, 1) from None

    free = []
    for lineno, line in found.get("POINTS", (0, []))[1]:
        for tok, col in _tokens(line):
            if tok in seen:
                raise ParseError(f"duplicate point {tok!r}", lineno, col)
            seen.add(tok)
            free.append(tok)

    costs = {}
    for lineno, line in found.get("COSTS", (0, []))[1]:
        toks = _tokens(line)
        if len(toks) != 3:
            raise ParseError("cost lines are 'x y value'", lineno, toks[0][1] if toks else 1)
        (x, cx), (y, cy), (v, cv) = toks
        for p, c in ((x, cx), (y, cy)):
            if p not in seen:
                raise ParseError(f"unknown point {p!r}", lineno, c)
        if x == y:
            raise ParseError(f"cost on a loop at {x!r}", lineno, cy)
        value = _rat(v, lineno, cv)
        if value < 0:
            raise ParseError("negative cost", lineno, cv)
        key = frozenset((x, y))
        costs[key] = costs.get(key, 0) + value

    meta = {}
    for lineno, line in found.get("META", (0, []))[1]:
        toks = _tokens(line)
        key = toks[0][0]
        rest = line[toks[1][1] - 1:].strip() if len(toks) > 1 else ""
        meta[key] = rest
    inst = Instance.build(metric, free, {tuple(e): c for e, c in costs.items()})
    return InstanceFile(inst, meta)


def format_instance(inst: Instance, meta: Mapping | None = None) -> str:
    mu = inst.metric
    lines = ["TERMINALS", " ".join(map(str, mu.points)), "METRIC"]
    for row in mu.dist:
        lines.append(" ".join(format_rat(v) for v in row))
    if inst.free_points:
        lines += ["POINTS", " ".join(map(str, inst.free_points))]
    items = inst.cost_items()
    if items:
        lines.append("COSTS")
        lines += [f"{x} {y} {format_rat(c)}" for (x, y), c in items]
    if meta:
        lines.append("META")
        for k, v in meta.items():
            if isinstance(v, (int,)) or hasattr(v, "denominator"):
                v = format_rat(v)
            lines.append(f"{k} {v}")
    return "\n".join(lines) + "\n"


def check_names(inst: Instance) -> None:
    """Point ids must be single tokens to survive a write/read cycle."""
    for p in inst.points:
        s = str(p)
        if not s or any(ch.isspace() for ch in s) or "#" in s:
            raise InvalidInput(f"point id {p!r} cannot be written as a token")


def read_instance(path) -> InstanceFile:
    return parse_instance(Path(path).read_text())


def write_instance(path, inst: Instance, meta: Mapping | None = None) -> None:
    check_names(inst)
    Path(path).write_text(format_instance(inst, meta))


def parse_product(text: str) -> ProductFile:
    factors, nodes = [], None
    for head, lineno, body in _sections(text, PRODUCT_SECTIONS):
        if head == "FACTOR":
            edges, isolated = [], []
            for ln, line in body:
                toks = _tokens(line)
                if len(toks) == 2:
                    edges.append((toks[0][0], toks[1][0]))
                elif len(toks) == 1:
                    isolated.append(toks[0][0])
                else:
                    raise ParseError("factor lines are 'u v'", ln, toks[-1][1])
            if not edges and not isolated:
                raise ParseError("empty factor", lineno, 1)
            order = []
            for u, v in edges:
                order += [w for w in (u, v) if w not in order]
            order += [w for w in isolated if w not in order]
            factors.append(Graph.from_edges(edges, nodes=order))
        else:
            if nodes is not None:
                raise ParseError("duplicate NODES section", lineno, 1)
            nodes = []
            for ln, line in body:
                for tok, col in _tokens(line):
                    parts = tuple(tok.split(","))
                    nodes.append((parts, ln, col))
    if not factors:
        raise ParseError("no FACTOR sections")
    if nodes is not None:
        out = []
        for parts, ln, col in nodes:
            if len(parts) != len(factors):
                raise ParseError(f"node {','.join(parts)!r} has {len(parts)} coordinates", ln, col)
            for f, p in zip(factors, parts):
                if p not in f.index:
                    raise ParseError(f"unknown factor node {p!r}", ln, col)
            out.append(parts)
        nodes = tuple(out)
    return ProductFile(tuple(factors), nodes)


def format_product(factors, nodes=None) -> str:
    lines = []
    for f in factors:
        lines.append("FACTOR")
        covered = set()
        for e in sorted(f.edges, key=lambda e: sorted(f.index[v] for v in e)):
            u, v = sorted(e, key=f.index.__getitem__)
            lines.append(f"{u} {v}")
            covered |= {u, v}
        lines += [str(v) for v in f.nodes if v not in covered]
    if nodes is not None:
        lines.append("NODES")
        lines += [",".join(map(str, z)) for z in nodes]
    return "\n".join(lines) + "\n"


def read_product(path) -> ProductFile:
    return parse_product(Path(path).read_text())
