"""0-extension solvers: exhaustive oracle, min cut, median cut uncrossing,
orbit shrinking and the orbit-uncrossing pipeline."""

from __future__ import annotations

import itertools
import math
import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .exceptions import BudgetExceeded, IterationOverflow, NonTermination, NotApplicable, NotMedian
from .instance import Instance, ZeroExtension, check_assignment, terminal_cost, zero_extension_cost
from .metric import as_rat, path_metric

DEFAULT_BUDGET = 2_000_000


def default_budget() -> int:
    raw = os.environ.get("ZEROEXT_BUDGET")
    return int(float(raw)) if raw else DEFAULT_BUDGET


# --------------------------------------------------------------------------
# exhaustive minimization


class _Objective:
    """Cost split into a constant, unary terms per free point and free-free pairs."""

    def __init__(self, inst: Instance):
        mu = inst.metric
        self.inst = inst
        self.terminals = mu.points
        self.free = inst.free_points
        fpos = {x: i for i, x in enumerate(self.free)}
        n_t = len(self.terminals)
        self.unary = [[0] * n_t for _ in self.free]
        self.pairs = []
        self.const = terminal_cost(inst)
        d = mu.dist
        for (x, y), c in inst.cost_items():
            if x in fpos and y in fpos:
                self.pairs.append((fpos[x], fpos[y], c))
            elif x in fpos or y in fpos:
                f, t = (x, y) if x in fpos else (y, x)
                row = d[mu.idx(t)]
                u = self.unary[fpos[f]]
                for k in range(n_t):
                    u[k] += c * row[k]

    def domains(self, pins: Mapping | None = None) -> list[list[int]]:
        mu = self.inst.metric
        doms = []
        for x in self.free:
            if pins and x in pins:
                doms.append([mu.idx(pins[x])])
            else:
                doms.append(list(range(len(self.terminals))))
        return doms

    def value(self, labels) -> object:
        d = self.inst.metric.dist
        total = self.const
        for i, k in enumerate(labels):
            total += self.unary[i][k]
        for i, j, c in self.pairs:
            total += c * d[labels[i]][labels[j]]
        return total


def _enumerate(obj: _Objective, doms):
    """Lexicographic scan; returns (value, first optimal labels, optimum count)."""
    best, arg, count = None, None, 0
    for labels in itertools.product(*doms):
        v = obj.value(labels)
        if best is None or v < best:
            best, arg, count = v, labels, 1
        elif v == best:
            count += 1
    return best, arg, count


def _eliminate(obj: _Objective, doms, budget: int):
    """Exact min-sum variable elimination over the free-free interaction graph.

    Factors are tables ``(scope, {labels: (value, count)})``; counts track the
    number of optimal completions.  Returns (value, labels, optimum count).
    """
    d = obj.inst.metric.dist
    n = len(obj.free)
    factors = []
    for i in range(n):
        factors.append(((i,), {(k,): (obj.unary[i][k], 1) for k in doms[i]}))
    pair_cost = {}
    for i, j, c in obj.pairs:
        key = (min(i, j), max(i, j))
        pair_cost[key] = pair_cost.get(key, 0) + c
    for (i, j), c in pair_cost.items():
        factors.append(((i, j), {(a, b): (c * d[a][b], 1) for a in doms[i] for b in doms[j]}))
    remaining = set(range(n))
    work = 0
    trace = []
    while remaining:
        def scope_of(v):
            s = set()
            for sc, _ in factors:
                if v in sc:
                    s.update(sc)
            s.discard(v)
            return s

        v = min(remaining, key=lambda u: (math.prod(len(doms[w]) for w in scope_of(u)), u))
        scope = sorted(scope_of(v))
        work += math.prod(len(doms[w]) for w in scope) * len(doms[v])
        if work > budget:
            raise BudgetExceeded(f"elimination work exceeds budget {budget}")
        touching = [f for f in factors if v in f[0]]
        factors = [f for f in factors if v not in f[0]]
        table = {}
        argmin = {}
        for ctx in itertools.product(*(doms[w] for w in scope)):
            assign = dict(zip(scope, ctx))
            best, cnt, arg = None, 0, None
            for k in doms[v]:
                assign[v] = k
                val, c = 0, 1
                for sc, tab in touching:
                    fv, fc = tab[tuple(assign[w] for w in sc)]
                    val += fv
                    c *= fc
                if best is None or val < best:
                    best, cnt, arg = val, c, k
                elif val == best:
                    cnt += c
            table[ctx] = (best, cnt)
            argmin[ctx] = arg
        factors.append((tuple(scope), table))
        trace.append((v, scope, argmin))
        remaining.discard(v)
    value, count = obj.const, 1
    for sc, tab in factors:
        fv, fc = tab[()]
        value += fv
        count *= fc
    labels = [None] * n
    for v, scope, argmin in reversed(trace):
        labels[v] = argmin[tuple(labels[w] for w in scope)]
    return value, tuple(labels), count


@dataclass(frozen=True)
class Minimum:
    value: object
    assignment: ZeroExtension
    count: int
    method: str


def exact_minimum(inst: Instance, pins: Mapping | None = None, budget: int | None = None,
                  method: str = "auto") -> Minimum:
    """Exact optimum over 0-extensions honouring ``pins`` (free point -> terminal).

    ``method="auto"`` scans assignments lexicographically when their count
    fits the budget and falls back to variable elimination otherwise; both
    report the number of optima.
    """
    if method not in ("auto", "enumeration", "elimination"):
        raise ValueError(f"unknown method {method!r}")
    budget = default_budget() if budget is None else budget
    obj = _Objective(inst)
    doms = obj.domains(pins)
    size = math.prod(len(dm) for dm in doms)
    if method == "enumeration" and size > budget:
        raise BudgetExceeded(f"{size} assignments exceed the budget {budget}")
    if method == "enumeration" or (method == "auto" and size <= budget):
        value, labels, count = _enumerate(obj, doms)
        method = "enumeration"
    else:
        value, labels, count = _eliminate(obj, doms, budget)
        method = "elimination"
    terms = obj.terminals
    assign = {t: t for t in terms}
    assign.update({x: terms[k] for x, k in zip(obj.free, labels)})
    return Minimum(as_rat(value), ZeroExtension(assign, {"method": method}), count, method)


def brute_force(inst: Instance, budget: int | None = None) -> tuple[object, ZeroExtension]:
    """Exact optimum by scanning all |T|^|V-T| assignments in lexicographic order."""
    budget = default_budget() if budget is None else budget
    obj = _Objective(inst)
    size = len(obj.terminals) ** len(obj.free)
    if size > budget:
        raise BudgetExceeded(f"{size} assignments exceed the budget {budget}")
    value, labels, count = _enumerate(obj, obj.domains())
    terms = obj.terminals
    assign = {t: t for t in terms}
    assign.update({x: terms[k] for x, k in zip(obj.free, labels)})
    return as_rat(value), ZeroExtension(assign, {"optima": count, "assignments": size})


def all_optima(inst: Instance, budget: int | None = None) -> tuple[object, list[dict]]:
    """Every optimal assignment (enumeration only)."""
    budget = default_budget() if budget is None else budget
    obj = _Objective(inst)
    size = len(obj.terminals) ** len(obj.free)
    if size > budget:
        raise BudgetExceeded(f"{size} assignments exceed the budget {budget}")
    best, out = None, []
    for labels in itertools.product(*obj.domains()):
        v = obj.value(labels)
        if best is None or v < best:
            best, out = v, [labels]
        elif v == best:
            out.append(labels)
    terms = obj.terminals
    result = []
    for labels in out:
        a = {t: t for t in terms}
        a.update({x: terms[k] for x, k in zip(obj.free, labels)})
        result.append(a)
    return as_rat(best), result


# --------------------------------------------------------------------------
# minimum cuts


@dataclass(frozen=True)
class Cut:
    """``side[v]`` is 0 for the source side and 1 otherwise."""

    side: Mapping
    value: object

    def source_side(self) -> frozenset:
        return frozenset(v for v, s in self.side.items() if s == 0)


def min_cut(points: Iterable, costs: Mapping, sources: Iterable, sinks: Iterable) -> Cut:
    """Minimum-weight cut with ``sources`` on side 0 and ``sinks`` on side 1.

    ``costs`` maps unordered pairs (2-tuples or frozensets) to nonnegative
    rationals.  Edmonds-Karp on integer capacities (scaled by the common
    denominator); the source side is the residual-reachable set, i.e. the
    inclusion-minimal minimum cut.
    """
    points = list(points)
    sources, sinks = set(sources), set(sinks)
    if not sources or not sinks or sources & sinks:
        raise ValueError("sources and sinks must be disjoint and nonempty")
    pos = {p: i for i, p in enumerate(points)}
    n = len(points)
    s, t = n, n + 1
    weights = {}
    for key, c in costs.items():
        x, y = tuple(key)
        c = as_rat(c)
        if c:
            weights[(x, y)] = weights.get((x, y), 0) + c
    den = 1
    for c in weights.values():
        if isinstance(c, Fraction):
            den = den * c.denominator // math.gcd(den, c.denominator)
    cap = [dict() for _ in range(n + 2)]

    def add(u, v, c):
        cap[u][v] = cap[u].get(v, 0) + c
        cap[v].setdefault(u, 0)

    big = sum(int(c * den) for c in weights.values()) + 1
    for (x, y), c in weights.items():
        c = int(c * den)
        add(pos[x], pos[y], c)
        add(pos[y], pos[x], c)
    for a in sources:
        add(s, pos[a], big)
    for b in sinks:
        add(pos[b], t, big)
    flow = 0
    while True:
        parent = {s: None}
        queue = deque([s])
        while queue and t not in parent:
            u = queue.popleft()
            for v, c in sorted(cap[u].items()):
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            break
        bottleneck, v = None, t
        while parent[v] is not None:
            u = parent[v]
            bottleneck = cap[u][v] if bottleneck is None else min(bottleneck, cap[u][v])
            v = u
        v = t
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
            v = u
        flow += bottleneck
    side = {p: (0 if pos[p] in parent else 1) for p in points}
    return Cut(side, as_rat(Fraction(flow, den)))


def cut_value(costs: Mapping, side: Mapping):
    total = 0
    for key, c in costs.items():
        x, y = tuple(key)
        if side[x] != side[y]:
            total += c
    return as_rat(total)


# --------------------------------------------------------------------------
# medians: cut uncrossing


def _random_optimal_cut(points, costs, a0, a1, rng, budget):
    free = [p for p in points if p not in a0 and p not in a1]
    if 2 ** len(free) > budget:
        raise BudgetExceeded("too many free points to list all minimum cuts")
    best, cuts = None, []
    for bits in itertools.product((0, 1), repeat=len(free)):
        side = {p: 0 for p in a0}
        side.update({p: 1 for p in a1})
        side.update(zip(free, bits))
        v = cut_value(costs, side)
        if best is None or v < best:
            best, cuts = v, [side]
        elif v == best:
            cuts.append(side)
    side = rng.choice(cuts)
    return Cut(side, best)


def solve_median(inst: Instance, rng=None, budget: int | None = None) -> ZeroExtension:
    """Optimal 0-extension for a median metric by uncrossing orbit cuts.

    One minimum cut per orbit separates the two halves of the orbit's
    terminal split.  While two chosen sides with disjoint terminal parts
    share a free point, both lose their intersection.  Each free point then
    sits in exactly one side per orbit, and the sides meet in one terminal.
    """
    from .modular import classify, orbit_decomposition

    if not classify(inst.metric).is_median:
        raise NotMedian("metric is not median")
    dec = orbit_decomposition(inst.metric)
    points = inst.points
    costs = inst.costs
    sides = []  # per orbit: [set containing block 0, set containing block 1]
    halves = []  # per orbit: the two terminal blocks
    for i, g in enumerate(dec.orbit_graphs):
        t0, t1 = g.nodes
        a0, a1 = dec.partitions[i][t0], dec.partitions[i][t1]
        if rng is None:
            cut = min_cut(points, costs, a0, a1)
        else:
            cut = _random_optimal_cut(points, costs, a0, a1, rng, budget or default_budget())
        x0 = set(cut.source_side())
        sides.append([x0, set(points) - x0])
        halves.append((a0, a1))
    k = dec.k
    replacements = 0
    limit = len(inst.terminals) ** 2 * len(points)
    while True:
        found = None
        for i, a, j, b in itertools.product(range(k), (0, 1), range(k), (0, 1)):
            if (j, b) <= (i, a) or i == j:
                continue
            if halves[i][a] & halves[j][b]:
                continue
            if sides[i][a] & sides[j][b]:
                found = (i, a, j, b)
                break
        if found is None:
            break
        i, a, j, b = found
        common = sides[i][a] & sides[j][b]
        sides[i][a] -= common
        sides[j][b] -= common
        sides[i][1 - a] |= common
        sides[j][1 - b] |= common
        replacements += 1
        if replacements > limit:
            raise IterationOverflow("cut uncrossing exceeded its replacement bound")
    assign = {}
    for x in points:
        cand = set(inst.terminals)
        for i in range(k):
            a = 0 if x in sides[i][0] else 1
            cand &= halves[i][a]
        if len(cand) != 1:
            raise IterationOverflow(f"sides of {x!r} do not meet in a single terminal")
        assign[x] = cand.pop()
    cut_total = sum(h * cut_value(costs, {p: (0 if p in sides[i][0] else 1) for p in points})
                    for i, h in enumerate(dec.weights))
    z = ZeroExtension(assign, {"replacements": replacements, "bound": limit, "cut_total": as_rat(cut_total)})
    return z


# --------------------------------------------------------------------------
# orbit shrinking and the orbit-uncrossing pipeline


def shrink_orbit_instance(inst: Instance, dec, i: int) -> Instance:
    """Instance over the orbit graph's path metric with each terminal block
    shrunk to its orbit-graph node and costs summed accordingly."""
    g = dec.orbit_graphs[i]
    block = dec._block_index[i]
    mu_i = path_metric(g)
    costs = {}
    for (x, y), c in inst.cost_items():
        a, b = block.get(x, x), block.get(y, y)
        if a == b:
            continue
        key = (a, b)
        costs[key] = costs.get(key, 0) + c
    return Instance.build(mu_i, inst.free_points, costs)


def _solve_orbit_subproblem(sub: Instance) -> ZeroExtension:
    g_nodes = sub.terminals
    if len(g_nodes) == 2:
        t0, t1 = g_nodes
        cut = min_cut(sub.points, sub.costs, [t0], [t1])
        return ZeroExtension({p: (t0 if cut.side[p] == 0 else t1) for p in sub.points}, {"method": "min_cut"})
    from .lp import solve_minimizable

    return solve_minimizable(sub)


@lru_cache(maxsize=32)
def _pipeline_data(mu):
    from .modular import canonical_embedding, orbit_decomposition
    from .retraction import PairRetractions, ProductSubgraph

    dec = orbit_decomposition(mu)
    emb = canonical_embedding(dec)
    ps = ProductSubgraph(dec.orbit_graphs, frozenset(emb.phi.values()))
    pairs = PairRetractions(ps)
    for i, j in pairs.projections:
        pairs.gamma(i, j)
    return dec, emb, ps, pairs


def solve_orbit_uncrossing(inst: Instance, rng=None, budget: int | None = None) -> ZeroExtension:
    """Optimal 0-extension via per-orbit solves and lifted pairwise retractions.

    With ``rng`` given, each orbit subproblem's solution is drawn uniformly
    from all its optimal 0-extensions (listed exhaustively), which exercises
    the uncrossing loop far more than the canonical solvers do.

    ``info`` records the per-orbit optimal values, the uncrossing steps, the
    potential (sum over points of product distance to the terminal image)
    after each step, and the iteration bound.
    """
    from .modular import classify
    from .retraction import uncross

    if not classify(inst.metric).theorem3_applicable:
        raise NotApplicable("orbit uncrossing needs frame orbit graphs matching some layer")
    dec, emb, ps, pairs = _pipeline_data(inst.metric)
    points = inst.points
    per_orbit = []
    orbit_values = []
    for i in range(dec.k):
        sub = shrink_orbit_instance(inst, dec, i)
        if rng is None:
            z = _solve_orbit_subproblem(sub)
        else:
            _, optima = all_optima(sub, budget)
            z = ZeroExtension(rng.choice(optima))
        orbit_values.append(zero_extension_cost(sub, z))
        block = dec._block_index[i]
        per_orbit.append({p: (block[p] if p in block else z.assign[p]) for p in points})
    config = {p: tuple(per_orbit[i][p] for i in range(dec.k)) for p in points}
    limit = len(inst.terminals) ** 2 * len(points)
    try:
        run = uncross(config, pairs, points, limit)
    except NonTermination as exc:
        raise IterationOverflow(str(exc)) from None
    config = run.config
    assign = {}
    for p in points:
        z = config[p]
        if z not in emb.inverse:
            raise IterationOverflow(f"point {p!r} ended outside the embedded graph")
        assign[p] = emb.inverse[z]
    check_assignment(inst, assign)
    info = {
        "orbit_values": tuple(orbit_values),
        "weighted_sum": as_rat(sum(h * v for h, v in zip(dec.weights, orbit_values))),
        "steps": tuple(run.steps),
        "potentials": tuple(run.potentials),
        "stalls": run.stalls,
        "bound": limit,
    }
    return ZeroExtension(assign, info)
