"""Exact rational linear programming and the metric extension relaxation.

The simplex core works on an integer tableau with fraction-free (Bareiss)
pivoting: every entry is the true tableau value times the current basis
determinant, so all arithmetic stays in Python integers.  Bland's rule
picks entering and leaving variables, which rules out cycling and makes the
result deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from .exceptions import Infeasible, InvalidInput, NoPinPossible, NotMinimizable, Unbounded
from .instance import Instance, ZeroExtension, zero_extension_cost
from .metric import FiniteMetric, as_rat

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = {LE, EQ, GE, "<", ">", "="}


@dataclass(frozen=True)
class LinearProgram:
    """Minimize ``objective . x + constant`` subject to ``constraints``.

    Each constraint is ``(coeffs, relation, rhs)`` with ``coeffs`` a mapping
    from variable position to coefficient.  ``lower_bounds[j]`` is a rational
    or None for a free variable.
    """

    variables: tuple
    objective: tuple
    constraints: tuple
    lower_bounds: tuple | None = None
    constant: object = 0

    def __post_init__(self):
        n = len(self.variables)
        if len(self.objective) != n:
            raise InvalidInput("objective length does not match variable count")
        if self.lower_bounds is not None and len(self.lower_bounds) != n:
            raise InvalidInput("bounds length does not match variable count")
        for coeffs, rel, _ in self.constraints:
            if rel not in _RELATIONS:
                raise InvalidInput(f"unknown relation {rel!r}")
            if any(not 0 <= j < n for j in coeffs):
                raise InvalidInput("constraint refers to an unknown variable")

    @classmethod
    def from_named(cls, objective: Mapping, constraints: Sequence, lower_bounds: Mapping | None = None,
                   constant=0) -> "LinearProgram":
        """Build from name-keyed dicts; variables are ordered by first use."""
        names: dict = {}

        def pos(v):
            return names.setdefault(v, len(names))

        for v in objective:
            pos(v)
        rows = []
        for coeffs, rel, rhs in constraints:
            rows.append(({pos(v): as_rat(a) for v, a in coeffs.items()}, rel, as_rat(rhs)))
        variables = tuple(names)
        obj = tuple(as_rat(objective.get(v, 0)) for v in variables)
        bounds = None
        if lower_bounds is not None:
            bounds = tuple(lower_bounds.get(v, 0) for v in variables)
        return cls(variables, obj, tuple(rows), bounds, constant)


class LPSolution(NamedTuple):
    value: object
    x: dict


class _Result(NamedTuple):
    status: str
    value: object
    x: list
    slack_costs: list


# --------------------------------------------------------------------------
# integer tableau simplex


def _integer_row(values) -> tuple[list[int], int]:
    """Scale rationals by the lcm of their denominators."""
    den = 1
    for v in values:
        if isinstance(v, Fraction):
            den = den * v.denominator // math.gcd(den, v.denominator)
    return [int(v * den) for v in values], den


def _pivot(rows: list[list[int]], obj: list[int], r: int, s: int, det: int) -> int:
    pr = rows[r]
    p = pr[s]
    nz = [j for j, v in enumerate(pr) if v]
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[s]
        if f == 0:
            if p != det:
                for j in range(len(row)):
                    if row[j]:
                        row[j] = row[j] * p // det
            continue
        new = [v * p // det if v else 0 for v in row] if p != det else row
        for j in nz:
            new[j] = (row[j] * p - f * pr[j]) // det
        rows[i] = new
    f = obj[s]
    new = [v * p // det if v else 0 for v in obj]
    for j in nz:
        new[j] = (obj[j] * p - f * pr[j]) // det
    obj[:] = new
    return p


def _bland(rows, obj, basis, det, allowed) -> str:
    rhs = len(obj) - 1
    while True:
        s = next((j for j in allowed if obj[j] < 0), None)
        if s is None:
            return "optimal"
        r = None
        for i, row in enumerate(rows):
            a = row[s]
            if a <= 0:
                continue
            if r is None:
                r = i
                continue
            lhs = row[rhs] * rows[r][s]
            rhs_val = rows[r][rhs] * a
            if lhs < rhs_val or (lhs == rhs_val and basis[i] < basis[r]):
                r = i
        if r is None:
            return "unbounded"
        det[0] = _pivot(rows, obj, r, s, det[0])
        basis[r] = s


def simplex_min(a: Sequence[Sequence], b: Sequence, cost: Sequence) -> _Result:
    """Minimize ``cost . x`` subject to ``a x <= b`` and ``x >= 0``.

    Returns status ``optimal``, ``infeasible`` or ``unbounded``.  On
    optimality ``slack_costs[i]`` is the reduced cost of row ``i``'s slack,
    which is the optimal multiplier of the dual problem
    ``min b' u`` over ``a' u >= -cost``, ``u >= 0`` negated appropriately
    (see :func:`solve_lp` for the use made of it).
    """
    m, n = len(a), len(cost)
    flipped = [as_rat(b[i]) < 0 for i in range(m)]
    n_art = sum(flipped)
    width = n + m + n_art + 1
    rows = []
    art_col = n + m
    art_rows = []
    for i in range(m):
        sign = -1 if flipped[i] else 1
        row = [0] * width
        for j, v in enumerate(a[i]):
            if v:
                row[j] = sign * as_rat(v)
        row[n + i] = sign
        if flipped[i]:
            row[art_col] = 1
            art_rows.append((i, art_col))
            art_col += 1
        row[-1] = sign * as_rat(b[i])
        rows.append(_integer_row(row)[0])
    basis = [n + i for i in range(m)]
    for i, col in art_rows:
        basis[i] = col
    det = [1]
    rhs = width - 1

    if art_rows:
        obj = [0] * width
        for i, col in art_rows:
            obj[col] = 1
        for i, _ in art_rows:
            obj = [o - v for o, v in zip(obj, rows[i])]
        _bland(rows, obj, basis, det, range(n + m + n_art))
        if obj[rhs] != 0:
            return _Result("infeasible", None, None, None)
        # drive zero-level artificials out of the basis
        i = 0
        while i < len(rows):
            if basis[i] >= n + m:
                s = next((j for j in range(n + m) if rows[i][j]), None)
                if s is None:
                    del rows[i]
                    del basis[i]
                    continue
                p = _pivot(rows, obj, i, s, det[0])
                basis[i] = s
                if p < 0:
                    rows = [[-v for v in row] for row in rows]
                    obj[:] = [-v for v in obj]
                    p = -p
                det[0] = p
            i += 1
        for row in rows:
            del row[n + m:rhs]
        width = n + m + 1
        rhs = width - 1

    cost_row, scale = _integer_row([as_rat(c) for c in cost])
    obj = [0] * width
    for j in range(n):
        obj[j] = cost_row[j] * det[0]
    for i, bvar in enumerate(basis):
        cb = cost_row[bvar] if bvar < n else 0
        if cb:
            row = rows[i]
            obj = [o - cb * v for o, v in zip(obj, row)]
    status = _bland(rows, obj, basis, det, range(n + m))
    if status == "unbounded":
        return _Result("unbounded", None, None, None)
    d = det[0]
    x = [0] * n
    for i, bvar in enumerate(basis):
        if bvar < n:
            x[bvar] = as_rat(Fraction(rows[i][rhs], d))
    value = as_rat(Fraction(-obj[rhs], d) / scale)
    slack = [as_rat(Fraction(obj[n + i], d) / scale) for i in range(m)]
    return _Result("optimal", value, x, slack)


# --------------------------------------------------------------------------
# general LPs


def _standard_rows(lp: LinearProgram):
    """Rewrite as ``G y >= h``, ``y >= 0`` with columns mapping back to x."""
    n = len(lp.variables)
    bounds = lp.lower_bounds or (0,) * n
    columns = []  # (variable, sign)
    shift = []
    for j in range(n):
        lb = bounds[j]
        if lb is None:
            columns += [(j, 1), (j, -1)]
            shift.append(0)
        else:
            columns.append((j, 1))
            shift.append(as_rat(lb))
    col_of = {}
    for k, (j, sign) in enumerate(columns):
        col_of.setdefault(j, []).append((k, sign))
    g, h = [], []
    for coeffs, rel, rhs in lp.constraints:
        row = [0] * len(columns)
        rhs = as_rat(rhs)
        for j, a in coeffs.items():
            a = as_rat(a)
            rhs -= a * shift[j]
            for k, sign in col_of[j]:
                row[k] += sign * a
        if rel in (GE, ">", EQ, "="):
            g.append(row)
            h.append(rhs)
        if rel in (LE, "<", EQ, "="):
            g.append([-v for v in row])
            h.append(-rhs)
    cost = [0] * len(columns)
    for k, (j, sign) in enumerate(columns):
        cost[k] = sign * as_rat(lp.objective[j])
    const = as_rat(lp.constant) + sum(as_rat(c) * s for c, s in zip(lp.objective, shift))
    return g, h, cost, columns, shift, const


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Exact optimum of ``lp`` (minimization) and an optimal solution.

    The problem ``min c y, G y >= h, y >= 0`` is solved through its dual
    ``max h u, G' u <= c, u >= 0`` with the primal solution read off the dual
    tableau.  When ``c >= 0`` (always the case for extension problems) the
    dual starts feasible and no phase one is needed.
    """
    g, h, cost, columns, shift, const = _standard_rows(lp)
    ncols = len(columns)
    if not g:
        if any(c < 0 for c in cost):
            raise Unbounded("objective unbounded below")
        y = [0] * ncols
    else:
        gt = [[g[i][k] for i in range(len(g))] for k in range(ncols)]
        res = simplex_min(gt, cost, [-v for v in h])
        if res.status == "unbounded":
            raise Infeasible("constraints are infeasible")
        if res.status == "infeasible":
            feas = simplex_min([[-v for v in row] for row in g], [-v for v in h], [0] * ncols)
            if feas.status == "infeasible":
                raise Infeasible("constraints are infeasible")
            raise Unbounded("objective unbounded below")
        y = res.slack_costs
    x = list(shift)
    for k, (j, sign) in enumerate(columns):
        x[j] += sign * y[k]
    value = const + sum(as_rat(c) * v for c, v in zip(lp.objective, x)) - sum(
        as_rat(c) * s for c, s in zip(lp.objective, shift))
    return LPSolution(as_rat(value), {v: as_rat(x[j]) for j, v in enumerate(lp.variables)})


# --------------------------------------------------------------------------
# the extension relaxation


@dataclass(frozen=True)
class ExtensionRelaxation:
    instance: Instance
    lp: LinearProgram
    value: object
    metric: FiniteMetric


def extension_lp(inst: Instance) -> ExtensionRelaxation:
    """Minimum-cost metric extension of the terminal metric to all points."""
    mu = inst.metric
    points = inst.points
    n_t = len(mu.points)
    pos = {p: i for i, p in enumerate(points)}
    var_of = {}
    variables = []
    for j in range(n_t, len(points)):
        for i in range(j):
            var_of[(i, j)] = len(variables)
            variables.append((points[i], points[j]))

    def term(i, j):
        if i > j:
            i, j = j, i
        if j < n_t:
            return None, mu.dist[i][j]
        return var_of[(i, j)], 0

    constraints = []
    for i, j, k in itertools.combinations(range(len(points)), 3):
        if k < n_t:
            continue
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            # m(ab) + m(bc) - m(ac) >= 0
            coeffs: dict = {}
            rhs = 0
            for (p, q), sign in (((a, b), 1), ((b, c), 1), ((a, c), -1)):
                v, const = term(p, q)
                if v is None:
                    rhs -= sign * const
                else:
                    coeffs[v] = coeffs.get(v, 0) + sign
            coeffs = {v: s for v, s in coeffs.items() if s}
            if coeffs:
                constraints.append((coeffs, GE, rhs))
    objective = [0] * len(variables)
    constant = 0
    for (x, y), c in inst.cost_items():
        i, j = sorted((pos[x], pos[y]))
        v, const = term(i, j)
        if v is None:
            constant += c * const
        else:
            objective[v] += c
    lp = LinearProgram(tuple(variables), tuple(objective), tuple(constraints), None, constant)
    sol = solve_lp(lp)
    n = len(points)
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v, const = term(i, j)
            rows[i][j] = rows[j][i] = const if v is None else sol.x[variables[v]]
    return ExtensionRelaxation(inst, lp, sol.value, FiniteMetric(points, rows, validate=False))


def merge_points(inst: Instance, pins: Mapping) -> Instance:
    """Identify each free point ``x`` with terminal ``pins[x]``, moving its costs."""
    target = {p: pins.get(p, p) for p in inst.points}
    costs: dict = {}
    for (x, y), c in inst.cost_items():
        a, b = target[x], target[y]
        if a == b:
            continue
        costs[(a, b)] = costs.get((a, b), 0) + c
    free = [p for p in inst.free_points if p not in pins]
    return Instance.build(inst.metric, free, costs)


def solve_minimizable(inst: Instance, check: bool = True) -> ZeroExtension:
    """Optimal 0-extension for a minimizable metric by LP self-reduction.

    After each LP solve, every free point at zero LP distance from a terminal
    is pinned there at once (the LP optimum stays feasible after such a
    merge); otherwise the first free point is tried against each terminal in
    order and the first pin preserving the LP value is kept.
    """
    if check:
        from .modular import classify

        if not classify(inst.metric).is_minimizable:
            raise NotMinimizable("metric is not modular with a frame underlying graph")
    terminals = inst.terminals
    assign = {t: t for t in terminals}
    rel = extension_lp(inst)
    target = rel.value
    current = inst
    calls = 1
    while current.free_points:
        pins = {}
        for x in current.free_points:
            row = rel.metric.dist[rel.metric.idx(x)]
            t = next((t for t in terminals if row[rel.metric.idx(t)] == 0), None)
            if t is not None:
                pins[x] = t
        if pins:
            assign.update(pins)
            current = merge_points(current, pins)
            rel = ExtensionRelaxation(current, rel.lp, rel.value,
                                      rel.metric.restrict(current.points))
            continue
        x = current.free_points[0]
        for t in terminals:
            cand = merge_points(current, {x: t})
            r = extension_lp(cand)
            calls += 1
            if r.value == target:
                assign[x] = t
                current, rel = cand, r
                break
        else:
            raise NoPinPossible(f"no terminal for {x!r} keeps the LP value {target}", current, x)
    result = ZeroExtension(dict(assign), {"tau_star": target, "lp_calls": calls})
    if zero_extension_cost(inst, result) != target:
        raise NoPinPossible("self-reduction ended above the LP value", inst, None)
    return result
