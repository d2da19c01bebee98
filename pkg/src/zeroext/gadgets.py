"""Hardness gadgets for non-modular metrics and for modular metrics whose
underlying graph admits no orientation, with exact verification of the
four-pin property:

* pinning ``x -> s, y -> t`` or ``x -> t, y -> s`` costs ``tau_hat`` (the
  unpinned optimum),
* pinning both to ``s`` or both to ``t`` costs ``tau_hat + delta``, ``delta > 0``,
* every other pinning of ``x, y`` costs at least ``tau_hat + delta``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .exceptions import Modular, NotModular, Orientable, PropertyViolated
from .instance import Instance
from .metric import FiniteMetric, as_rat, between, interval, underlying_graph
from .modular import Orientation, is_modular, medianless_triples, orient
from .solvers import exact_minimum

MAX_ESCALATIONS = 12


@dataclass(frozen=True)
class Gadget:
    """A weighted instance with four distinguished points.

    ``weights`` holds the scale factors (``N`` or ``N1``, ``N2``, ``N3``) and
    ``constants`` the derived numbers used to predict ``tau_hat`` and ``delta``.
    ``groups`` maps a group name to its ``{(u, v): cost}`` edges before scaling.
    """

    kind: str
    instance: Instance
    s: object
    t: object
    x: object
    y: object
    tau_hat: object
    delta: object
    weights: Mapping
    constants: Mapping = field(default_factory=dict)
    groups: Mapping = field(default_factory=dict)
    circuit: tuple = ()

    def meta(self) -> dict:
        out = {"kind": self.kind, "s": self.s, "t": self.t, "x": self.x, "y": self.y,
               "tau_hat": self.tau_hat, "delta": self.delta}
        out.update(self.weights)
        return out


@dataclass
class GadgetReport:
    holds: bool
    tau: object
    tau_hat: object
    delta: object
    table: dict
    optima: int
    violations: list

    def as_dict(self) -> dict:
        from .metric import format_rat
        return {
            "holds": self.holds,
            "tau": format_rat(self.tau),
            "tau_hat": format_rat(self.tau_hat),
            "delta": format_rat(self.delta),
            "optima": self.optima,
            "table": {f"{a},{b}": format_rat(v) for (a, b), v in self.table.items()},
            "violations": [list(map(str, v)) for v in self.violations],
        }


def pinned_tau(inst: Instance, pins: Mapping | None = None, budget: int | None = None,
               method: str = "auto"):
    """Minimum cost over 0-extensions sending each pinned free point to its terminal."""
    return exact_minimum(inst, pins, budget, method=method).value


def _fresh_names(taken, prefix: str, n: int) -> list[str]:
    taken = {str(p) for p in taken}
    while any(f"{prefix}{j}" in taken for j in range(n)):
        prefix = "_" + prefix
    return [f"{prefix}{j}" for j in range(n)]


def _accumulate(costs: dict, u, v, c):
    key = frozenset((u, v))
    costs[key] = costs.get(key, 0) + c


# --------------------------------------------------------------------------
# twist gadget


def twist_sequence(mu: FiniteMetric):
    """The twist of H(mu) as ``(s_0..s_{2k-1}, k)`` with ``s_{i+k} = t_i``."""
    h, _ = underlying_graph(mu)
    res = orient(h)
    if isinstance(res, Orientation):
        raise Orientable("underlying graph is orientable")
    k = res.k
    s = [res.steps[i][0] for i in range(k)] + [res.steps[i][1] for i in range(k)]
    return s, k


def gadget_nonorientable(mu: FiniteMetric, n: int | None = None) -> Gadget:
    if not is_modular(mu):
        raise NotModular("twist gadget needs a modular metric")
    s, k = twist_sequence(mu)
    h = mu(s[0], s[k])
    f = [mu(s[i], s[i + 1]) for i in range(k)]
    if n is None:
        n = 1 + 2 * k * mu.max_distance()
    z = _fresh_names(mu.points, "z", 2 * k)
    heavy, circuit = {}, {}
    for i in range(2 * k):
        _accumulate(heavy, z[i], s[i], 1)
        _accumulate(heavy, z[i], s[(i + k) % (2 * k)], 1)
        _accumulate(circuit, z[i], z[(i + 1) % (2 * k)], 1)
    costs = {e: n * c for e, c in heavy.items()}
    for e, c in circuit.items():
        costs[e] = costs.get(e, 0) + c
    inst = Instance.build(mu, z, {tuple(e): c for e, c in costs.items()})
    return Gadget(
        kind="nonorientable", instance=inst, s=s[0], t=s[k], x=z[0], y=z[k],
        tau_hat=as_rat(2 * k * h * n + 2 * sum(f)), delta=as_rat(2 * h),
        weights={"N": n},
        constants={"k": k, "h": h, "f": tuple(f), "twist": tuple(s)},
        groups={"heavy": heavy, "circuit": circuit}, circuit=tuple(z),
    )


# --------------------------------------------------------------------------
# medianless-triple gadget


def medianless_triple(mu: FiniteMetric) -> tuple:
    """Lexicographically first medianless triple of minimum perimeter."""
    triples = medianless_triples(mu)
    if not triples:
        raise Modular("metric is modular")
    return min(triples, key=lambda q: (mu(q[0], q[1]) + mu(q[1], q[2]) + mu(q[0], q[2]),
                                       tuple(mu.idx(p) for p in q)))


@dataclass(frozen=True)
class TripleConstants:
    s: tuple
    d: tuple
    h: tuple
    a: tuple
    rho: object
    alpha: object


def triple_constants(mu: FiniteMetric, triple) -> TripleConstants:
    s = tuple(triple)
    d = tuple(mu(s[(i - 1) % 3], s[(i + 1) % 3]) for i in range(3))
    h = tuple(as_rat(Fraction(d[(i - 1) % 3] + d[(i + 1) % 3] - d[i], 2)) for i in range(3))
    a = tuple(as_rat(Fraction(d[(i - 1) % 3] + d[(i + 1) % 3] - d[i], d[(i - 1) % 3] * d[(i + 1) % 3]))
              for i in range(3))
    rho = as_rat(2 * (h[0] * h[1] + h[1] * h[2] + h[2] * h[0]))
    alpha = as_rat(2 * min(x * x for x in h))
    return TripleConstants(s, d, h, a, rho, alpha)


def triple_intervals(mu: FiniteMetric, s) -> list[frozenset]:
    """``I_j`` between ``s_{j-1}`` and ``s_{j+1}`` for ``j = 0, 1, 2``."""
    return [interval(mu, s[(j - 1) % 3], s[(j + 1) % 3]) for j in range(3)]


def two_leg_violations(mu: FiniteMetric, s) -> list[tuple]:
    """Pairs ``(j, v)`` with ``v`` in ``I_j`` reachable from ``s_j`` by neither
    two-leg path through ``s_{j-1}`` or ``s_{j+1}`` at shortest length."""
    bad = []
    for j, ij in enumerate(triple_intervals(mu, s)):
        for v in ij:
            if not (between(mu, s[j], s[(j - 1) % 3], v) or between(mu, s[j], s[(j + 1) % 3], v)):
                bad.append((j, v))
    return bad


def interior_sigmas(mu: FiniteMetric, consts: TripleConstants) -> list[tuple]:
    """``(j, v, sigma)`` for every point strictly inside some ``I_j``."""
    s = consts.s
    out = []
    for j, ij in enumerate(triple_intervals(mu, s)):
        for v in mu.points:
            if v in ij and v not in (s[(j - 1) % 3], s[(j + 1) % 3]):
                sigma = as_rat(sum(consts.a[i] * mu(s[i], v) for i in range(3)))
                out.append((j, v, sigma))
    return out


def _smallest_excess(mu: FiniteMetric, s) -> object:
    """Least positive value of ``mu(s_{j-1}, v) + mu(v, s_{j+1}) - d_j``."""
    best = None
    for j in range(3):
        a, b = s[(j - 1) % 3], s[(j + 1) % 3]
        for v in mu.points:
            e = mu(a, v) + mu(v, b) - mu(a, b)
            if e > 0 and (best is None or e < best):
                best = e
    return best if best is not None else 1


def _nonmodular_scales(mu: FiniteMetric, consts: TripleConstants) -> tuple[int, int]:
    need = consts.rho + consts.alpha
    sig = interior_sigmas(mu, consts)
    if sig:
        margin = min(x for _, _, x in sig) - 2
        n2 = 1 + math.ceil(need / margin)
    else:
        n2 = 1
    n3 = 1 + math.ceil((12 * n2 + need) / _smallest_excess(mu, consts.s))
    return n2, n3


def _build_nonmodular(mu, consts: TripleConstants, n2, n3) -> Gadget:
    s = consts.s
    z = _fresh_names(mu.points, "z", 6)
    e1, e2, e3 = {}, {}, {}
    for j in range(6):
        _accumulate(e3, z[j], s[(j - 1) % 3], 1)
        _accumulate(e3, z[j], s[(j + 1) % 3], 1)
        for i in range(3):
            _accumulate(e2, z[j], s[i], consts.a[i])
    for j in range(3):
        _accumulate(e1, z[j], z[j + 1], consts.h[(j - 1) % 3])
        _accumulate(e1, z[j + 3], z[(j + 4) % 6], consts.h[(j - 1) % 3])
    costs = {}
    for group, scale in ((e1, 1), (e2, n2), (e3, n3)):
        for e, c in group.items():
            costs[e] = costs.get(e, 0) + scale * c
    inst = Instance.build(mu, z, {tuple(e): c for e, c in costs.items()})
    tau_hat = as_rat(n3 * 2 * sum(consts.d) + n2 * 12 + consts.rho)
    return Gadget(
        kind="nonmodular", instance=inst, s=s[0], t=s[2], x=z[1], y=z[4],
        tau_hat=tau_hat, delta=consts.alpha,
        weights={"N1": 1, "N2": n2, "N3": n3},
        constants={"triple": s, "d": consts.d, "h": consts.h, "a": consts.a,
                   "rho": consts.rho, "alpha": consts.alpha},
        groups={"E1": e1, "E2": e2, "E3": e3}, circuit=tuple(z),
    )


def gadget_nonmodular(mu: FiniteMetric, n2: int | None = None, n3: int | None = None,
                      escalate: bool = True, budget: int | None = None) -> Gadget:
    """Six-point gadget over the chosen medianless triple.

    Default scales come from the interior-point margin and the smallest
    positive interval excess; with ``escalate`` both are doubled until the
    exact check passes.
    """
    triple = medianless_triple(mu)
    consts = triple_constants(mu, triple)
    auto2, auto3 = _nonmodular_scales(mu, consts)
    n2 = auto2 if n2 is None else n2
    n3 = auto3 if n3 is None else n3
    g = _build_nonmodular(mu, consts, n2, n3)
    if not escalate:
        return g
    for _ in range(MAX_ESCALATIONS):
        if verify_gadget(g, budget=budget, strict=False).holds:
            return g
        n2, n3 = 2 * n2, 2 * n3
        g = _build_nonmodular(mu, consts, n2, n3)
    verify_gadget(g, budget=budget, strict=True)
    return g


def gamma_pair(g: Gadget) -> tuple[dict, dict]:
    """The two optimal circuit mappings ``gamma_1`` and ``gamma_2``."""
    z = g.circuit
    if g.kind == "nonorientable":
        s = g.constants["twist"]
        k = g.constants["k"]
        return ({z[i]: s[i] for i in range(2 * k)},
                {z[i]: s[(i + k) % (2 * k)] for i in range(2 * k)})
    s = g.constants["triple"]
    g1 = {z[j]: s[(j + 1) % 3] if j % 2 == 0 else s[(j - 1) % 3] for j in range(6)}
    g2 = {z[j]: g1[z[(j + 3) % 6]] for j in range(6)}
    return g1, g2


def circuit_cost(g: Gadget, gamma: Mapping):
    """Contribution of the light circuit edges under ``gamma``."""
    mu = g.instance.metric
    group = g.groups["E1" if g.kind == "nonmodular" else "circuit"]
    return as_rat(sum(c * mu(gamma[u], gamma[v]) for (u, v), c in
                      ((tuple(e), c) for e, c in group.items())))


def feasible_mappings(g: Gadget) -> list[dict]:
    """All 64 maps sending each ``z_j`` to ``s_{j-1}`` or ``s_{j+1}``."""
    if g.kind != "nonmodular":
        raise ValueError("feasible mappings are defined for the triple gadget")
    s = g.constants["triple"]
    z = g.circuit
    out = []
    for bits in itertools.product((0, 1), repeat=6):
        out.append({z[j]: s[(j - 1) % 3] if b == 0 else s[(j + 1) % 3] for j, b in enumerate(bits)})
    return out


# --------------------------------------------------------------------------
# verification


def verify_gadget(g: Gadget, budget: int | None = None, strict: bool = True) -> GadgetReport:
    """Compute every ``(x, y)`` pinning exactly and check the four-pin property.

    Raises ``PropertyViolated`` with the offending pinning when ``strict``.
    """
    inst = g.instance
    terms = inst.terminals
    best = exact_minimum(inst, None, budget, method="elimination")
    table = {}
    for a, b in itertools.product(terms, repeat=2):
        table[(a, b)] = pinned_tau(inst, {g.x: a, g.y: b}, budget, method="elimination")
    s, t = g.s, g.t
    violations = []
    if not g.delta > 0:
        violations.append(("delta", g.delta))
    if best.value != g.tau_hat:
        violations.append(("tau", best.value, g.tau_hat))
    for pin in ((s, t), (t, s)):
        if table[pin] != g.tau_hat:
            violations.append(("cross", pin, table[pin]))
    for pin in ((s, s), (t, t)):
        if table[pin] != g.tau_hat + g.delta:
            violations.append(("same", pin, table[pin]))
    for pin, v in table.items():
        if pin not in ((s, t), (t, s), (s, s), (t, t)) and v < g.tau_hat + g.delta:
            violations.append(("other", pin, v))
    report = GadgetReport(not violations, best.value, g.tau_hat, g.delta, table, best.count, violations)
    if strict and violations:
        raise PropertyViolated(f"gadget check failed: {violations[0]}", witness=violations[0])
    return report
