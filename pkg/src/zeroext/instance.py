"""Problem instances and 0-extensions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .exceptions import InvalidInput, UnknownPoint
from .metric import FiniteMetric, as_rat


@dataclass(frozen=True)
class Instance:
    """Terminal metric on T, a point list V containing T, and pair costs.

    ``costs`` is keyed by frozenset pairs; absent pairs cost zero.
    """

    metric: FiniteMetric
    points: tuple
    costs: Mapping = field(hash=False)

    @classmethod
    def build(cls, metric: FiniteMetric, free=(), costs: Mapping | None = None) -> "Instance":
        """Terminals of ``metric`` followed by ``free``; costs as ``{(x, y): c}``."""
        free = tuple(free)
        points = tuple(metric.points) + tuple(p for p in free if p not in metric.index)
        if len(set(points)) != len(points):
            raise InvalidInput("duplicate point ids")
        known = set(points)
        table = {}
        for key, value in (costs or {}).items():
            x, y = tuple(key)
            if x not in known:
                raise UnknownPoint(f"unknown point {x!r}")
            if y not in known:
                raise UnknownPoint(f"unknown point {y!r}")
            if x == y:
                raise InvalidInput(f"cost on a loop at {x!r}")
            c = as_rat(value)
            if c < 0:
                raise InvalidInput(f"negative cost on ({x!r}, {y!r})")
            e = frozenset((x, y))
            table[e] = table.get(e, 0) + c
        table = {e: c for e, c in table.items() if c != 0}
        return cls(metric, points, table)

    @property
    def terminals(self) -> tuple:
        return self.metric.points

    @property
    def free_points(self) -> tuple:
        return self.points[len(self.metric.points):]

    def cost(self, x, y):
        return self.costs.get(frozenset((x, y)), 0)

    def cost_items(self):
        """``((x, y), c)`` for nonzero costs, in point order."""
        pos = {p: i for i, p in enumerate(self.points)}
        out = []
        for e, c in self.costs.items():
            x, y = sorted(e, key=pos.__getitem__)
            out.append(((x, y), c))
        out.sort(key=lambda item: (pos[item[0][0]], pos[item[0][1]]))
        return out

    def __hash__(self):
        return hash((self.metric, self.points, frozenset(self.costs.items())))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.metric == other.metric and self.points == other.points
                and dict(self.costs) == dict(other.costs))


@dataclass(frozen=True)
class ZeroExtension:
    """An assignment V -> T fixing every terminal; ``info`` holds solver stats."""

    assign: Mapping
    info: Mapping = field(default_factory=dict, compare=False, hash=False)

    def __getitem__(self, x):
        return self.assign[x]

    def induced_metric(self, inst: Instance) -> FiniteMetric:
        mu = inst.metric
        return FiniteMetric.from_function(
            inst.points, lambda x, y: mu(self.assign[x], self.assign[y]), validate=False)


def check_assignment(inst: Instance, assign: Mapping) -> None:
    for p in inst.points:
        if p not in assign:
            raise InvalidInput(f"assignment misses point {p!r}")
        if assign[p] not in inst.metric.index:
            raise InvalidInput(f"{p!r} assigned to non-terminal {assign[p]!r}")
    for t in inst.terminals:
        if assign[t] != t:
            raise InvalidInput(f"terminal {t!r} is not fixed")


def zero_extension_cost(inst: Instance, z: ZeroExtension | Mapping):
    """Total cost ``sum c(xy) * mu(assign(x), assign(y))``."""
    assign = z.assign if isinstance(z, ZeroExtension) else z
    check_assignment(inst, assign)
    mu = inst.metric
    return as_rat(sum(c * mu(assign[x], assign[y]) for (x, y), c in inst.cost_items()))


def terminal_cost(inst: Instance):
    """Cost of the terminal pairs alone (fixed in every 0-extension)."""
    mu = inst.metric
    return as_rat(sum(c * mu(x, y) for (x, y), c in inst.cost_items()
                      if x in mu.index and y in mu.index))
