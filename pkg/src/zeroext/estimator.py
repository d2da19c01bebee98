"""Method dispatch and an estimator-style facade over the solvers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator

from .instance import Instance, ZeroExtension, zero_extension_cost
from .lp import extension_lp, solve_minimizable
from .modular import classify
from .solvers import brute_force, default_budget, solve_median, solve_orbit_uncrossing
from .validation import (
    check_budget,
    check_instance,
    check_is_fitted,
    check_method,
    check_random_state,
)


@dataclass
class SolveResult:
    method: str
    tau: object
    extension: ZeroExtension
    tau_star: object = None
    oracle_tau: object = None
    seconds: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def oracle_match(self):
        return None if self.oracle_tau is None else self.oracle_tau == self.tau


def pick_method(inst: Instance) -> str:
    """Cheapest exact method whose hypotheses hold for the metric."""
    c = classify(inst.metric)
    if c.is_median:
        return "median"
    if c.is_minimizable:
        return "lp"
    if c.theorem3_applicable:
        return "orbit"
    return "oracle"


def _fits(inst: Instance, budget: int) -> bool:
    return len(inst.terminals) ** len(inst.free_points) <= budget


def solve_instance(inst: Instance, method: str = "auto", budget: int | None = None, rng=None,
                   cross_check: bool = True) -> SolveResult:
    """Solve with the named method.

    ``lp`` on a metric that is not minimizable still reports the relaxation
    value and takes the optimum from the oracle.  When the assignment count
    fits the budget the oracle value is attached for comparison.
    """
    check_method(method)
    budget = default_budget() if budget is None else budget
    if method == "auto":
        method = pick_method(inst)
    start = time.perf_counter()
    tau_star = None
    if method == "oracle":
        tau, z = brute_force(inst, budget)
    elif method == "median":
        z = solve_median(inst, rng=rng, budget=budget)
        tau = zero_extension_cost(inst, z)
    elif method == "orbit":
        z = solve_orbit_uncrossing(inst, rng=rng, budget=budget)
        tau = zero_extension_cost(inst, z)
    else:
        if classify(inst.metric).is_minimizable:
            z = solve_minimizable(inst)
            tau, tau_star = zero_extension_cost(inst, z), z.info["tau_star"]
        else:
            tau_star = extension_lp(inst).value
            tau, z = brute_force(inst, budget)
    seconds = time.perf_counter() - start
    oracle = None
    if method == "oracle":
        oracle = tau
    elif cross_check and _fits(inst, budget):
        oracle = brute_force(inst, budget)[0]
    return SolveResult(method, tau, z, tau_star, oracle, seconds, dict(z.info))


class ZeroExtensionSolver(BaseEstimator):
    """Fit on an :class:`Instance` (or an instance file path); ``predict``
    returns the terminal assigned to each requested point.

    Parameters
    ----------
    method : {"auto", "oracle", "lp", "median", "orbit"}
    budget : int or None
        Cap on exhaustive work; ``None`` uses the package default.
    random_state : int, random.Random or None
        Randomizes tie-breaking among optimal orbit solutions and cuts.
    cross_check : bool
        Attach the oracle value when the instance is small enough.
    """

    def __init__(self, method="auto", budget=None, random_state=None, cross_check=False):
        self.method = method
        self.budget = budget
        self.random_state = random_state
        self.cross_check = cross_check

    def fit(self, X, y=None):
        inst = check_instance(X)
        check_method(self.method)
        budget = check_budget(self.budget)
        rng = check_random_state(self.random_state)
        res = solve_instance(inst, self.method, budget, rng, self.cross_check)
        self.instance_ = inst
        self.method_ = res.method
        self.assignment_ = dict(res.extension.assign)
        self.cost_ = res.tau
        self.tau_star_ = res.tau_star
        self.oracle_cost_ = res.oracle_tau
        self.info_ = res.info
        return self

    def predict(self, X=None):
        """Terminals for the points in ``X`` (default: the free points)."""
        check_is_fitted(self)
        points = self.instance_.free_points if X is None else X
        return [self.assignment_[p] for p in points]

    def fit_predict(self, X, y=None):
        return self.fit(X).predict()

    def score(self, X=None, y=None):
        """Negated cost, so that larger is better."""
        check_is_fitted(self)
        inst = self.instance_ if X is None else check_instance(X)
        return -zero_extension_cost(inst, self.assignment_)

