"""Argument checks shared by the estimator and the command line."""

from __future__ import annotations

import random
from pathlib import Path

from .exceptions import InvalidInput
from .instance import Instance
from .metric import FiniteMetric

METHODS = ("auto", "oracle", "lp", "median", "orbit")


def check_instance(obj) -> Instance:
    """Accept an Instance, a parsed instance file or a path to one."""
    if isinstance(obj, Instance):
        return obj
    from .fileformat import InstanceFile, read_instance

    if isinstance(obj, InstanceFile):
        return obj.instance
    if isinstance(obj, (str, Path)):
        return read_instance(obj).instance
    raise InvalidInput(f"expected an Instance, got {type(obj).__name__}")


def check_metric(obj) -> FiniteMetric:
    if isinstance(obj, FiniteMetric):
        if not obj.is_metric:
            raise InvalidInput("distances violate the triangle inequality")
        return obj
    if isinstance(obj, Instance):
        return obj.metric
    raise InvalidInput(f"expected a FiniteMetric, got {type(obj).__name__}")


def check_method(method: str) -> str:
    if method not in METHODS:
        raise InvalidInput(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return method


def check_budget(budget) -> int | None:
    if budget is None:
        return None
    if isinstance(budget, bool) or not isinstance(budget, int) or budget <= 0:
        raise InvalidInput(f"budget must be a positive integer, got {budget!r}")
    return budget


def check_random_state(seed) -> random.Random | None:
    """``None`` keeps solvers deterministic; ints seed a fresh generator."""
    if seed is None or isinstance(seed, random.Random):
        return seed
    if isinstance(seed, int) and not isinstance(seed, bool):
        return random.Random(seed)
    raise InvalidInput(f"cannot seed a generator from {seed!r}")


def check_is_fitted(est, attr: str = "assignment_") -> None:
    if not hasattr(est, attr):
        raise InvalidInput(f"{type(est).__name__} is not fitted yet; call fit first")
