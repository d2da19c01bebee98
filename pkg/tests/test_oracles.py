"""Optimal values frozen from a separate brute-force run.

Instances are ``random_instance(metric, 3, 5, random.Random(seed))`` for
seeds 0, 1, 2.
"""

import random
from fractions import Fraction

import pytest

from zeroext.corpus import named_metrics, random_instance
from zeroext.estimator import pick_method, solve_instance
from zeroext.solvers import brute_force, exact_minimum

FROZEN = {
    "K2": [2, 0, 1],
    "K3": [7, 7, 3],
    "K23": [17, 10, 26],
    "C4": [17, 8, 9],
    "rect": [26, 12, 13],
    "Q3": [78, 75, 75],
    "K33m": [23, 37, 37],
    "fig2": [224, 200, 272],
    "P3": [10, 10, 4],
    "P4": [29, 8, 9],
    "star": [20, 11, 28],
    "tree": [33, 48, 46],
    "grid": [26, 47, 48],
    "fig2w": [358, 334, 465],
    "K23w": [Fraction(51, 2), 15, 39],
}
M = named_metrics()


def test_corpus_names_are_covered():
    assert set(FROZEN) == set(M)


@pytest.mark.parametrize("name", sorted(FROZEN))
def test_frozen_optima(name):
    for seed, expected in enumerate(FROZEN[name]):
        inst = random_instance(M[name], 3, 5, random.Random(seed))
        assert brute_force(inst)[0] == expected
        assert exact_minimum(inst, method="elimination").value == expected
        assert solve_instance(inst, pick_method(inst), cross_check=False).tau == expected
