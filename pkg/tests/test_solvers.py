import itertools
import random

import pytest

from zeroext.corpus import complete_graph, named_metrics, random_instance
from zeroext.exceptions import BudgetExceeded, NotApplicable, NotMedian
from zeroext.instance import Instance, ZeroExtension, check_assignment, terminal_cost, zero_extension_cost
from zeroext.metric import path_metric
from zeroext.modular import orbit_decomposition
from zeroext.solvers import (
    all_optima,
    brute_force,
    cut_value,
    exact_minimum,
    min_cut,
    shrink_orbit_instance,
    solve_median,
    solve_orbit_uncrossing,
)

M = named_metrics()


def k3_star():
    k3 = path_metric(complete_graph(3))
    return Instance.build(k3, ["x"], {("x", t): 1 for t in k3.points})


def test_oracle_trivial_cases():
    mu = M["K23"]
    inst = Instance.build(mu, [], {("a1", "b2"): 3})
    assert brute_force(inst)[0] == 3 == terminal_cost(inst)
    inst = Instance.build(mu, ["x", "y"], {})
    assert brute_force(inst)[0] == 0


def test_oracle_on_star():
    tau, z = brute_force(k3_star())
    assert tau == 2
    assert z.info["optima"] == 3
    _, optima = all_optima(k3_star())
    assert sorted(a["x"] for a in optima) == ["t0", "t1", "t2"]


def test_budget():
    inst = random_instance(M["Q3"], 4, 5, random.Random(0))
    with pytest.raises(BudgetExceeded):
        brute_force(inst, budget=100)
    assert exact_minimum(inst, budget=1000).method == "elimination"


def test_elimination_matches_enumeration():
    rng = random.Random(9)
    for name in ("K3", "K33m", "fig2", "P4"):
        for _ in range(10):
            inst = random_instance(M[name], 3, 5, rng)
            a = exact_minimum(inst, method="enumeration")
            b = exact_minimum(inst, method="elimination")
            assert (a.value, a.count) == (b.value, b.count)
            assert zero_extension_cost(inst, b.assignment) == b.value


def test_pins():
    inst = k3_star()
    assert exact_minimum(inst, {"x": "t0"}).value == 2
    inst = random_instance(M["K23"], 2, 5, random.Random(4))
    pins = {x: "a1" for x in inst.free_points}
    assign = {t: t for t in inst.terminals}
    assign.update(pins)
    assert exact_minimum(inst, pins).value == zero_extension_cost(inst, assign)


def test_assignment_costs():
    inst = random_instance(M["K23"], 2, 5, random.Random(2))
    same = {p: "a1" for p in inst.points}
    same.update({t: t for t in inst.terminals})
    check_assignment(inst, same)
    assert zero_extension_cost(inst, same) >= terminal_cost(inst)


def test_min_cut_small():
    assert min_cut(["a", "b"], {frozenset("ab"): 5}, ["a"], ["b"]).value == 5
    cut = min_cut(["a", "x", "b"], {frozenset("ax"): 1, frozenset("xb"): 2}, ["a"], ["b"])
    assert cut.value == 1
    assert cut.side["x"] == 1


def test_min_cut_against_enumeration():
    rng = random.Random(12)
    for _ in range(30):
        n = rng.randint(3, 9)
        pts = [f"v{i}" for i in range(n)]
        costs = {frozenset(e): rng.randint(1, 6) for e in itertools.combinations(pts, 2) if rng.random() < 0.5}
        src, snk = ["v0"], [pts[-1]]
        best = None
        for bits in itertools.product((0, 1), repeat=n - 2):
            side = {"v0": 0, pts[-1]: 1}
            side.update(dict(zip(pts[1:-1], bits)))
            v = cut_value(costs, side)
            best = v if best is None or v < best else best
        assert min_cut(pts, costs, src, snk).value == best


@pytest.mark.parametrize("name", ["Q3", "P3", "C4", "star", "tree", "P4", "K2"])
def test_median_solver_matches_oracle(name):
    rng = random.Random(name)
    for n in range(30):
        inst = random_instance(M[name], rng.randint(0, 3), 5, rng)
        z = solve_median(inst, rng=rng if n % 2 else None)
        assert zero_extension_cost(inst, z) == brute_force(inst)[0]
        assert z.info["replacements"] <= z.info["bound"]


def test_median_gate():
    with pytest.raises(NotMedian):
        solve_median(random_instance(M["K23"], 2, 5, random.Random(0)))


def test_shrink_preserves_optimum():
    mu = M["fig2"]
    dec = orbit_decomposition(mu)
    rng = random.Random(17)
    for _ in range(10):
        inst = random_instance(mu, 2, 4, rng)
        total = 0
        for i in range(dec.k):
            sub = shrink_orbit_instance(inst, dec, i)
            assert set(sub.terminals) == set(dec.orbit_graphs[i].nodes)
            total += dec.weights[i] * brute_force(sub)[0]
        assert total == brute_force(inst)[0]


@pytest.mark.parametrize("name", ["fig2", "fig2w", "Q3", "rect", "K23", "K23w", "grid", "tree", "K2"])
def test_orbit_pipeline_matches_oracle(name):
    rng = random.Random(name)
    for n in range(25):
        inst = random_instance(M[name], rng.randint(0, 3), 4, rng)
        z = solve_orbit_uncrossing(inst, rng=rng if n % 2 else None)
        assert isinstance(z, ZeroExtension)
        assert zero_extension_cost(inst, z) == brute_force(inst)[0] == z.info["weighted_sum"]


def test_orbit_pipeline_gate():
    with pytest.raises(NotApplicable):
        solve_orbit_uncrossing(k3_star())
    with pytest.raises(NotApplicable):
        solve_orbit_uncrossing(random_instance(M["K33m"], 1, 3, random.Random(0)))


def test_median_and_orbit_agree():
    rng = random.Random(3)
    for _ in range(20):
        inst = random_instance(M["Q3"], 3, 5, rng)
        assert (zero_extension_cost(inst, solve_median(inst))
                == zero_extension_cost(inst, solve_orbit_uncrossing(inst)))
