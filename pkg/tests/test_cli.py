import json

import pytest

from zeroext.cli import main, summary_line
from zeroext.corpus import complete_bipartite, complete_graph, named_metrics
from zeroext.exceptions import ParseError
from zeroext.fileformat import (
    format_instance,
    format_product,
    parse_instance,
    parse_product,
    read_instance,
    write_instance,
)
from zeroext.instance import Instance
from zeroext.modular import classify

M = named_metrics()


def write(tmp_path, name, inst, meta=None):
    path = tmp_path / f"{name}.zx"
    write_instance(path, inst, meta)
    return str(path)


def metric_file(tmp_path, name):
    return write(tmp_path, name, Instance.build(M[name]))


def star_file(tmp_path, name="K3"):
    mu = M[name]
    return write(tmp_path, f"{name}star", Instance.build(mu, ["x"], {("x", t): 1 for t in mu.points}))


@pytest.mark.parametrize("name, text", [
    ("K23", "frame, 1 orbit, not median"),
    ("Q3", "median, 3 orbits, theorem3-applicable, not hereditary modular"),
    ("K3", "non-modular; gadget available"),
])
def test_summary_lines(name, text, tmp_path, capsys):
    assert summary_line(classify(M[name])) == text
    assert main(["analyze", metric_file(tmp_path, name)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == text


def test_analyze_json(tmp_path, capsys):
    assert main(["analyze", "--json", metric_file(tmp_path, "fig2")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["orbits"]) == 3
    assert rep["embedding"]["image_nodes"] == 14 and rep["embedding"]["product_nodes"] == 20


def test_solve_lp_gap(tmp_path, capsys):
    assert main(["solve", "--method", "lp", "--json", star_file(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert (rep["tau"], rep["tau_star"], rep["gap"]) == ("2", "3/2", "1/2")
    assert rep["oracle_match"] is True


def test_solve_orbit_and_assignment_file(tmp_path, capsys):
    from zeroext.corpus import random_instance
    import random

    inst = random_instance(M["fig2"], 3, 5, random.Random(4))
    out = tmp_path / "assign.txt"
    assert main(["solve", "--method", "orbit", "--seed", "1", "--out", str(out),
                 write(tmp_path, "fig2inst", inst)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("method: orbit") and "(match)" in text
    assert len(out.read_text().splitlines()) == 3


def test_solve_auto_picks_median(tmp_path, capsys):
    assert main(["solve", "--json", star_file(tmp_path, "Q3")]) == 0
    assert json.loads(capsys.readouterr().out)["method"] == "median"


def test_gadget_commands(tmp_path, capsys):
    assert main(["gadget", metric_file(tmp_path, "K3")]) == 0
    out = capsys.readouterr().out
    assert "nonmodular gadget: 6 free points, tau_hat 207/2, delta 1/2: verified" in out
    assert main(["gadget", "--json", metric_file(tmp_path, "K33m")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["kind"] == "nonorientable" and rep["verification"]["holds"]
    assert rep["meta"]["tau_hat"] == "320"
    target = tmp_path / "g.zx"
    assert main(["gadget", "--out", str(target), metric_file(tmp_path, "K3")]) == 0
    back = read_instance(target)
    assert back.meta["kind"] == "nonmodular" and len(back.instance.free_points) == 6


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.zx"
    bad.write_text("TERMINALS\na b\nMETRIC\n0 1\n1 x\n")
    assert main(["analyze", str(bad)]) == 2
    assert main(["analyze", str(tmp_path / "missing.zx")]) == 2
    assert main(["gadget", metric_file(tmp_path, "K23")]) == 3
    assert main(["solve", "--method", "median", star_file(tmp_path, "K23")]) == 3
    assert main(["solve", "--method", "oracle", "--budget", "2", star_file(tmp_path, "K23")]) == 5
    assert "budget exceeded" in capsys.readouterr().err


def test_property_exit_code(tmp_path, monkeypatch):
    import zeroext.cli as cli
    from zeroext.gadgets import gadget_nonorientable

    monkeypatch.setattr(cli, "build_gadget", lambda mu, budget=None: gadget_nonorientable(mu, n=1))
    assert main(["gadget", metric_file(tmp_path, "K33m")]) == 4


def test_retraction_command(tmp_path, capsys):
    k2 = complete_graph(2)
    a, b = k2.nodes
    path = tmp_path / "sq.px"
    path.write_text(format_product((k2, k2), [(a, a), (a, b), (b, a)]))
    assert main(["retraction", str(path)]) == 0
    out = capsys.readouterr().out
    assert f"{b},{b} -> {a},{a}" in out and "retraction axioms: hold" in out
    full = tmp_path / "full.px"
    full.write_text(format_product((complete_bipartite(2, 3), k2)))
    assert main(["retraction", "--json", str(full)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["holds"] and all(k == v for k, v in rep["gamma"].items())


def test_generate(tmp_path, capsys):
    assert main(["generate", "Q3", "--free", "2", "--seed", "3"]) == 0
    text = capsys.readouterr().out
    inst = parse_instance(text).instance
    assert len(inst.free_points) == 2 and inst.metric == M["Q3"]
    out = tmp_path / "g.zx"
    assert main(["generate", metric_file(tmp_path, "K23"), "--out", str(out), "--seed", "3"]) == 0
    assert read_instance(out).instance.metric == M["K23"]


def test_instance_round_trip():
    import random
    from zeroext.corpus import random_instance

    for name, mu in M.items():
        inst = random_instance(mu, 2, 4, random.Random(0))
        back = parse_instance(format_instance(inst, {"note": "a b"}))
        assert back.instance == inst and back.meta == {"note": "a b"}


@pytest.mark.parametrize("text, line, col", [
    ("TERMINALS\na b\nMETRIC\n0 1\n1 zz\n", 5, 3),
    ("TERMINALS\na b\nMETRIC\n0 1 2\n1 0\n", 4, 5),
    ("a b\n", 1, 1),
    ("TERMINALS\na b\nMETRIC\n0 1\n1 0\nCOSTS\na q 1\n", 7, 3),
    ("TERMINALS\na b\nMETRIC\n0 1\n1 0\nPOINTS\nx\nCOSTS\nx a -1\n", 9, 5),
    ("TERMINALS\na a\nMETRIC\n0 1\n1 0\n", 2, 3),
])
def test_parse_errors_point_at_the_token(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_instance(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_comments_and_headers():
    text = "# demo\nTERMINALS  \na b # two\nMETRIC\n0 3/2\n3/2 0\n"
    inst = parse_instance(text).instance
    assert inst.metric("a", "b") * 2 == 3


def test_product_round_trip():
    k2 = complete_graph(2)
    f = (complete_bipartite(2, 3), k2)
    nodes = [("a1", k2.nodes[0]), ("b2", k2.nodes[1])]
    back = parse_product(format_product(f, nodes))
    assert [set(g.nodes) for g in back.factors] == [set(g.nodes) for g in f]
    assert [set(map(frozenset, g.edges)) for g in back.factors] == [set(map(frozenset, g.edges)) for g in f]
    assert back.nodes == tuple(nodes)
    with pytest.raises(ParseError):
        parse_product("FACTOR\na b\nNODES\na,b,c\n")
