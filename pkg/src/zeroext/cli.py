"""Command line front end: ``zeroext analyze|solve|gadget|retraction|generate``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .corpus import named_metrics, random_instance
from .exceptions import (
    BudgetExceeded,
    HypothesisViolation,
    InvalidInput,
    NotApplicable,
    NotIntractable,
    ParseError,
    PropertyViolated,
    ZeroExtError,
)
from .fileformat import format_instance, read_instance, read_product
from .metric import format_rat
from .modular import canonical_embedding, classify, orbit_decomposition

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_APPLICABLE = 3
EXIT_PROPERTY = 4
EXIT_BUDGET = 5


def _rat(v):
    return None if v is None else format_rat(v)


def summary_line(c) -> str:
    if not c.is_metric:
        return "not a metric"
    if not c.is_modular:
        return "non-modular; gadget available"
    parts = ["median" if c.is_median else "frame" if c.is_frame else "modular"]
    parts.append(f"{c.orbit_count} orbit" + ("" if c.orbit_count == 1 else "s"))
    if c.theorem3_applicable and not c.is_minimizable:
        parts.append("theorem3-applicable")
    if not c.is_median:
        parts.append("not median")
    if not c.is_hereditary_modular:
        parts.append("not hereditary modular")
    if not c.is_orientable:
        parts.append("not orientable; gadget available")
    return ", ".join(parts)


def analyze_report(inst) -> dict:
    mu = inst.metric
    c = classify(mu)
    rep = {"summary": summary_line(c), "terminals": list(map(str, mu.points)),
           "classification": c.as_dict()}
    if c.is_modular:
        dec = orbit_decomposition(mu)
        rep["orbits"] = [
            {"index": i, "weight": _rat(w), "edges": len(q.edges),
             "orbit_graph_nodes": len(g.nodes), "orbit_graph_edges": len(g.edges),
             "blocks": {str(t): sorted(map(str, b)) for t, b in dec.partitions[i].items()}}
            for i, (q, g, w) in enumerate(zip(dec.orbits, dec.orbit_graphs, dec.weights))
        ]
        try:
            emb = canonical_embedding(dec)
            size = 1
            for g in emb.factors:
                size *= len(g.nodes)
            rep["embedding"] = {"product_nodes": size, "image_nodes": len(emb.phi),
                                "phi": {str(v): list(map(str, z)) for v, z in emb.phi.items()}}
        except ZeroExtError as exc:
            rep["embedding"] = {"error": str(exc)}
    return rep


def _print_analyze(rep):
    print(rep["summary"])
    for key, val in rep["classification"].items():
        if key != "twist":
            print(f"  {key}: {val}")
    for o in rep.get("orbits", []):
        print(f"  orbit {o['index']}: weight {o['weight']}, {o['edges']} edges, "
              f"orbit graph {o['orbit_graph_nodes']} nodes / {o['orbit_graph_edges']} edges")
    emb = rep.get("embedding")
    if emb and "error" not in emb:
        print(f"  embedding: {emb['image_nodes']} of {emb['product_nodes']} product nodes")


def cmd_analyze(args) -> int:
    rep = analyze_report(read_instance(args.path).instance)
    if args.json:
        print(json.dumps(rep, indent=2))
    else:
        _print_analyze(rep)
    return EXIT_OK


def cmd_solve(args) -> int:
    from .estimator import solve_instance

    inst = read_instance(args.path).instance
    rng = random.Random(args.seed) if args.seed is not None else None
    res = solve_instance(inst, args.method, args.budget, rng)
    rep = {
        "method": res.method,
        "tau": _rat(res.tau),
        "tau_star": _rat(res.tau_star),
        "gap": None if res.tau_star is None else _rat(res.tau - res.tau_star),
        "oracle_tau": _rat(res.oracle_tau),
        "oracle_match": res.oracle_match,
        "assignment": {str(p): str(res.extension.assign[p]) for p in inst.free_points},
        "seconds": round(res.seconds, 6),
    }
    if args.out:
        Path(args.out).write_text("".join(f"{p} {t}\n" for p, t in rep["assignment"].items()))
    if args.json:
        print(json.dumps(rep, indent=2))
    else:
        print(f"method: {rep['method']}")
        print(f"tau: {rep['tau']}")
        if rep["tau_star"] is not None:
            print(f"tau*: {rep['tau_star']} (gap {rep['gap']})")
        if rep["oracle_tau"] is not None:
            print(f"oracle: {rep['oracle_tau']} ({'match' if rep['oracle_match'] else 'MISMATCH'})")
        for p, t in rep["assignment"].items():
            print(f"  {p} -> {t}")
    if res.oracle_match is False:
        return EXIT_PROPERTY
    return EXIT_OK


def build_gadget(mu, budget=None):
    from .gadgets import gadget_nonmodular, gadget_nonorientable

    c = classify(mu)
    if not c.is_modular:
        return gadget_nonmodular(mu, budget=budget)
    if not c.is_orientable:
        return gadget_nonorientable(mu)
    raise NotIntractable("metric is modular with an orientable underlying graph")


def cmd_gadget(args) -> int:
    from .gadgets import verify_gadget

    mu = read_instance(args.path).instance.metric
    g = build_gadget(mu, args.budget)
    report = verify_gadget(g, budget=args.budget, strict=False)
    meta = {k: (str(v) if not isinstance(v, int) and not hasattr(v, "denominator") else v)
            for k, v in g.meta().items()}
    text = format_instance(g.instance, meta)
    if args.out:
        Path(args.out).write_text(text)
    if args.json:
        out = {"kind": g.kind, "meta": {k: (format_rat(v) if isinstance(v, int) or hasattr(v, "denominator")
                                            else str(v)) for k, v in g.meta().items()},
               "verification": report.as_dict()}
        print(json.dumps(out, indent=2))
    else:
        if not args.out:
            print(text, end="")
        verdict = "verified" if report.holds else "FAILED"
        print(f"{g.kind} gadget: {len(g.instance.free_points)} free points, "
              f"tau_hat {format_rat(g.tau_hat)}, delta {format_rat(g.delta)}: {verdict}")
    if not report.holds:
        print(f"violation: {report.violations[0]}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_retraction(args) -> int:
    from .retraction import product_retraction

    pf = read_product(args.path)
    nodes = pf.nodes
    if nodes is None:
        from .metric import cartesian_product

        nodes = cartesian_product(pf.factors).nodes
    r = product_retraction(pf.factors, nodes)
    bad = r.violations(limit=1)
    table = {",".join(map(str, z)): ",".join(map(str, r(z))) for z in r.ps.product.nodes}
    if args.json:
        print(json.dumps({"gamma": table, "holds": not bad,
                          "steps": len(r.info.get("steps", ()))}, indent=2))
    else:
        for z, w in table.items():
            print(f"{z} -> {w}")
        print("retraction axioms: " + ("hold" if not bad else f"FAILED {bad[0]}"))
    return EXIT_OK if not bad else EXIT_PROPERTY


def cmd_generate(args) -> int:
    metrics = named_metrics()
    if args.metric in metrics:
        mu = metrics[args.metric]
    else:
        mu = read_instance(args.metric).instance.metric
    inst = random_instance(mu, args.free, args.max_cost, random.Random(args.seed))
    text = format_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeroext", description="Minimum 0-extension toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, budget=True):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if budget:
            sp.add_argument("--budget", type=int, default=None,
                            help="cap on exhaustive work (default: $ZEROEXT_BUDGET or 2000000)")

    a = sub.add_parser("analyze", help="classify a metric and list its orbits")
    a.add_argument("path")
    common(a, budget=False)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("path")
    s.add_argument("--method", default="auto", choices=["auto", "oracle", "lp", "median", "orbit"])
    s.add_argument("--seed", type=int, default=None, help="randomize tie-breaking")
    s.add_argument("--out", help="write 'point terminal' lines here")
    common(s)
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gadget", help="build and verify a hardness gadget for the metric")
    g.add_argument("path")
    g.add_argument("--out", help="write the gadget instance here")
    common(g)
    g.set_defaults(func=cmd_gadget)

    r = sub.add_parser("retraction", help="retract a product onto a subgraph")
    r.add_argument("path")
    common(r, budget=False)
    r.set_defaults(func=cmd_retraction)

    n = sub.add_parser("generate", help="write a random instance")
    n.add_argument("metric", help="corpus name (" + ", ".join(named_metrics()) + ") or instance file")
    n.add_argument("--free", type=int, default=3)
    n.add_argument("--max-cost", type=int, default=5)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out")
    n.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NotApplicable, HypothesisViolation) as exc:
        print(f"not applicable: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    except PropertyViolated as exc:
        print(f"property violated: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidInput, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
