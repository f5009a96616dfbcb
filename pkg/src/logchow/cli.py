"""Command-line front end.

Every verb reads JSON files (or inline JSON) and prints either a short text
report or, with ``--json``, a JSON document.  Usage errors exit with status
2; domain errors exit with status 1 and print ``{"error": ..., "message":
...}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .errors import LogChowError, ParseError, TypeMismatch


def workers() -> int:
    """Worker count: the CPU count, capped by ``LOGCHOW_THREADS``."""
    n = os.cpu_count() or 1
    cap = os.environ.get("LOGCHOW_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"LOGCHOW_THREADS must be an integer, got {cap!r}") from None
    return n


class UsageError(Exception):
    pass


# ------------------------------------------------------------ input
def load_json(src: str):
    """Parse ``src`` as inline JSON if it looks like JSON, else read a file."""
    text = src
    if not src.lstrip().startswith(("{", "[")):
        if src == "-":
            text = sys.stdin.read()
        else:
            try:
                with open(src, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise UsageError(f"cannot read {src}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {src if src != text else 'argument'}: {exc}") from None


def _graph(src: str):
    from .stablegraphs import StableGraph, canonical_form
    G = StableGraph.from_json(load_json(src))
    G.check()
    return canonical_form(G)


def _moduli_subdivision(g: int, n: int, history):
    from .piecewise import Subdivision
    from .stablegraphs import moduli_cone_stack
    M = moduli_cone_stack(g, n)
    if history is None:
        return Subdivision(M)
    if isinstance(history, dict):
        history = history.get("history", [])
    try:
        return Subdivision.from_json(M, history)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed stellar history: {exc}") from None


def parse_moduli_class(data: dict):
    """A class on a subdivision of ``Sigma_{g,n}`` from JSON.

    Accepted keys: ``g``, ``n``, ``history`` (stellar operations),
    ``values`` (object index -> polynomial on the subdivided stack) and, in
    genus 0, ``terms``: a list of ``{"divisors": [[A1...], ...], "coeff"}``
    products of boundary divisors ``D_A``.
    """
    from .genus0 import boundary_divisor
    from .piecewise import PPClass, StrictPP, restrict
    try:
        g, n = int(data["g"]), int(data["n"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("class JSON needs integer fields g and n") from None
    sub = _moduli_subdivision(g, n, data.get("history"))
    total = PPClass.zero(sub.base)
    if sub.history:
        total = restrict(total, sub)
    if "values" in data:
        total = total + PPClass(sub, StrictPP.from_json(sub.current, {"values": data["values"]}))
    for term in data.get("terms", []):
        if g != 0:
            raise TypeMismatch("divisor terms are only available in genus 0")
        f = StrictPP.const(sub.base, Fraction(term.get("coeff", 1)))
        for A in term.get("divisors", []):
            f = f * boundary_divisor(n, A)
        total = total + PPClass.strict(f)
    return total


def class_to_json(f, g: int, n: int) -> dict:
    return {"g": g, "n": n, **f.to_json()}


def _strata(src: str):
    from .stratalgebra import StrataElem
    return StrataElem.from_json(load_json(src))


def _log(src: str):
    from .logstrata import LogElem
    return LogElem.from_json(load_json(src))


def _emit(args, text: str, payload) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        print(text)


# ------------------------------------------------------------- verbs
def cmd_graphs(args) -> int:
    from .stablegraphs import aut_order, enumerate_graphs
    gs = enumerate_graphs(args.g, args.n)
    if args.count:
        _emit(args, str(len(gs)), {"g": args.g, "n": args.n, "count": len(gs)})
        return 0
    lines = [f"{i}\t{G.num_edges}\t|Aut|={aut_order(G)}\t{G}" for i, G in enumerate(gs)]
    _emit(args, "\n".join(lines), [{"index": i, "graph": G.to_json(), "aut": aut_order(G)} for i, G in enumerate(gs)])
    return 0


def cmd_stack(args) -> int:
    from .conestack import validate
    from .stablegraphs import moduli_cone_stack
    M = moduli_cone_stack(args.g, args.n)
    rep = validate(M)
    rows = [{"index": i, "name": o.name, "dim": o.dim, "aut": M.aut_order(i)} for i, o in enumerate(M.objects)]
    dims = {}
    for o in M.objects:
        dims[o.dim] = dims.get(o.dim, 0) + 1
    text = "\n".join([f"Sigma_{args.g},{args.n}: {len(M.objects)} objects, {len(M.arrows)} arrows, valid={rep.ok}",
                      "objects by dimension: " + ", ".join(f"{d}: {c}" for d, c in sorted(dims.items()))])
    _emit(args, text, {"g": args.g, "n": args.n, "objects": rows, "arrows": len(M.arrows),
                       "valid": rep.ok, "problems": rep.to_json()["problems"]})
    return 0 if rep.ok else 1


def cmd_star(args) -> int:
    from .stablegraphs import graph_star
    G = _graph(args.graph)
    st = graph_star(G)
    rows = []
    for o, obj in enumerate(st.stack.objects):
        rows.append({"index": o, "name": obj.name, "rays": list(obj.rays), "interior": o in st.bounded.interior,
                     "aut": st.stack.aut_order(o)})
    text = "\n".join([f"Star of {G}", f"vertex types: {list(st.vertex_types)}",
                      f"{len(rows)} objects, {len(st.bounded.interior)} interior, {len(st.stack.arrows)} arrows"])
    _emit(args, text, {"graph": G.to_json(), "vertex_types": [list(t) for t in st.vertex_types], "objects": rows})
    return 0


def cmd_subdivide(args) -> int:
    history = load_json(args.subdivide) if args.subdivide else None
    sub = _moduli_subdivision(args.g, args.n, history)
    point = None
    if args.point:
        try:
            point = tuple(int(x) for x in args.point.split(","))
        except ValueError:
            raise UsageError("--point must be comma-separated integers") from None
    base = sub.base.stack
    base.check_object(args.object)
    if point is None:
        point = (1,) * base.objects[args.object].dim
    sub = sub.stellar(args.object, point)
    cur = sub.current.stack
    cells = [{"index": c, "name": o.name, "dim": o.dim, "base": sub.cell_base(c),
              "generators": [list(v) for v in sub.cell_generators(c)]} for c, o in enumerate(cur.objects)]
    text = f"history: {json.dumps(sub.to_json())}\n{len(cells)} cells"
    _emit(args, text, {"g": args.g, "n": args.n, "history": sub.to_json(), "cells": cells})
    return 0


def cmd_push(args) -> int:
    from .logstrata import push_to_log_pp
    c = _log(args.input)
    f = push_to_log_pp(c)
    _emit(args, repr(f), class_to_json(f, c.g, c.n))
    return 0


def cmd_pull(args) -> int:
    from .piecewise import pullback_class
    from .stablegraphs import graph_star
    f = parse_moduli_class(load_json(args.input))
    G = _graph(args.graph)
    st = graph_star(G)
    if (G.genus, G.n) != (f.base.stack.g, f.base.stack.n):
        raise TypeMismatch("graph and class have different types")
    h = pullback_class(f, st.to_moduli(), st.bounded)
    _emit(args, repr(h), {"graph": G.to_json(), "f": h.to_json()})
    return 0


def cmd_product(args) -> int:
    a, b = _strata(args.a), _strata(args.b)
    p = a * b
    _emit(args, str(p), p.to_json())
    return 0


def cmd_log_product(args) -> int:
    a, b = _log(args.a), _log(args.b)
    p = a * b
    _emit(args, str(p), p.to_json())
    return 0


def cmd_normalize(args) -> int:
    c = _log(args.input).normalize()
    _emit(args, str(c), c.to_json())
    return 0


def cmd_rank(args) -> int:
    from .genus0 import log_chow_rank
    if args.n is None:
        raise UsageError("rank needs --n")
    history = load_json(args.subdivide) if args.subdivide else None
    sub = _moduli_subdivision(0, args.n, history)
    degs = [args.deg] if args.deg is not None else list(range(args.n - 2))
    for d in degs:
        if d < 0:
            raise UsageError("--deg must be non-negative")
    ranks = {d: log_chow_rank(args.n, d, sub) for d in degs}
    text = str(ranks[degs[0]]) if len(degs) == 1 else " ".join(str(ranks[d]) for d in degs)
    _emit(args, text, {"n": args.n, "history": sub.to_json(), "ranks": {str(d): r for d, r in ranks.items()}})
    return 0


def cmd_wdvv_check(args) -> int:
    from .genus0 import in_wdvv_ideal, log_chow_equal
    f = parse_moduli_class(load_json(args.input))
    n = f.base.stack.n
    if f.base.stack.g != 0:
        raise TypeMismatch("wdvv-check needs a genus-0 class")
    if args.against:
        h = parse_moduli_class(load_json(args.against))
        res = log_chow_equal(f, h, n)
        _emit(args, "equal" if res else "not equal", {"equal": res})
    else:
        res = in_wdvv_ideal(f, n)
        _emit(args, "in WDVV ideal" if res else "not in WDVV ideal", {"in_wdvv_ideal": res})
    return 0


def cmd_paper_examples(args) -> int:
    from .builtin_examples import run_examples
    results = run_examples(args.only.split(",") if args.only else None, workers=workers(), seed=args.seed)
    ok = all(r["passed"] for r in results)
    lines = [f"{'PASS' if r['passed'] else 'FAIL'}  {r['anchor']:<24} {r['description']}"
             + (f"  [{r['error']}]" if r["error"] else "") for r in results]
    lines.append(f"{sum(r['passed'] for r in results)}/{len(results)} passed")
    _emit(args, "\n".join(lines), {"passed": ok, "results": results})
    return 0 if ok else 1


# ------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    def options(suppress: bool) -> argparse.ArgumentParser:
        # the copies on the verbs must not reset values given before the verb
        q = argparse.ArgumentParser(add_help=False)
        q.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                       help="print JSON")
        q.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                       help="seed for randomized checks")
        return q

    common = options(True)
    p = argparse.ArgumentParser(prog="logchow", description="Exact log tautological computations on moduli of curves.",
                                parents=[options(False)])
    sp = p.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help_):
        q = sp.add_parser(name, help=help_, parents=[common])
        q.set_defaults(func=fn)
        return q

    q = verb("graphs", cmd_graphs, "enumerate stable graphs of type (g, n)")
    q.add_argument("g", type=int)
    q.add_argument("n", type=int)
    q.add_argument("--count", action="store_true", help="print only the number of graphs")

    q = verb("stack", cmd_stack, "summarize and validate the tropical moduli stack")
    q.add_argument("g", type=int)
    q.add_argument("n", type=int)

    q = verb("star", cmd_star, "the star cone stack of a stable graph")
    q.add_argument("--graph", required=True, help="graph JSON (file or inline)")

    q = verb("subdivide", cmd_subdivide, "stellar subdivision of the moduli stack")
    q.add_argument("g", type=int)
    q.add_argument("n", type=int)
    q.add_argument("object", type=int, help="index of the base object to subdivide")
    q.add_argument("--point", help="comma-separated point in the object's coordinates (default: barycenter)")
    q.add_argument("--subdivide", help="existing stellar history JSON to extend")

    q = verb("push", cmd_push, "push a log strata element with trivial decorations to piecewise data")
    q.add_argument("input")

    q = verb("pull", cmd_pull, "pull a class on the moduli stack back to the star of a graph")
    q.add_argument("input")
    q.add_argument("--graph", required=True)

    q = verb("product", cmd_product, "product in the strata algebra")
    q.add_argument("a")
    q.add_argument("b")

    q = verb("log-product", cmd_log_product, "product in the log strata algebra")
    q.add_argument("a")
    q.add_argument("b")

    q = verb("normalize", cmd_normalize, "normal form of a log strata element")
    q.add_argument("input")

    q = verb("rank", cmd_rank, "rank of the genus-0 log Chow group")
    q.add_argument("--n", type=int)
    q.add_argument("--deg", type=int)
    q.add_argument("--subdivide", help="stellar history JSON")

    q = verb("wdvv-check", cmd_wdvv_check, "membership in the WDVV ideal / equality of genus-0 classes")
    q.add_argument("input")
    q.add_argument("--against", help="second class: test equality instead")

    q = verb("paper-examples", cmd_paper_examples, "run the built-in reference examples")
    q.add_argument("--only", help="comma-separated anchors")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"logchow: error: {exc}", file=sys.stderr)
        return 2
    except LogChowError as exc:
        print(json.dumps(exc.to_json()))
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "ValueError", "message": str(exc)}))
        return 1
    except RecursionError:
        print(json.dumps({"error": "ResourceLimit", "message": "input too large"}))
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
