"""Command-line front end.

Exit codes: 0 success, 1 parse or usage error, 2 negative answers
(not isomorphic, not finite, incoherent, predicate false), 3 precondition
failures (open type, wrong fragment).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import coherence, finite, normform, oracle, polytree, syntax, yoneda

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NEGATIVE = 2
EXIT_PRECONDITION = 3


def _read_arg(text: str) -> str:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return fh.read().strip()
    return text


def _emit(args, payload: dict, plain: str) -> None:
    if args.json:
        doc = {"schema": SCHEMA_VERSION, "command": args.command, **payload}
        print(json.dumps(doc, indent=2, default=str))
    else:
        print(plain)


def _parse_poly(text: str):
    return syntax.parse_type(_read_arg(text))


def _parse_mono(text: str):
    return syntax.parse_monotype(_read_arg(text))


def cmd_parse(args) -> int:
    t = _parse_poly(args.type)
    rendered = syntax.print_type(t)
    _emit(args, {"input": args.type, "result": rendered}, rendered)
    return EXIT_OK


def cmd_nf(args) -> int:
    t = _parse_poly(args.type)
    rendered = syntax.print_type(normform.nf(t))
    _emit(args, {"input": args.type, "result": rendered}, rendered)
    return EXIT_OK


def cmd_iso(args) -> int:
    a = _parse_poly(args.left)
    b = _parse_poly(args.right)
    ok = normform.iso_beta_eta(a, b)
    _emit(
        args,
        {"input": [args.left, args.right], "result": "iso" if ok else "not-iso"},
        "iso" if ok else "not-iso",
    )
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_tree(args) -> int:
    t = _parse_poly(args.type)
    e = polytree.tree_of_type(t)
    if args.dot:
        out = polytree.to_dot(e, annotate_modular=args.annotate, annotate_pairs=args.annotate)
    else:
        out = polytree.render(e.root)
    _emit(args, {"input": args.type, "result": out}, out)
    return EXIT_OK


def cmd_coherent(args) -> int:
    t = _parse_poly(args.type)
    e = polytree.tree_of_type(t)
    phi, bad = coherence.find_valuation_with_witness(e)
    if phi is not None:
        witness = {x: c.value for x, c in phi.items()}
        _emit(args, {"input": args.type, "result": "coherent", "witness": witness}, "coherent")
        return EXIT_OK
    witness = [[x, c.value] for x, c in bad] if bad else None
    _emit(args, {"input": args.type, "result": "incoherent", "witness": witness}, "incoherent")
    return EXIT_NEGATIVE


def cmd_char(args) -> int:
    t = _parse_poly(args.type)
    e = polytree.tree_of_type(t)
    phi, bad = coherence.find_valuation_with_witness(e)
    if phi is None:
        kappa = coherence.Characteristic.INFINITE
        witness = {"incoherent_component": [[x, c.value] for x, c in bad] if bad else None}
    else:
        cycle = coherence.find_cyclic_alternating_path(e)
        if cycle is not None:
            kappa = coherence.Characteristic.ONE
            witness = {"cyclic_alternating_path": cycle}
        else:
            kappa = coherence.Characteristic.ZERO
            witness = {"valuation": {x: c.value for x, c in phi.items()}}
    _emit(args, {"input": args.type, "result": str(kappa), "witness": witness}, str(kappa))
    return EXIT_OK


def cmd_reduce(args) -> int:
    t = _parse_poly(args.type)
    e = polytree.tree_of_type(t)
    phi = coherence.find_valuation(e)
    if phi is None:
        _emit(args, {"input": args.type, "result": "incoherent"}, "incoherent")
        return EXIT_NEGATIVE
    if args.strategy == "uniform":
        reduced, trace = yoneda.uniform_reduce(e, phi)
    else:
        reduced, trace = yoneda.standard_reduce(
            e, phi, policy=args.strategy, seed=args.seed
        )
    rendered = syntax.print_type(polytree.tau(reduced))
    payload = {"input": args.type, "result": rendered}
    if args.trace:
        payload["trace"] = trace.as_json()
    _emit(args, payload, rendered)
    return EXIT_OK


def cmd_flat(args) -> int:
    t = _parse_poly(args.type)
    try:
        m = finite.flat(t)
    except yoneda.NotCoherent:
        _emit(args, {"input": args.type, "result": "incoherent"}, "incoherent")
        return EXIT_NEGATIVE
    rendered = syntax.print_type(m)
    _emit(args, {"input": args.type, "result": rendered}, rendered)
    return EXIT_OK


def cmd_count(args) -> int:
    t = _parse_poly(args.type)
    try:
        n = finite.count_inhabitants(t)
    except finite.OpenType as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if isinstance(n, finite.NotFinite):
        _emit(args, {"input": args.type, "result": "not-finite"}, "not-finite")
        return EXIT_NEGATIVE
    payload = {"input": args.type, "result": n}
    if args.oracle:
        body = t
        while isinstance(body, syntax.Forall):
            body = body.body
        if not syntax.is_simple_type(body):
            print("error: --oracle needs a forall-closure of a simple type", file=sys.stderr)
            return EXIT_PRECONDITION
        res = oracle.enumerate_inhabitants(body)
        payload["oracle"] = {"count": res.count, "complete": res.complete}
        plain = f"{n} (oracle: {res.count}, complete={res.complete})"
        _emit(args, payload, plain)
        return EXIT_OK
    _emit(args, payload, str(n))
    return EXIT_OK


def cmd_check(args) -> int:
    t = _parse_poly(args.type)
    preds = {
        "balanced": finite.balanced,
        "nnd": finite.negatively_non_duplicated,
        "pnd": finite.positively_non_duplicated,
    }
    try:
        ok = preds[args.predicate](t)
    except finite.NotSimple as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _emit(args, {"input": args.type, "result": ok}, "true" if ok else "false")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_sharp(args) -> int:
    m = _parse_mono(args.type)
    rendered = syntax.print_type(finite.sharp(m))
    _emit(args, {"input": args.type, "result": rendered}, rendered)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quantelim",
        description="Analyze System F types: isomorphism, quantifier "
        "elimination, characteristic, inhabitant counting.",
    )
    ap.add_argument("--json", action="store_true", help="emit a JSON document")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and reprint a type")
    p.add_argument("type")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("nf", help="normal form of a type")
    p.add_argument("type")
    p.set_defaults(func=cmd_nf)

    p = sub.add_parser("iso", help="decide isomorphism of two types")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("tree", help="show the tree representation")
    p.add_argument("type")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--annotate", action="store_true")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("coherent", help="does a coherent valuation exist?")
    p.add_argument("type")
    p.set_defaults(func=cmd_coherent)

    p = sub.add_parser("char", help="characteristic: 0, 1 or inf")
    p.add_argument("type")
    p.set_defaults(func=cmd_char)

    p = sub.add_parser("reduce", help="eliminate all quantifiers")
    p.add_argument("type")
    p.add_argument("--trace", action="store_true")
    p.add_argument(
        "--strategy",
        choices=["outermost", "innermost", "random", "uniform"],
        default="outermost",
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("flat", help="canonical monomorphic image")
    p.add_argument("type")
    p.set_defaults(func=cmd_flat)

    p = sub.add_parser("count", help="count inhabitants of a closed type")
    p.add_argument("type")
    p.add_argument("--oracle", action="store_true", help="cross-check by search")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("check", help="occurrence predicates on simple types")
    p.add_argument("type")
    p.add_argument("--predicate", choices=["balanced", "nnd", "pnd"], required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sharp", help="polymorphic encoding of a monomorphic type")
    p.add_argument("type")
    p.set_defaults(func=cmd_sharp)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except syntax.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (polytree.TreeError, finite.NotSimple, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
