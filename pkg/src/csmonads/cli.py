"""Command-line front end.

Exit status: 0 success or positive verdict, 1 negative verdict, 2 usage or
parse error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import monads, process
from .convsets import STAR, ConvexSet, Dist, Point
from .exactlp import CertificateError
from .metrics import FinMetric, check_nonexpansive, parse_metric, term_distance
from .process import Certificate, format_process, parse_process
from .theories import TheoryId, format_rational, generators, interpret, parse_term

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3

THEORIES = {t.value: t for t in TheoryId}


# ---------------------------------------------------------------------------
# serialisation


def encode_rational(q: Fraction) -> str:
    return format_rational(q)


def decode_rational(s: str) -> Fraction:
    return Fraction(s)


def encode_element(e):
    if e is STAR:
        return "star"
    if isinstance(e, str):
        return e
    if isinstance(e, ConvexSet):
        return encode_value(e)
    if isinstance(e, process.Process):
        return {"process": format_process(e)}
    return str(e)


def decode_element(v):
    if v == "star":
        return STAR
    if isinstance(v, str):
        return v
    if isinstance(v, dict) and "process" in v:
        return parse_process(v["process"])
    return decode_value(v)


def encode_value(v):
    """A canonical value as its sorted base: a list of ``[element, "num/den"]`` lists."""
    if v is STAR:
        return "star"
    return {"base": [[[encode_element(e), encode_rational(w)] for e, w in d.items] for d in v.base]}


def decode_value(v):
    if v == "star":
        return STAR
    return ConvexSet(Dist([(decode_element(e), decode_rational(w)) for e, w in d]) for d in v["base"])


def _text_value(v) -> str:
    return "star" if isinstance(v, Point) else repr(v)


# ---------------------------------------------------------------------------
# commands


def _theory(args, allowed=None) -> TheoryId:
    th = THEORIES[args.theory]
    if allowed and th not in allowed:
        raise _Usage(f"--theory {args.theory} is not supported here")
    return th


def _metric(args, names) -> FinMetric:
    if args.metric:
        with open(args.metric, encoding="utf-8") as fh:
            return parse_metric(fh.read())
    return FinMetric.discrete(sorted(names))


class _Usage(Exception):
    pass


def cmd_norm(args):
    th = _theory(args)
    value = interpret(parse_term(args.term), th)
    return EXIT_OK, {"theory": th.value, "value": encode_value(value)}, _text_value(value)


def cmd_eq(args):
    th = _theory(args)
    v1, v2 = (interpret(parse_term(t), th) for t in (args.left, args.right))
    equal = v1 == v2
    record = {
        "theory": th.value,
        "equal": equal,
        "left": encode_value(v1),
        "right": encode_value(v2),
    }
    return (EXIT_OK if equal else EXIT_NEGATIVE), record, "equal" if equal else "not equal"


def cmd_prove(args):
    th = _theory(args)
    p, q = parse_process(args.left), parse_process(args.right)
    result = process.prove(p, q, th)
    if isinstance(result, Certificate):
        steps = [
            {"left": format_process(s.left), "right": format_process(s.right), "value": encode_value(s.value)}
            for s in result.steps
        ]
        lines = ["proved"] + [f"  {s['left']}  ~  {s['right']}" for s in steps]
        return EXIT_OK, {"theory": th.value, "proved": True, "steps": steps}, "\n".join(lines)
    record = {
        "theory": th.value,
        "proved": False,
        "left": encode_value(result.left_value),
        "right": encode_value(result.right_value),
    }
    text = f"not provable\n  {_text_value(result.left_value)}\n  {_text_value(result.right_value)}"
    return EXIT_NEGATIVE, record, text


def cmd_bisim(args):
    th = _theory(args, (TheoryId.CSStar, TheoryId.CSBot))
    p, q = parse_process(args.left), parse_process(args.right)
    value, table = process.bisim_distance(p, q, th)
    procs = process.reachable(p, q)
    names = [format_process(r) for r in procs]
    rows = [[encode_rational(table[a, b]) for b in procs] for a in procs]
    record = {"theory": th.value, "distance": encode_rational(value), "processes": names, "table": rows}
    return EXIT_OK, record, encode_rational(value)


def cmd_dist(args):
    th = _theory(args, (TheoryId.CSStar, TheoryId.CSBot))
    t1, t2 = parse_term(args.left), parse_term(args.right)
    d = _metric(args, generators(t1) | generators(t2))
    value = term_distance(t1, t2, d, th)
    return EXIT_OK, {"theory": th.value, "distance": encode_rational(value)}, encode_rational(value)


SUITES = {
    "monad-cp1": lambda n, s: monads.check_monad_laws(monads.MonadId.CP1, n, s),
    "monad-cplus1": lambda n, s: monads.check_monad_laws(monads.MonadId.CPLUS1, n, s),
    "monad-cdown": lambda n, s: monads.check_monad_laws(monads.MonadId.CDOWN, n, s),
    "mutant-cp1": lambda n, s: monads.check_monad_laws(
        monads.MonadId.CP1, n, s, mult_fn=monads.mutant_mult_cp1
    ),
    "distributive-gamma": lambda n, s: monads.check_distributive_law(n, s),
    "distributive-gamma-top": lambda n, s: monads.check_distributive_law(n, s, use_top=True),
    "monad-map-gamma": lambda n, s: monads.check_monad_map("gamma", n, s),
    "monad-map-xi": lambda n, s: monads.check_monad_map("xi", n, s),
    "nonexpansive-xi": lambda n, s: check_nonexpansive("xi_hat", n, seed=s),
    "nonexpansive-gamma": lambda n, s: check_nonexpansive("gamma_hat", n, seed=s),
    "nonexpansive-mu": lambda n, s: check_nonexpansive("mu_cplus1_hat", n, seed=s),
}


def _show(v) -> str:
    return encode_rational(v) if isinstance(v, Fraction) else repr(v)


def cmd_laws(args):
    report = SUITES[args.suite](args.samples, args.seed)
    failures = [
        {"law": f.law, "value": _show(f.value), "lhs": _show(f.lhs), "rhs": _show(f.rhs)}
        for f in report.failures
    ]
    record = {
        "suite": args.suite,
        "samples": report.samples,
        "passed": report.passed,
        "failures": failures,
    }
    witness = getattr(report, "witness", None)
    if witness is not None:
        record["witness"] = {"in": encode_rational(witness[0]), "out": encode_rational(witness[1])}
    return (EXIT_OK if report.passed else EXIT_NEGATIVE), record, report.summary()


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="csmonads", description="Convex-set monads, their theories and process equivalences."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    theory = argparse.ArgumentParser(add_help=False)
    theory.add_argument("--theory", choices=sorted(THEORIES), default="cs-star")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", parents=[common, theory], help="canonical value of a term")
    p.add_argument("term")
    p.set_defaults(run=cmd_norm)

    for name, fn, what in (
        ("eq", cmd_eq, "terms"),
        ("prove", cmd_prove, "processes"),
        ("bisim", cmd_bisim, "processes"),
        ("dist", cmd_dist, "terms"),
    ):
        p = sub.add_parser(name, parents=[common, theory], help=f"compare two {what}")
        p.add_argument("left")
        p.add_argument("right")
        if name == "dist":
            p.add_argument("--metric", help="metric table file (default: discrete)")
        p.set_defaults(run=fn)

    p = sub.add_parser("laws", parents=[common], help="run a law-checking suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_laws)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        status, record, text = args.run(args)
    except CertificateError as exc:
        print(f"error: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (_Usage, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        print(json.dumps({"command": args.command, **record}, sort_keys=True, indent=2))
    else:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
