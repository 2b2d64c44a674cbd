"""A finite process algebra with nondeterministic and probabilistic choice.

``P ::= nil | a.P | P (+) P | P +p P``

The operational semantics ``tau`` maps a process to a term whose generators
are processes.  Interpreting that term in the free algebra of a theory gives a
coalgebra, and with it behavioural equivalence, a proof system and a
bisimulation metric.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .exactlp import CertificateError
from .metrics import FinMetric, hk_distance
from .theories import Gen, Oplus, Plus, Star, Term, TheoryId, format_rational, interpret, rename

__all__ = [
    "Nil",
    "Prefix",
    "NDChoice",
    "PChoice",
    "Process",
    "ProcessSyntaxError",
    "parse_process",
    "format_process",
    "depth",
    "tau",
    "reachable",
    "Partition",
    "partition",
    "behavioral_equivalent",
    "Step",
    "Certificate",
    "Refutation",
    "prove",
    "replay",
    "derivable_classes",
    "bisim_distance",
]


class _Proc:
    __slots__ = ()

    def sort_key(self):
        return (depth(self), format_process(self))

    def __str__(self):
        return format_process(self)


@dataclass(frozen=True, repr=False)
class Nil(_Proc):
    def __repr__(self):
        return "nil"


@dataclass(frozen=True, repr=False)
class Prefix(_Proc):
    body: "Process"

    def __repr__(self):
        return format_process(self)


@dataclass(frozen=True, repr=False)
class NDChoice(_Proc):
    left: "Process"
    right: "Process"

    def __repr__(self):
        return format_process(self)


@dataclass(frozen=True, repr=False)
class PChoice(_Proc):
    p: Fraction
    left: "Process"
    right: "Process"

    def __post_init__(self):
        p = Fraction(self.p)
        if not 0 < p < 1:
            raise ValueError(f"probability {p} not in (0,1)")
        object.__setattr__(self, "p", p)

    def __repr__(self):
        return format_process(self)


Process = _Proc


# ---------------------------------------------------------------------------
# syntax


class ProcessSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKENS = re.compile(
    r"\s*(?:(?P<nd>\(\+\))|(?P<lp>\()|(?P<rp>\))|(?P<nil>nil\b)"
    r"|(?P<pow>a\^(?P<n>[0-9]+)\.)|(?P<act>a\.)|(?P<pp>\+(?P<q>[0-9]+(?:/[0-9]+)?)))"
)


def _lex(text: str):
    out, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            out.append(("end", None, pos))
            return out
        m = _TOKENS.match(text, pos)
        if not m:
            raise ProcessSyntaxError(f"unexpected {text[pos]!r}", pos)
        kind = next(k for k in ("nd", "lp", "rp", "nil", "pow", "act", "pp") if m.group(k))
        start = m.start(kind)
        if kind == "pow":
            value = int(m.group("n"))
            if value < 1:
                raise ProcessSyntaxError("exponent must be positive", start)
        elif kind == "pp":
            q = m.group("q")
            try:
                value = Fraction(q)
            except ZeroDivisionError:
                raise ProcessSyntaxError("zero denominator", start) from None
            if not 0 < value < 1:
                raise ProcessSyntaxError(f"probability {value} not in (0,1)", start)
        else:
            value = None
        out.append((kind, value, start))
        pos = m.end()


class _Parser:
    def __init__(self, text):
        self.toks = _lex(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind):
        tok = self.toks[self.i]
        if tok[0] != kind:
            what = "end of input" if tok[0] == "end" else f"token {tok[0]!r}"
            raise ProcessSyntaxError(f"unexpected {what}", tok[2])
        self.i += 1
        return tok

    def choice(self):
        left = self.pchoice()
        while self.peek()[0] == "nd":
            self.i += 1
            left = NDChoice(left, self.pchoice())
        return left

    def pchoice(self):
        left = self.prefix()
        while self.peek()[0] == "pp":
            p = self.take("pp")[1]
            left = PChoice(p, left, self.prefix())
        return left

    def prefix(self):
        kind, value, _ = self.peek()
        if kind == "act":
            self.i += 1
            return Prefix(self.prefix())
        if kind == "pow":
            self.i += 1
            body = self.prefix()
            for _ in range(value):
                body = Prefix(body)
            return body
        if kind == "nil":
            self.i += 1
            return Nil()
        self.take("lp")
        inner = self.choice()
        self.take("rp")
        return inner


def parse_process(text: str) -> Process:
    """Parse with precedence prefix > ``+p`` > ``(+)``, both choices left-associative."""
    parser = _Parser(text)
    proc = parser.choice()
    parser.take("end")
    return proc


def _prec(p: Process) -> int:
    if isinstance(p, NDChoice):
        return 0
    if isinstance(p, PChoice):
        return 1
    return 2


def format_process(p: Process) -> str:
    """Inverse of :func:`parse_process`, with ``a^n.`` for runs of prefixes."""
    if isinstance(p, Nil):
        return "nil"
    if isinstance(p, Prefix):
        n, body = 0, p
        while isinstance(body, Prefix):
            n, body = n + 1, body.body
        head = "a." if n == 1 else f"a^{n}."
        return head + _wrap(body, 2)
    if isinstance(p, NDChoice):
        return f"{_wrap(p.left, 0)} (+) {_wrap(p.right, 1)}"
    return f"{_wrap(p.left, 1)} +{format_rational(p.p)} {_wrap(p.right, 2)}"


def _wrap(p: Process, level: int) -> str:
    s = format_process(p)
    return s if _prec(p) >= level else f"({s})"


def depth(p: Process) -> int:
    """Prefix depth: the length of the longest run of transitions."""
    if isinstance(p, Nil):
        return 0
    if isinstance(p, Prefix):
        return 1 + depth(p.body)
    return max(depth(p.left), depth(p.right))


# ---------------------------------------------------------------------------
# operational semantics


def tau(p: Process) -> Term:
    if isinstance(p, Nil):
        return Star()
    if isinstance(p, Prefix):
        return Gen(p.body)
    if isinstance(p, NDChoice):
        return Oplus(tau(p.left), tau(p.right))
    return Plus(p.p, tau(p.left), tau(p.right))


def _term_gens(t: Term, acc: list) -> list:
    if isinstance(t, Gen):
        acc.append(t.name)
    elif not isinstance(t, Star):
        _term_gens(t.left, acc)
        _term_gens(t.right, acc)
    return acc


def _sorted(procs: Iterable[Process]) -> list[Process]:
    return sorted(set(procs), key=lambda q: q.sort_key())


def reachable(*procs: Process) -> list[Process]:
    """Least set containing ``procs`` and closed under generators of ``tau``."""
    seen = set()
    stack = list(procs)
    while stack:
        q = stack.pop()
        if q in seen:
            continue
        seen.add(q)
        stack.extend(_term_gens(tau(q), []))
    return _sorted(seen)


# ---------------------------------------------------------------------------
# behavioural equivalence by partition refinement


@dataclass(frozen=True)
class Partition:
    """Block ids are the positions of the blocks' smallest members in process order."""

    block: dict

    def same(self, p: Process, q: Process) -> bool:
        return self.block[p] == self.block[q]

    def blocks(self) -> list[list[Process]]:
        out: dict = {}
        for q in _sorted(self.block):
            out.setdefault(self.block[q], []).append(q)
        return [out[k] for k in sorted(out)]

    def refines(self, other: "Partition") -> bool:
        """Every block of ``self`` lies inside a block of ``other``."""
        return all(len({other.block[q] for q in b}) == 1 for b in self.blocks())


def _canonical_ids(procs: list[Process], signature) -> dict:
    ids, out = {}, {}
    for i, q in enumerate(procs):
        out[q] = ids.setdefault(signature(q), i)
    return out


def _continuation(q: Process, th: TheoryId, name):
    return interpret(rename(tau(q), name), th)


def partition(procs: Iterable[Process], th: TheoryId) -> Partition:
    """Largest behavioural equivalence on a ``tau``-closed set of processes."""
    procs = _sorted(procs)
    block = {q: 0 for q in procs}
    count = 1
    while True:
        new = _canonical_ids(
            procs, lambda q: (block[q], _continuation(q, th, block.__getitem__))
        )
        n = len(set(new.values()))
        block = new
        if n == count:
            return Partition(block)
        count = n


def behavioral_equivalent(p: Process, q: Process, th: TheoryId) -> tuple[bool, Partition]:
    part = partition(reachable(p, q), th)
    return part.same(p, q), part


# ---------------------------------------------------------------------------
# proof system


def derivable_classes(procs: Iterable[Process], th: TheoryId) -> dict:
    """Classes of the derivability relation, computed stratum by stratum.

    A process's continuation only mentions processes of smaller depth, so one
    pass in depth order settles each class from already-settled ones.
    """
    procs = _sorted(procs)
    cls: dict = {}
    ids: dict = {}
    for i, q in enumerate(procs):  # sorted by depth first
        value = _continuation(q, th, cls.__getitem__)
        cls[q] = ids.setdefault(value, i)
    return cls


@dataclass(frozen=True)
class Step:
    """``tau(left)`` and ``tau(right)`` both denote ``value`` modulo the certificate."""

    left: Process
    right: Process
    value: object


@dataclass(frozen=True)
class Certificate:
    goal: tuple[Process, Process]
    theory: TheoryId
    steps: tuple[Step, ...]

    @property
    def subgoals(self) -> list[tuple[Process, Process]]:
        return [(s.left, s.right) for s in self.steps[1:]]

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Refutation:
    """The continuations have different canonical values; no proof exists."""

    goal: tuple[Process, Process]
    theory: TheoryId
    left_value: object
    right_value: object

    def __bool__(self):
        return False


def _representatives(cls: dict) -> dict:
    rep: dict = {}
    for q in _sorted(cls):
        rep.setdefault(cls[q], q)
    return {q: rep[cls[q]] for q in cls}


def prove(p: Process, q: Process, th: TheoryId) -> Certificate | Refutation:
    """Derive ``p ~ q`` in the proof system, or refute it."""
    cls = derivable_classes(reachable(p, q), th)
    if cls[p] != cls[q]:
        rep = _representatives(cls)
        return Refutation(
            (p, q), th, _continuation(p, th, rep.__getitem__), _continuation(q, th, rep.__getitem__)
        )
    pairs, seen = [], set()
    todo = [(p, q)]
    while todo:
        left, right = todo.pop(0)
        if (left, right) in seen:
            continue
        seen.add((left, right))
        pairs.append((left, right))
        # generators identified by the derivation become subgoals
        groups: dict = {}
        for g in _term_gens(tau(left), []) + _term_gens(tau(right), []):
            groups.setdefault(cls[g], []).append(g)
        for members in groups.values():
            distinct = _sorted(members)
            todo.extend((distinct[0], other) for other in distinct[1:])
    find = _closure(pairs)
    steps = tuple(Step(a, b, _continuation(a, th, find)) for a, b in pairs)
    cert = Certificate((p, q), th, steps)
    if not replay(cert):
        raise CertificateError(f"proof of {p} ~ {q} failed to replay")
    return cert


def _closure(pairs) -> callable:
    """Representative map of the equivalence closure of ``pairs``."""
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = sorted((ra, rb), key=lambda r: r.sort_key())
            parent[hi] = lo
    return find


def replay(cert: Certificate) -> bool:
    """Check every step modulo the equivalence closure of the listed pairs."""
    if not cert.steps or (cert.steps[0].left, cert.steps[0].right) != cert.goal:
        return False
    find = _closure((s.left, s.right) for s in cert.steps)
    for s in cert.steps:
        lv = _continuation(s.left, cert.theory, find)
        rv = _continuation(s.right, cert.theory, find)
        if not lv == rv == s.value:
            return False
    return True


# ---------------------------------------------------------------------------
# bisimulation metric


def bisim_distance(
    p: Process, q: Process, th: TheoryId, max_rounds: int | None = None
) -> tuple[Fraction, dict]:
    """Least bisimulation (pseudo)metric, by Kleene iteration from the zero table.

    Returns ``d(p, q)`` and the final table over ``reachable(p, q)``.
    """
    if th is TheoryId.CSBotBH:
        raise ValueError("bisimulation metrics are defined for cs-star and cs-bot only")
    procs = reachable(p, q)
    values = {r: interpret(tau(r), th) for r in procs}
    n = len(procs)
    zero = Fraction(0)
    table = [[zero] * n for _ in range(n)]
    limit = max_rounds if max_rounds is not None else max(depth(r) for r in procs) + 2
    for _ in range(limit):
        d = FinMetric(procs, table, pseudo=True)
        new = [[zero] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                v = hk_distance(values[procs[i]], values[procs[j]], d)
                new[i][j] = new[j][i] = v
        if new == table:
            break
        if any(new[i][j] < table[i][j] for i in range(n) for j in range(n)):
            raise CertificateError("bisimulation iterates are not monotone")
        table = new
    else:
        raise CertificateError("bisimulation iteration did not stabilise")
    FinMetric(procs, table, pseudo=True)  # the result must be a pseudometric
    index = {r: i for i, r in enumerate(procs)}
    out = {(a, b): table[index[a]][index[b]] for a in procs for b in procs}
    return out[p, q], out
