"""Terms of pointed convex semilattices and equality modulo three theories.

Equality is decided semantically: both terms are interpreted in the free
algebra of the theory, where canonical values compare structurally.

``CSStar``   pointed convex semilattices            free algebra ``C(X+1)``
``CSBot``    ... with bottom (``x ⊕ ⋆ = x``)          bottom-closed sets, ``xi``
``CSBotBH``  ... with bottom and black hole          ``C(X)+1``, ``gamma``
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .convsets import STAR, ConvexSet, Dist, MaybeSet, convex_union, gamma, wms, xi

__all__ = [
    "Gen",
    "Star",
    "Plus",
    "Oplus",
    "Term",
    "TermSyntaxError",
    "TheoryId",
    "parse_term",
    "format_term",
    "generators",
    "rename",
    "interpret",
    "theory_equal",
    "kappa",
    "oplus_n",
    "plus_n",
]


@dataclass(frozen=True)
class Gen:
    name: str


@dataclass(frozen=True)
class Star:
    pass


@dataclass(frozen=True)
class Plus:
    p: Fraction
    left: "Term"
    right: "Term"

    def __post_init__(self):
        p = Fraction(self.p)
        if not 0 < p < 1:
            raise ValueError(f"probability {p} not in (0,1)")
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class Oplus:
    left: "Term"
    right: "Term"


Term = Union[Gen, Star, Plus, Oplus]


class TheoryId(enum.Enum):
    CSStar = "cs-star"
    CSBot = "cs-bot"
    CSBotBH = "cs-bot-bh"


# ---------------------------------------------------------------------------
# parsing and printing


class TermSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_IDENT = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")
_RATIONAL = re.compile(r"[0-9]+(?:/[0-9]+)?\Z")


def _tokenize(text: str):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        out.append((m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    if text[pos:].strip():
        raise TermSyntaxError("unexpected character", pos)
    return out


def parse_rational(tok: str, pos: int = 0) -> Fraction:
    if not _RATIONAL.match(tok):
        raise TermSyntaxError(f"expected a rational, got {tok!r}", pos)
    try:
        return Fraction(tok)
    except ZeroDivisionError:
        raise TermSyntaxError("zero denominator", pos) from None


def parse_term(text: str) -> Term:
    """Parse ``term := ident | star | (oplus term term) | (pplus q term term)``."""
    toks = _tokenize(text)
    term, i = _parse(toks, 0, len(text))
    if i != len(toks):
        raise TermSyntaxError("trailing input", toks[i][1])
    return term


def _parse(toks, i, end):
    if i >= len(toks):
        raise TermSyntaxError("unexpected end of input", end)
    tok, pos = toks[i]
    if tok == ")":
        raise TermSyntaxError("unexpected ')'", pos)
    if tok != "(":
        if tok == "star":
            return Star(), i + 1
        if not _IDENT.match(tok):
            raise TermSyntaxError(f"invalid identifier {tok!r}", pos)
        return Gen(tok), i + 1
    if i + 1 >= len(toks):
        raise TermSyntaxError("unexpected end of input", end)
    head, hpos = toks[i + 1]
    if head == "oplus":
        left, j = _parse(toks, i + 2, end)
        right, j = _parse(toks, j, end)
        term = Oplus(left, right)
    elif head == "pplus":
        if i + 2 >= len(toks):
            raise TermSyntaxError("unexpected end of input", end)
        ptok, ppos = toks[i + 2]
        p = parse_rational(ptok, ppos)
        if not 0 < p < 1:
            raise TermSyntaxError(f"probability {p} not in (0,1)", ppos)
        left, j = _parse(toks, i + 3, end)
        right, j = _parse(toks, j, end)
        term = Plus(p, left, right)
    else:
        raise TermSyntaxError(f"unknown operator {head!r}", hpos)
    if j >= len(toks):
        raise TermSyntaxError("missing ')'", end)
    if toks[j][0] != ")":
        raise TermSyntaxError("expected ')'", toks[j][1])
    return term, j + 1


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def format_term(t: Term) -> str:
    """Inverse of :func:`parse_term`."""
    if isinstance(t, Gen):
        return t.name
    if isinstance(t, Star):
        return "star"
    if isinstance(t, Oplus):
        return f"(oplus {format_term(t.left)} {format_term(t.right)})"
    return f"(pplus {format_rational(t.p)} {format_term(t.left)} {format_term(t.right)})"


def rename(t: Term, f) -> Term:
    """Substitute generator ``g`` by ``Gen(f(g))``."""
    if isinstance(t, Gen):
        return Gen(f(t.name))
    if isinstance(t, Star):
        return t
    if isinstance(t, Oplus):
        return Oplus(rename(t.left, f), rename(t.right, f))
    return Plus(t.p, rename(t.left, f), rename(t.right, f))


def generators(t: Term) -> set:
    if isinstance(t, Gen):
        return {t.name}
    if isinstance(t, Star):
        return set()
    return generators(t.left) | generators(t.right)


# ---------------------------------------------------------------------------
# free-algebra semantics


_STAR_SET = ConvexSet.dirac(STAR)


def _free(t: Term) -> ConvexSet:
    if isinstance(t, Gen):
        return ConvexSet.dirac(t.name)
    if isinstance(t, Star):
        return _STAR_SET
    left, right = _free(t.left), _free(t.right)
    if isinstance(t, Oplus):
        return convex_union(left, right)
    return wms(Dist([(left, t.p), (right, 1 - t.p)]))


def interpret(t: Term, th: TheoryId, carrier: Iterable[str] | None = None):
    """Canonical value of ``t`` in the free algebra of ``th``.

    ``carrier``, if given, must contain every generator of ``t``.
    """
    if carrier is not None:
        unknown = generators(t) - set(carrier)
        if unknown:
            raise ValueError(f"unknown generator(s): {', '.join(sorted(unknown))}")
    s = _free(t)
    if th is TheoryId.CSStar:
        return s
    if th is TheoryId.CSBot:
        return xi(s)
    return gamma(s)


def theory_equal(t1: Term, t2: Term, th: TheoryId) -> bool:
    return interpret(t1, th) == interpret(t2, th)


# ---------------------------------------------------------------------------
# representatives


def oplus_n(terms: Sequence[Term]) -> Term:
    """Left-nested ``t1 ⊕ t2 ⊕ ... ⊕ tn``."""
    if not terms:
        raise ValueError("empty ⊕")
    acc = terms[0]
    for t in terms[1:]:
        acc = Oplus(acc, t)
    return acc


def plus_n(pairs: Sequence[tuple[Fraction, Term]]) -> Term:
    """Left-nested convex sum ``Σ pᵢ tᵢ`` (weights summing to 1, zeros skipped)."""
    pairs = [(Fraction(p), t) for p, t in pairs if p]
    if sum(p for p, _ in pairs) != 1:
        raise ValueError("weights of a convex sum must add up to 1")
    mass, acc = pairs[0]
    for p, t in pairs[1:]:
        total = mass + p
        acc = Plus(mass / total, acc, t)
        mass = total
    return acc


def _element_term(e) -> Term:
    if e is STAR:
        return Star()
    if isinstance(e, str):
        return Gen(e)
    raise TypeError(f"no term for carrier element {e!r}")


def kappa(s: MaybeSet) -> Term:
    """A term denoting ``s``: ⊕ over the base of the convex sums of each point.

    Both folds follow the fixed carrier order, so the result is canonical only
    up to the axioms.
    """
    if s is STAR:
        return Star()
    return oplus_n([plus_n([(w, _element_term(e)) for e, w in d.items]) for d in s.base])
