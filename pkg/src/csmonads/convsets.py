"""Finitely supported distributions and finitely generated convex sets of them.

A :class:`ConvexSet` is always stored through its unique base (the extreme
points of the polytope), sorted in the fixed carrier order.  Two sets are equal
iff their bases are equal, so every comparison downstream is structural.

Carriers are implicit: a distribution over ``X`` is also a distribution over
``X+1`` with no mass on :data:`STAR`.  Nested carriers (distributions whose
support contains convex sets) are handled by the same code.
"""

from __future__ import annotations

import math
import os
import random
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterable, Sequence, Union

from .exactlp import CertificateError, hull_membership

__all__ = [
    "Point",
    "STAR",
    "OUTER",
    "Dist",
    "ConvexSet",
    "MaybeSet",
    "element_key",
    "is_star",
    "cc",
    "convex_union",
    "wms",
    "gamma",
    "gamma_top",
    "xi",
    "is_bot_closed",
    "contains",
    "image",
]


class Point:
    """A distinguished element of a ``+1`` summand."""

    __slots__ = ("name", "rank")

    def __init__(self, name: str, rank: int):
        self.name = name
        self.rank = rank

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return (_point, (self.rank,))


#: the termination point of ``X+1``
STAR = Point("star", 0)
#: a second, outer point, needed only where ``(X+1)+1`` appears at one level
OUTER = Point("outer", 1)


def _point(rank):
    return STAR if rank == 0 else OUTER


def is_star(v) -> bool:
    return v is STAR


def element_key(e):
    """Total order on carrier elements: points first, then names, then nested values."""
    if isinstance(e, Point):
        return (0, e.rank)
    if isinstance(e, str):
        return (1, e)
    if isinstance(e, int) and not isinstance(e, bool):
        return (2, e)
    return (3, type(e).__name__, e.sort_key())


class Dist:
    """A finitely supported probability distribution with exact weights."""

    __slots__ = ("items", "_hash", "_key")

    def __init__(self, weights):
        pairs = weights.items() if isinstance(weights, dict) else weights
        acc: dict = {}
        for e, w in pairs:
            w = w if isinstance(w, Fraction) else Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w} on {e!r}")
            if w:
                acc[e] = acc.get(e, Fraction(0)) + w
        if not acc:
            raise ValueError("a distribution needs non-empty support")
        if sum(acc.values()) != 1:
            raise ValueError(f"weights sum to {sum(acc.values())}, not 1")
        self.items = tuple(sorted(acc.items(), key=lambda kv: element_key(kv[0])))
        self._hash = None
        self._key = None

    @classmethod
    def dirac(cls, e) -> "Dist":
        return cls(((e, Fraction(1)),))

    @classmethod
    def mix(cls, parts: Iterable[tuple[Fraction, "Dist"]]) -> "Dist":
        acc: dict = {}
        for p, d in parts:
            for e, w in d.items:
                acc[e] = acc.get(e, Fraction(0)) + p * w
        return cls(acc)

    @property
    def support(self) -> tuple:
        return tuple(e for e, _ in self.items)

    def weight(self, e) -> Fraction:
        for x, w in self.items:
            if x is e or x == e:
                return w
        return Fraction(0)

    def as_dict(self) -> dict:
        return dict(self.items)

    def push(self, f: Callable) -> "Dist":
        """Pushforward along ``f``."""
        acc: dict = {}
        for e, w in self.items:
            y = f(e)
            acc[y] = acc.get(y, Fraction(0)) + w
        return Dist(acc)

    def sort_key(self):
        if self._key is None:
            self._key = tuple((element_key(e), w) for e, w in self.items)
        return self._key

    def __eq__(self, other):
        return isinstance(other, Dist) and self.items == other.items

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.items)
        return self._hash

    def __repr__(self):
        if len(self.items) == 1:
            return f"δ({self.items[0][0]!r})"
        return " + ".join(f"{w}·{e!r}" for e, w in self.items)


def _vectors(dists: Sequence[Dist], extra: Sequence[Dist] = ()):
    coords = {}
    for d in list(dists) + list(extra):
        for e, _ in d.items:
            coords.setdefault(e, None)
    order = sorted(coords, key=element_key)
    index = {e: i for i, e in enumerate(order)}

    def vec(d):
        v = [Fraction(0)] * len(order)
        for e, w in d.items:
            v[index[e]] = w
        return v

    return vec


def _functionals(dim: int, count: int) -> list[list[int]]:
    # fixed small-integer directions; a unique maximiser of any linear
    # functional is an extreme point, so these only ever save LP calls
    rng = random.Random(dim)
    return [[rng.randint(-7, 7) for _ in range(dim)] for _ in range(count)]


def _extreme(vectors: list[list[Fraction]]) -> list[int]:
    """Indices of the extreme points among pairwise distinct vectors."""
    n = len(vectors)
    if n <= 2:
        return list(range(n))
    # hulls are invariant under uniform scaling: work on integer vectors
    scale = math.lcm(*(x.denominator for vec in vectors for x in vec))
    vectors = [[int(x * scale) for x in vec] for vec in vectors]
    known = set()
    dim = len(vectors[0])
    directions = [[int(i == c) for i in range(dim)] for c in range(dim)]
    directions += _functionals(dim, 4 * n)
    for a in directions:
        vals = [sum(x * v for x, v in zip(a, vec) if x) for vec in vectors]
        for target in (max(vals), min(vals)):
            hits = [i for i, x in enumerate(vals) if x == target]
            if len(hits) == 1:
                known.add(hits[0])
        if len(known) == n:
            break
    alive = list(range(n))
    for i in range(n):
        if i in known:
            continue
        others = [vectors[j] for j in alive if j != i]
        if hull_membership(vectors[i], others):
            alive.remove(i)
    return alive


#: re-verify convex-linear independence of every freshly computed base.
#: ``_extreme`` is already certified point by point, so this is a second,
#: independent check that costs one extra LP per base point.
VERIFY_BASES = os.environ.get("CSMONADS_VERIFY_BASES", "0") == "1"


def _independent(vectors) -> bool:
    for i in range(len(vectors)):
        others = vectors[:i] + vectors[i + 1:]
        if others and hull_membership(vectors[i], others):
            return False
    return True


class ConvexSet:
    """Non-empty finitely generated convex set, stored by its unique base."""

    __slots__ = ("base", "_hash", "_key")

    def __init__(self, dists: Iterable[Dist]):
        base = _reduce(list(dists))
        self.base = base
        self._hash = None
        self._key = None

    @classmethod
    def _trusted(cls, base: Iterable[Dist]) -> "ConvexSet":
        # caller guarantees irredundancy; only sorting is applied
        obj = cls.__new__(cls)
        obj.base = tuple(sorted(set(base), key=Dist.sort_key))
        if not obj.base:
            raise ValueError("convex sets are non-empty")
        obj._hash = None
        obj._key = None
        return obj

    @classmethod
    def unreduced(cls, dists: Iterable[Dist]) -> "ConvexSet":
        """Wrap generators without removing redundant ones (for mutation tests)."""
        return cls._trusted(dists)

    @classmethod
    def dirac(cls, e) -> "ConvexSet":
        return cls._trusted([Dist.dirac(e)])

    def sort_key(self):
        if self._key is None:
            self._key = tuple(d.sort_key() for d in self.base)
        return self._key

    @property
    def support(self) -> tuple:
        seen = {}
        for d in self.base:
            for e in d.support:
                seen.setdefault(e, None)
        return tuple(sorted(seen, key=element_key))

    def __eq__(self, other):
        return isinstance(other, ConvexSet) and self.base == other.base

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.base)
        return self._hash

    def __len__(self):
        return len(self.base)

    def __iter__(self):
        return iter(self.base)

    def __repr__(self):
        return "cc{" + ", ".join(map(repr, self.base)) + "}"


#: an element of ``C(X)+1``: a convex set or the point STAR
MaybeSet = Union[ConvexSet, Point]


#: memo of computed bases, keyed by the generator set
_BASES: dict = {}
_MEMO_LIMIT = 200_000


def _memo(table: dict, key, compute):
    hit = table.get(key)
    if hit is None:
        if len(table) >= _MEMO_LIMIT:
            table.clear()
        hit = table[key] = compute()
    return hit


def clear_caches() -> None:
    _BASES.clear()
    _XI.clear()


def _reduce(dists: list[Dist]) -> tuple[Dist, ...]:
    if not dists:
        raise ValueError("the convex closure of an empty set is not in C(X)")
    gens = frozenset(dists)
    if len(gens) <= 2:
        return tuple(sorted(gens, key=Dist.sort_key))
    return _memo(_BASES, gens, lambda: _compute_base(gens))


def _compute_base(gens: frozenset) -> tuple[Dist, ...]:
    uniq = sorted(gens, key=Dist.sort_key)
    vec = _vectors(uniq)
    vectors = [vec(d) for d in uniq]
    keep = _extreme(vectors)
    if VERIFY_BASES and not _independent([vectors[i] for i in keep]):
        raise CertificateError("computed base is not convex-linearly independent")
    return tuple(uniq[i] for i in keep)


def cc(dists: Iterable[Dist]) -> ConvexSet:
    """Convex closure, returned in unique-base form."""
    return ConvexSet(dists)


def convex_union(s1: ConvexSet, s2: ConvexSet) -> ConvexSet:
    return ConvexSet(s1.base + s2.base)


def wms(phi: Dist) -> ConvexSet:
    """Weighted Minkowski sum of a distribution over convex sets."""
    for s, _ in phi.items:
        if not isinstance(s, ConvexSet):
            raise TypeError(f"WMS needs a distribution over convex sets, got {s!r}")
    if len(phi.items) == 1:
        return phi.items[0][0]
    # fold one summand at a time, pruning non-extreme partial sums
    partial: list[dict] = [{}]
    for s, p in phi.items:
        nxt = {}
        for acc, d in product(partial, s.base):
            out = dict(acc)
            for e, w in d.items:
                out[e] = out.get(e, Fraction(0)) + p * w
            nxt[tuple(sorted(out.items(), key=lambda kv: element_key(kv[0])))] = out
        partial = list(nxt.values())
        if len(partial) > 2:
            order = sorted({e for m in partial for e in m}, key=element_key)
            vectors = [[m.get(e, Fraction(0)) for e in order] for m in partial]
            partial = [partial[i] for i in _extreme(vectors)]
    return ConvexSet(Dist(m) for m in partial)


def gamma(s: ConvexSet, point: Point = STAR) -> MaybeSet:
    """Face of full distributions (no mass on ``point``), or ``STAR`` if empty."""
    full = [d for d in s.base if d.weight(point) == 0]
    if not full:
        return STAR
    return ConvexSet._trusted(full)


def gamma_top(s: ConvexSet, point: Point = STAR) -> MaybeSet:
    """``s`` itself if every member is full, else ``STAR``."""
    if all(d.weight(point) == 0 for d in s.base):
        return s
    return STAR


def restrict(d: Dist, keep: Iterable, point: Point = STAR) -> Dist:
    """Keep the weights on ``keep`` and move the remaining mass onto ``point``."""
    keep = list(keep)
    kept = [(e, d.weight(e)) for e in keep]
    rest = 1 - sum((w for _, w in kept), Fraction(0))
    return Dist(kept + [(point, rest)])


_XI: dict = {}


def xi(s: ConvexSet, point: Point = STAR) -> ConvexSet:
    """Bottom-closure: the smallest bottom-closed convex set containing ``s``."""
    return _memo(_XI, (s, point.rank), lambda: _xi(s, point))


def _xi(s: ConvexSet, point: Point) -> ConvexSet:
    gens = []
    for d in s.base:
        names = [e for e in d.support if e is not point]
        for r in range(len(names) + 1):
            for sub in combinations(names, r):
                gens.append(restrict(d, sub, point))
    return ConvexSet(gens)


def is_bot_closed(s: ConvexSet, point: Point = STAR) -> bool:
    return xi(s, point) == s


def contains(s: ConvexSet, phi: Dist) -> bool:
    vec = _vectors(s.base, (phi,))
    return bool(hull_membership(vec(phi), [vec(d) for d in s.base]))


def membership(s: ConvexSet, phi: Dist):
    """Like :func:`contains` but returns the certified verdict."""
    vec = _vectors(s.base, (phi,))
    return hull_membership(vec(phi), [vec(d) for d in s.base])


def image(s: ConvexSet, f: Callable) -> ConvexSet:
    """Functor action ``C(f)``: push every base point forward and re-reduce."""
    return ConvexSet(d.push(f) for d in s.base)


def mixture_in(s: ConvexSet, weights: Sequence[Fraction]) -> Dist:
    """The point of ``s`` with the given convex coordinates over its base."""
    return Dist.mix(zip(weights, s.base))
