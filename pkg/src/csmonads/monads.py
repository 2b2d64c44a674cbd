"""Units, multiplications and functor actions of the three monads built on
convex sets of (sub)distributions, plus exact law checkers over random samples.

``Cp1``    the monad ``C(-+1)`` of convex sets of subdistributions
``Cplus1`` the monad ``C+1`` of convex Segala systems (sets or a single STAR)
``Cdown``  the monad of bottom-closed convex sets of subdistributions
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .convsets import (
    OUTER,
    STAR,
    ConvexSet,
    Dist,
    MaybeSet,
    Point,
    gamma,
    gamma_top,
    image,
    is_bot_closed,
    wms,
    xi,
)
from .exactlp import CertificateError


class MonadId(enum.Enum):
    CP1 = "Cp1"
    CPLUS1 = "Cplus1"
    CDOWN = "Cdown"


_STAR_SET = ConvexSet.dirac(STAR)


def _eta(m: MonadId, x):
    if m is MonadId.CDOWN:
        return xi(ConvexSet.dirac(x))
    return ConvexSet.dirac(x)


def unit(m: MonadId, x):
    if isinstance(x, Point):
        raise ValueError("the unit is defined on generators, not on the point")
    return _eta(m, x)


def mult_c(s: ConvexSet) -> ConvexSet:
    """Multiplication of ``C``: union of the weighted Minkowski sums of the base."""
    points = []
    for phi in s.base:
        points.extend(wms(phi).base)
    return ConvexSet(points)


def _fold_star(u):
    if u is STAR:
        return _STAR_SET
    if not isinstance(u, ConvexSet):
        raise TypeError(f"expected a convex set or STAR, got {u!r}")
    return u


def mult_cp1(s: ConvexSet) -> ConvexSet:
    """``C(C(X+1)+1) -> C(X+1)``: fold the outer point into ``{δ⋆}``, then flatten."""
    return mult_c(ConvexSet(phi.push(_fold_star) for phi in s.base))


def mult_cplus1(v: MaybeSet) -> MaybeSet:
    """``C(C(X)+1)+1 -> C(X)+1``."""
    if v is STAR:
        return STAR
    g = gamma(v)
    if g is STAR:
        return STAR
    return mult_c(g)


def mult_cdown(s: ConvexSet) -> ConvexSet:
    if not is_bot_closed(s):
        raise ValueError("outer set is not bottom-closed")
    for u in s.support:
        if u is not STAR and not is_bot_closed(u):
            raise ValueError(f"inner set {u!r} is not bottom-closed")
    out = mult_cp1(s)
    if not is_bot_closed(out):
        raise CertificateError("multiplication of bottom-closed sets left the class")
    return out


def iota(v: MaybeSet) -> ConvexSet:
    """``C(X)+1 -> C(X+1)``: a set is widened to ``X+1``; STAR becomes ``{δ⋆}``."""
    return _STAR_SET if v is STAR else v


def _lift(f: Callable) -> Callable:
    def g(e):
        if e is STAR:
            return STAR
        y = f(e)
        if y is STAR:
            raise ValueError("carrier maps must not send generators to the point")
        return y

    return g


def fmap(m: MonadId, f: Callable, v):
    if m is MonadId.CPLUS1:
        if v is STAR:
            return STAR
        return image(v, _lift(f))
    if m is MonadId.CDOWN and not is_bot_closed(v):
        raise ValueError("Cdown values must be bottom-closed")
    return image(v, _lift(f))


_MULT = {
    MonadId.CP1: mult_cp1,
    MonadId.CPLUS1: mult_cplus1,
    MonadId.CDOWN: mult_cdown,
}


def mult(m: MonadId, v):
    return _MULT[m](v)


# ---------------------------------------------------------------------------
# law reports


@dataclass
class Failure:
    law: str
    value: Any
    lhs: Any
    rhs: Any


@dataclass
class LawReport:
    law: str
    samples: int = 0
    failures: list[Failure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, law, value, lhs, rhs):
        if lhs != rhs:
            self.failures.append(Failure(law, value, lhs, rhs))

    def summary(self) -> str:
        verdict = "pass" if self.passed else f"FAIL ({len(self.failures)})"
        return f"{self.law}: {self.samples} samples, {verdict}"


# ---------------------------------------------------------------------------
# sample generation


@dataclass(frozen=True)
class SampleConfig:
    carrier: int = 4
    base: int = 3
    denominator: int = 6
    support: int = 3
    pool: int = 3


NAMES = ("x", "y", "z", "w", "u", "v")


class Sampler:
    """Seeded generator of random canonical values at several nesting levels."""

    def __init__(self, seed: int = 0, config: SampleConfig = SampleConfig()):
        self.rng = random.Random(seed)
        self.cfg = config

    def carrier(self) -> list[str]:
        return list(NAMES[: self.rng.randint(1, self.cfg.carrier)])

    def dist(self, elements, max_support=None) -> Dist:
        rng = self.rng
        elements = list(dict.fromkeys(elements))
        k = rng.randint(1, min(len(elements), max_support or self.cfg.support))
        supp = rng.sample(list(elements), k)
        den = rng.randint(k, max(k, self.cfg.denominator))
        cuts = sorted(rng.sample(range(1, den), k - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
        return Dist({e: Fraction(p, den) for e, p in zip(supp, parts)})

    def cset(self, elements, max_support=None, max_base=None) -> ConvexSet:
        n = self.rng.randint(1, max_base or self.cfg.base)
        return ConvexSet(self.dist(elements, max_support) for _ in range(n))

    def pick(self, *, star_prob: float, make):
        if self.rng.random() < star_prob:
            return STAR
        return make()

    def f_on(self, xs):
        """Random map between generator carriers."""
        target = self.carrier()
        table = {x: self.rng.choice(target) for x in xs}
        return lambda e: table[e]

    # monad-shaped values
    def level1(self, m: MonadId, xs):
        if m is MonadId.CP1:
            return self.cset(xs + [STAR])
        if m is MonadId.CDOWN:
            return xi(self.cset(xs + [STAR]))
        return self.pick(star_prob=0.2, make=lambda: self.cset(xs))

    def wrap(self, m: MonadId, pool, small=False):
        """One more monad layer over ``pool`` (whose point, if any, is STAR)."""
        kw = dict(max_support=2, max_base=2) if small else {}
        elements = [e for e in dict.fromkeys(pool) if e is not STAR] + [STAR]
        if m is MonadId.CPLUS1:
            return self.pick(star_prob=0.15, make=lambda: self.cset(elements, **kw))
        s = self.cset(elements, **kw)
        return xi(s) if m is MonadId.CDOWN else s

    def level2(self, m: MonadId, xs, small=False):
        pool = [self.level1(m, xs) for _ in range(self.cfg.pool)]
        return self.wrap(m, pool, small)

    def level3(self, m: MonadId, xs):
        pool = [self.level2(m, xs, small=True) for _ in range(2)]
        return self.wrap(m, pool, small=True)


# ---------------------------------------------------------------------------
# law checkers


def check_monad_laws(
    m: MonadId,
    samples: int = 100,
    seed: int = 0,
    config: SampleConfig = SampleConfig(),
    mult_fn: Callable | None = None,
) -> LawReport:
    """Both unit laws and associativity, checked by exact equality."""
    mu = mult_fn or _MULT[m]
    sm = Sampler(seed, config)
    report = LawReport(f"monad-laws[{m.value}]")
    for _ in range(samples):
        xs = sm.carrier()
        t = sm.level1(m, xs)
        report.check("left-unit", t, mu(_eta(m, t)), t)
        report.check("right-unit", t, mu(_tmap(m, lambda e: _eta(m, e), t)), t)
        ttt = sm.level3(m, xs)
        lhs = mu(mu(ttt))
        rhs = mu(_tmap(m, mu, ttt))
        report.check("associativity", ttt, lhs, rhs)
        report.samples += 1
    return report


def _tmap(m: MonadId, f: Callable, v):
    """Functor action for arbitrary maps between (possibly nested) carriers."""
    if m is MonadId.CPLUS1:
        return STAR if v is STAR else image(v, f)
    return image(v, lambda e: STAR if e is STAR else f(e))


def _gamma_fns(use_top: bool):
    return gamma_top if use_top else gamma


def check_distributive_law(
    samples: int = 100,
    seed: int = 0,
    config: SampleConfig = SampleConfig(),
    use_top: bool = False,
) -> LawReport:
    """The four distributive-law equations of ``gamma`` (or ``gamma_top``) plus naturality."""
    g = _gamma_fns(use_top)
    sm = Sampler(seed, config)
    report = LawReport("distributive-law[" + ("gamma_top" if use_top else "gamma") + "]")
    for _ in range(samples):
        xs = sm.carrier()
        s = sm.cset(xs)
        report.check("unit-left", s, g(s), s)

        w = sm.rng.choice(xs + [STAR])
        report.check("unit-right", w, g(ConvexSet.dirac(w)), STAR if w is STAR else ConvexSet.dirac(w))

        pool = [sm.cset(xs + [STAR]) for _ in range(config.pool)]
        cc2 = sm.cset(pool, max_support=2)
        lhs = g(mult_c(cc2))
        inner = g(image(cc2, g))
        rhs = STAR if inner is STAR else mult_c(inner)
        report.check("multiplication-C", cc2, lhs, rhs)

        s4 = sm.cset(xs + [STAR, OUTER])
        lhs = g(image(s4, lambda e: STAR if e is OUTER else e))
        g1 = g(s4, OUTER)
        rhs = STAR if g1 is STAR else g(g1)
        report.check("multiplication-1", s4, lhs, rhs)

        s5 = sm.cset(xs + [STAR])
        f = _lift(sm.f_on(xs))
        lhs = g(image(s5, f))
        gs = g(s5)
        rhs = STAR if gs is STAR else image(gs, f)
        report.check("naturality", s5, lhs, rhs)
        report.samples += 1
    return report


def check_monad_map(
    which: str,
    samples: int = 100,
    seed: int = 0,
    config: SampleConfig = SampleConfig(),
) -> LawReport:
    """Unit preservation and the multiplication square for ``gamma`` or ``xi``."""
    if which not in ("gamma", "xi"):
        raise ValueError("monad map must be 'gamma' or 'xi'")
    sm = Sampler(seed, config)
    report = LawReport(f"monad-map[{which}]")
    for _ in range(samples):
        xs = sm.carrier()
        x = sm.rng.choice(xs)
        s = sm.level2(MonadId.CP1, xs)
        if which == "gamma":
            report.check("unit", x, gamma(unit(MonadId.CP1, x)), unit(MonadId.CPLUS1, x))
            lhs = gamma(mult_cp1(s))
            outer = gamma(s)
            rhs = STAR if outer is STAR else mult_cplus1(image(outer, gamma))
            report.check("multiplication", s, lhs, rhs)
        else:
            report.check("unit", x, xi(unit(MonadId.CP1, x)), unit(MonadId.CDOWN, x))
            lhs = xi(mult_cp1(s))
            xi1 = _lift(xi)
            rhs1 = mult_cdown(image(xi(s), xi1))
            rhs2 = mult_cdown(xi(image(s, xi1)))
            report.check("multiplication", s, lhs, rhs1)
            report.check("multiplication-alt", s, lhs, rhs2)
        report.samples += 1
    return report


def mutant_mult_cp1(s: ConvexSet) -> ConvexSet:
    """``mult_cp1`` with the final base reduction dropped (seeded bug)."""
    points = []
    for phi in s.base:
        points.extend(wms(phi.push(_fold_star)).base)
    return ConvexSet.unreduced(points)
