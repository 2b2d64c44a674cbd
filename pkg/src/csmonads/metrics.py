"""Exact Kantorovich, Hausdorff–Kantorovich and coproduct distances.

Every distance is an exact :class:`~fractions.Fraction` obtained from the
rational simplex; there are no tolerances anywhere.

Ground distances are plain callables ``d(a, b)``, so metrics can be stacked:
``hk_maybe`` over sets of sets uses ``lambda a, b: hk_maybe(a, b, d)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .convsets import STAR, ConvexSet, Dist, MaybeSet, element_key, gamma, xi
from .exactlp import EQ, Constraint, LinearProgram, Status, solve_lp
from .monads import LawReport, mult_cplus1
from .theories import Term, TheoryId, generators, interpret, parse_rational

__all__ = [
    "MetricAxiomError",
    "FinMetric",
    "CoproductMetric",
    "plus_one",
    "kantorovich",
    "directed_hk",
    "hk_distance",
    "hk_maybe",
    "term_distance",
    "parse_metric",
    "format_metric",
    "NonexpansiveReport",
    "check_nonexpansive",
    "GAMMA_COUNTEREXAMPLE",
    "MU_COUNTEREXAMPLE",
]

Ground = Callable[[object, object], Fraction]


class MetricAxiomError(ValueError):
    """A metric table violates an axiom; ``triple`` names the witnesses."""

    def __init__(self, axiom: str, triple: tuple, detail: str = ""):
        names = ", ".join(map(str, triple))
        super().__init__(f"{axiom} violated at ({names})" + (f": {detail}" if detail else ""))
        self.axiom = axiom
        self.triple = triple


class FinMetric:
    """A 1-bounded metric on a finite ordered carrier, validated exactly.

    With ``pseudo=True`` distinct points may be at distance 0.
    """

    def __init__(self, carrier: Sequence, table, pseudo: bool = False):
        self.carrier = tuple(carrier)
        if len(set(self.carrier)) != len(self.carrier):
            raise ValueError("carrier elements must be distinct")
        self.pseudo = pseudo
        self._index = {x: i for i, x in enumerate(self.carrier)}
        n = len(self.carrier)
        if isinstance(table, dict):
            rows = [[None] * n for _ in range(n)]
            for i in range(n):
                rows[i][i] = Fraction(0)
            for (a, b), v in table.items():
                i, j = self._index[a], self._index[b]
                rows[i][j] = Fraction(v)
                if rows[j][i] is None:
                    rows[j][i] = Fraction(v)
            if any(v is None for r in rows for v in r):
                raise ValueError("metric table is incomplete")
        else:
            rows = [[Fraction(v) for v in r] for r in table]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ValueError(f"metric table must be {n}x{n}")
        self.table = tuple(tuple(r) for r in rows)
        self._validate()

    @classmethod
    def discrete(cls, carrier: Iterable) -> "FinMetric":
        carrier = tuple(carrier)
        n = len(carrier)
        return cls(carrier, [[Fraction(int(i != j)) for j in range(n)] for i in range(n)])

    def _validate(self):
        c, t = self.carrier, self.table
        n = len(c)
        for i in range(n):
            if t[i][i] != 0:
                raise MetricAxiomError("reflexivity", (c[i], c[i]), f"d = {t[i][i]}")
            for j in range(n):
                v = t[i][j]
                if not 0 <= v <= 1:
                    raise MetricAxiomError("1-boundedness", (c[i], c[j]), f"d = {v}")
                if v != t[j][i]:
                    raise MetricAxiomError("symmetry", (c[i], c[j]))
                if i != j and v == 0 and not self.pseudo:
                    raise MetricAxiomError("identity of indiscernibles", (c[i], c[j]))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if t[i][k] > t[i][j] + t[j][k]:
                        raise MetricAxiomError(
                            "triangle inequality",
                            (c[i], c[j], c[k]),
                            f"{t[i][k]} > {t[i][j]} + {t[j][k]}",
                        )

    def __contains__(self, x) -> bool:
        return x in self._index

    def __call__(self, x, y) -> Fraction:
        try:
            return self.table[self._index[x]][self._index[y]]
        except KeyError:
            bad = x if x not in self._index else y
            raise ValueError(f"{bad!r} is not in the metric's carrier") from None

    def __eq__(self, other):
        return isinstance(other, FinMetric) and (self.carrier, self.table) == (
            other.carrier,
            other.table,
        )

    def __hash__(self):
        return hash((self.carrier, self.table))

    def __repr__(self):
        return f"FinMetric({list(self.carrier)!r})"


@dataclass(frozen=True)
class CoproductMetric:
    """``d1 + d2``: each summand keeps its metric, cross distances are 1."""

    left: FinMetric
    right: FinMetric

    def __post_init__(self):
        if set(self.left.carrier) & set(self.right.carrier):
            raise ValueError("coproduct summands must be disjoint")

    @property
    def carrier(self) -> tuple:
        return self.left.carrier + self.right.carrier

    def __contains__(self, x):
        return x in self.left or x in self.right

    def __call__(self, x, y) -> Fraction:
        for d in (self.left, self.right):
            if x in d and y in d:
                return d(x, y)
        if x not in self or y not in self:
            bad = x if x not in self else y
            raise ValueError(f"{bad!r} is not in the metric's carrier")
        return Fraction(1)


_ONE = FinMetric((STAR,), [[0]])


def plus_one(d: FinMetric) -> CoproductMetric:
    """``d + d_1̂`` on ``X+1``."""
    return CoproductMetric(d, _ONE)


# ---------------------------------------------------------------------------
# Kantorovich


def kantorovich(phi: Dist, psi: Dist, d: Ground) -> Fraction:
    """Minimum transport cost over all couplings of ``phi`` and ``psi``."""
    xs, ys = phi.items, psi.items
    if len(xs) == 1 or len(ys) == 1:
        # a Dirac marginal admits exactly one coupling
        return sum((w * v * d(a, b) for a, w in xs for b, v in ys), Fraction(0))
    m, n = len(xs), len(ys)
    cost = [d(a, b) for a, _ in xs for b, _ in ys]
    cons = []
    for i, (_, w) in enumerate(xs):
        row = [Fraction(0)] * (m * n)
        for j in range(n):
            row[i * n + j] = Fraction(1)
        cons.append(Constraint(tuple(row), EQ, w))
    for j, (_, v) in enumerate(ys):
        row = [Fraction(0)] * (m * n)
        for i in range(m):
            row[i * n + j] = Fraction(1)
        cons.append(Constraint(tuple(row), EQ, v))
    res = solve_lp(LinearProgram(tuple(cost), tuple(cons)))
    assert res.status is Status.OPTIMAL
    return res.value


# ---------------------------------------------------------------------------
# Hausdorff–Kantorovich


def _inf_to_set(phi: Dist, s: ConvexSet, d: Ground) -> Fraction:
    """``min over psi in s of K(d)(phi, psi)``: one LP over coupling and weights."""
    if len(s.base) == 1:
        return kantorovich(phi, s.base[0], d)
    xs = [a for a, _ in phi.items]
    ys = sorted({b for psi in s.base for b in psi.support}, key=element_key)
    m, n, k = len(xs), len(ys), len(s.base)
    nv = m * n + k
    cost = [d(a, b) for a in xs for b in ys] + [Fraction(0)] * k
    cons = []
    for i, (_, w) in enumerate(phi.items):
        row = [Fraction(0)] * nv
        for j in range(n):
            row[i * n + j] = Fraction(1)
        cons.append(Constraint(tuple(row), EQ, w))
    for j, b in enumerate(ys):
        row = [Fraction(0)] * nv
        for i in range(m):
            row[i * n + j] = Fraction(1)
        for l, psi in enumerate(s.base):
            row[m * n + l] = -psi.weight(b)
        cons.append(Constraint(tuple(row), EQ, Fraction(0)))
    cons.append(Constraint(tuple([Fraction(0)] * (m * n) + [Fraction(1)] * k), EQ, Fraction(1)))
    res = solve_lp(LinearProgram(tuple(cost), tuple(cons)))
    assert res.status is Status.OPTIMAL
    return res.value


def directed_hk(s1: ConvexSet, s2: ConvexSet, d: Ground) -> Fraction:
    """``sup over phi in s1 of inf over psi in s2 of K(d)(phi, psi)``.

    ``phi -> inf K(d)(phi, s2)`` is convex, so the sup is attained on the base.
    """
    return max(_inf_to_set(phi, s2, d) for phi in s1.base)


def _hk(s1: ConvexSet, s2: ConvexSet, d: Ground) -> Fraction:
    if s1 == s2:
        return Fraction(0)
    return max(directed_hk(s1, s2, d), directed_hk(s2, s1, d))


def _check_carrier(s: ConvexSet, d) -> None:
    for e in s.support:
        if e is not STAR and e not in d:
            raise ValueError(f"{e!r} is not in the metric's carrier")


def hk_distance(s1: ConvexSet, s2: ConvexSet, d: FinMetric) -> Fraction:
    """``HK(K(d + d_1̂))`` between sets of subdistributions over ``d``'s carrier."""
    _check_carrier(s1, d)
    _check_carrier(s2, d)
    return _hk(s1, s2, plus_one(d))


def hk_maybe(v1: MaybeSet, v2: MaybeSet, d: Ground) -> Fraction:
    """``HK(K(d)) + d_1̂`` on ``C(X)+1``."""
    if v1 is STAR or v2 is STAR:
        return Fraction(0) if v1 is v2 else Fraction(1)
    if isinstance(d, FinMetric):
        for s in (v1, v2):
            if STAR in s.support:
                raise ValueError("hk_maybe takes sets over X; use hk_distance on X+1")
            _check_carrier(s, d)
    return _hk(v1, v2, d)


def term_distance(t1: Term, t2: Term, space: FinMetric, th: TheoryId) -> Fraction:
    """Distance of two terms in the free quantitative algebra over ``space``."""
    if th is TheoryId.CSBotBH:
        raise ValueError("no quantitative free model for cs-bot-bh")
    unknown = (generators(t1) | generators(t2)) - set(space.carrier)
    if unknown:
        raise ValueError(f"unknown generator(s): {', '.join(sorted(unknown))}")
    return hk_distance(interpret(t1, th), interpret(t2, th), space)


# ---------------------------------------------------------------------------
# metric table files


def parse_metric(text: str) -> FinMetric:
    """Header line of names, then the lower triangle row by row, diagonal included.

    Blank lines and ``#`` comments are ignored.
    """
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ValueError("empty metric file")
    names = lines[0].split()
    if len(set(names)) != len(names):
        raise ValueError("duplicate carrier names in header")
    rows = lines[1:]
    if len(rows) != len(names):
        raise ValueError(f"expected {len(names)} matrix rows, got {len(rows)}")
    table = {}
    for i, line in enumerate(rows):
        cells = line.split()
        if len(cells) != i + 1:
            raise ValueError(f"row {i + 1} must have {i + 1} entries, got {len(cells)}")
        for j, tok in enumerate(cells):
            table[names[i], names[j]] = parse_rational(tok)
    return FinMetric(names, table)


def format_metric(d: FinMetric) -> str:
    out = [" ".join(map(str, d.carrier))]
    for i in range(len(d.carrier)):
        out.append(" ".join(f"{v.numerator}/{v.denominator}" for v in d.table[i][: i + 1]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# non-expansiveness


@dataclass
class NonexpansiveReport(LawReport):
    """Violations of ``out <= in``; ``witness`` is the fixed counterexample, if any."""

    witness: tuple[Fraction, Fraction] | None = None
    max_excess: Fraction = field(default_factory=Fraction)

    def record(self, value, d_in: Fraction, d_out: Fraction) -> None:
        self.samples += 1
        if d_out > d_in:
            self.check("non-expansive", value, d_out, d_in)
            self.max_excess = max(self.max_excess, d_out - d_in)

    def record_witness(self, value, d_in: Fraction, d_out: Fraction) -> None:
        """Record the fixed counterexample; it counts as a failure but not as a sample."""
        self.witness = (d_in, d_out)
        if d_out > d_in:
            self.check("non-expansive (witness)", value, d_out, d_in)
            self.max_excess = max(self.max_excess, d_out - d_in)


def _sub(pairs) -> Dist:
    return Dist([(e, Fraction(w)) for e, w in pairs])


#: S1 = {½x + ½⋆}, S2 = {δx}: inputs at HK distance 1/2, gamma images at 1
GAMMA_COUNTEREXAMPLE = (
    ConvexSet([_sub([("x", Fraction(1, 2)), (STAR, Fraction(1, 2))])]),
    ConvexSet([Dist.dirac("x")]),
)

_DX = ConvexSet([Dist.dirac("x")])
#: S1 = {½{δx} + ½⋆}, S2 = {δ_{δx}}: inputs at 1/2, multiplied at 1
MU_COUNTEREXAMPLE = (
    ConvexSet([_sub([(_DX, Fraction(1, 2)), (STAR, Fraction(1, 2))])]),
    ConvexSet([Dist.dirac(_DX)]),
)


def _random_set(rng: random.Random, elements, max_base=3, den=6) -> ConvexSet:
    elements = list(dict.fromkeys(elements))
    dists = []
    for _ in range(rng.randint(1, max_base)):
        k = rng.randint(1, min(3, len(elements), den))
        supp = rng.sample(list(elements), k)
        cuts = sorted(rng.sample(range(1, den), k - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
        dists.append(Dist({e: Fraction(p, den) for e, p in zip(supp, parts)}))
    return ConvexSet(dists)


def check_nonexpansive(
    name: str, samples: int = 100, d: FinMetric | None = None, seed: int = 0
) -> NonexpansiveReport:
    """Compare output and input distances of ``xi_hat``, ``gamma_hat`` or ``mu_cplus1_hat``."""
    d = d or FinMetric.discrete(("x", "y", "z"))
    rng = random.Random(seed)
    report = NonexpansiveReport(name)
    xs = list(d.carrier)
    if name == "xi_hat":
        for _ in range(samples):
            s1, s2 = (_random_set(rng, xs + [STAR]) for _ in range(2))
            report.record((s1, s2), hk_distance(s1, s2, d), hk_distance(xi(s1), xi(s2), d))
        return report
    if name == "gamma_hat":
        s1, s2 = GAMMA_COUNTEREXAMPLE
        dx = FinMetric.discrete(["x"])
        report.record_witness((s1, s2), hk_distance(s1, s2, dx), hk_maybe(gamma(s1), gamma(s2), dx))
        for _ in range(samples):
            s1, s2 = (_random_set(rng, xs + [STAR]) for _ in range(2))
            report.record((s1, s2), hk_distance(s1, s2, d), hk_maybe(gamma(s1), gamma(s2), d))
        return report
    if name == "mu_cplus1_hat":
        s1, s2 = MU_COUNTEREXAMPLE
        report.record_witness((s1, s2), *_mu_distances(s1, s2, FinMetric.discrete(["x"])))
        for _ in range(samples):
            pool = [_random_set(rng, xs, max_base=2) for _ in range(2)] + [STAR]
            v1, v2 = (_random_set(rng, pool, max_base=2) for _ in range(2))
            report.record((v1, v2), *_mu_distances(v1, v2, d))
        return report
    raise ValueError("name must be one of xi_hat, gamma_hat, mu_cplus1_hat")


def _mu_distances(v1: MaybeSet, v2: MaybeSet, d: FinMetric) -> tuple[Fraction, Fraction]:
    """Input distance on ``C(C(X)+1)+1`` and output distance on ``C(X)+1``."""
    inner = lambda a, b: hk_maybe(a, b, d)  # noqa: E731
    return hk_maybe(v1, v2, inner), hk_maybe(mult_cplus1(v1), mult_cplus1(v2), d)
