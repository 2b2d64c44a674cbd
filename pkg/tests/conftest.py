from __future__ import annotations

from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from csmonads.convsets import STAR, ConvexSet, Dist

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

NAMES = ("x", "y", "z")


@st.composite
def dists(draw, elements=NAMES + (STAR,), max_support=3, den=6):
    """A distribution with denominators at most ``den``."""
    elements = list(elements)
    k = draw(st.integers(1, min(max_support, len(elements))))
    supp = draw(st.permutations(elements))[:k]
    q = draw(st.integers(k, max(k, den)))
    cuts = sorted(draw(st.sets(st.integers(1, q - 1), min_size=k - 1, max_size=k - 1))) if k > 1 else []
    parts = [b - a for a, b in zip([0] + cuts, cuts + [q])]
    return Dist({e: Fraction(p, q) for e, p in zip(supp, parts)})


@st.composite
def csets(draw, elements=NAMES + (STAR,), max_base=3):
    n = draw(st.integers(1, max_base))
    return ConvexSet(draw(dists(elements)) for _ in range(n))


def rationals(lo=0, hi=1, den=12, open_interval=False):
    """Rationals in ``[lo, hi]`` (or ``(lo, hi)``) with denominators up to ``den``."""
    return (
        st.tuples(st.integers(1, den), st.integers(0, den))
        .map(lambda t: Fraction(t[1], t[0]))
        .filter(lambda q: (lo < q < hi) if open_interval else (lo <= q <= hi))
    )


def random_process(rng, depth: int, probs=(Fraction(1, 2), Fraction(1, 3))):
    """A random process of prefix depth at most ``depth``."""
    from csmonads.process import NDChoice, Nil, PChoice, Prefix

    roll = rng.random()
    if depth == 0 or roll < 0.15:
        return Nil()
    if roll < 0.55:
        return Prefix(random_process(rng, depth - 1, probs))
    left, right = (random_process(rng, depth, probs) if rng.random() < 0.3 else
                   Prefix(random_process(rng, depth - 1, probs)) for _ in range(2))
    if roll < 0.8:
        return NDChoice(left, right)
    return PChoice(rng.choice(probs), left, right)


def height_family(height: int, probs=(Fraction(1, 2), Fraction(1, 3))):
    """Every process whose syntax tree has height at most ``height``."""
    from csmonads.process import NDChoice, Nil, PChoice, Prefix

    family = {Nil()}
    for _ in range(height):
        prev = list(family)
        for a in prev:
            family.add(Prefix(a))
            for b in prev:
                family.add(NDChoice(a, b))
                family.update(PChoice(p, a, b) for p in probs)
    return family


def perturb(rng, p):
    """Rewrite ``p`` at random positions with steps that may or may not preserve behaviour."""
    from csmonads.process import NDChoice, Nil, PChoice, Prefix

    if isinstance(p, Prefix):
        p = Prefix(perturb(rng, p.body))
    elif isinstance(p, NDChoice):
        p = NDChoice(perturb(rng, p.left), perturb(rng, p.right))
    elif isinstance(p, PChoice):
        p = PChoice(p.p, perturb(rng, p.left), perturb(rng, p.right))
    roll = rng.random()
    if roll < 0.08:
        return NDChoice(p, p)
    if roll < 0.16:
        return NDChoice(p, Nil())
    if roll < 0.22:
        return PChoice(Fraction(1, 2), p, Nil())
    if roll < 0.28 and isinstance(p, (NDChoice, PChoice)):
        return NDChoice(p.right, p.left) if isinstance(p, NDChoice) else PChoice(1 - p.p, p.right, p.left)
    if roll < 0.31:
        return Prefix(p)
    return p
