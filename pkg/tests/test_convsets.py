from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from csmonads import convsets
from csmonads.convsets import (
    OUTER,
    STAR,
    Dist,
    cc,
    contains,
    convex_union,
    gamma,
    gamma_top,
    image,
    is_bot_closed,
    membership,
    mixture_in,
    restrict,
    wms,
    xi,
)
from csmonads.exactlp import hull_membership

from conftest import csets, dists

F = Fraction
half = F(1, 2)
dx, dy, dz, dstar = (Dist.dirac(e) for e in ("x", "y", "z", STAR))


def mix(**kw):
    return Dist({STAR if k == "star" else k: F(v) for k, v in kw.items()})


# --- distributions ------------------------------------------------------------


def test_dist_validation():
    with pytest.raises(ValueError):
        Dist({"x": half})
    with pytest.raises(ValueError):
        Dist({"x": F(3, 2), "y": -half})
    with pytest.raises(ValueError):
        Dist({})


def test_dist_normalises_zero_weights_and_order():
    assert Dist({"y": half, "x": half, "z": 0}) == Dist([("x", half), ("y", half)])
    assert Dist({"y": half, STAR: half}).support == (STAR, "y")


def test_dist_push_and_mix():
    d = mix(x=half, y=half)
    assert d.push(lambda e: "z") == dz
    assert Dist.mix([(half, dx), (half, dy)]) == d


# --- cc and unions -------------------------------------------------------------


def test_cc_removes_midpoint():
    assert cc([dx, dy, mix(x=half, y=half)]).base == (dx, dy)


def test_cc_singleton():
    assert cc([dx]).base == (dx,)


def test_cc_mixed_point_with_star():
    assert cc([mix(x=half, star=half), dx, dstar]).base == (dstar, dx)


def test_cc_empty_rejected():
    with pytest.raises(ValueError):
        cc([])


def test_convex_union_examples():
    s = cc([dx, dy])
    assert convex_union(s, s) == s
    assert convex_union(cc([dx]), cc([dy])).base == (dx, dy)
    assert set(convex_union(cc([dx]), cc([mix(x=half, y=half)])).base) == {dx, mix(x=half, y=half)}


@given(csets())
def test_base_is_convex_linearly_independent(s):
    vec = convsets._vectors(s.base)
    vs = [vec(d) for d in s.base]
    for i, v in enumerate(vs):
        others = vs[:i] + vs[i + 1:]
        if others:
            assert not hull_membership(v, others)


@given(st.lists(dists(), min_size=1, max_size=5))
def test_every_generator_is_in_its_hull(ds):
    s = cc(ds)
    assert all(contains(s, d) for d in ds)


@given(st.lists(dists(), min_size=1, max_size=5), st.randoms(use_true_random=False))
def test_cc_is_order_independent(ds, rnd):
    shuffled = list(ds)
    rnd.shuffle(shuffled)
    assert cc(ds) == cc(shuffled)


def test_independence_recheck_switch(monkeypatch):
    monkeypatch.setattr(convsets, "VERIFY_BASES", True)
    convsets.clear_caches()
    assert cc([dx, dy, dz, mix(x=F(1, 3), y=F(1, 3), z=F(1, 3))]).base == (dx, dy, dz)


# --- WMS -------------------------------------------------------------------------


def test_wms_examples():
    s = cc([dx, dy])
    assert wms(Dist.dirac(s)) == s
    assert wms(Dist([(cc([dx]), half), (cc([dy]), half)])).base == (mix(x=half, y=half),)
    got = wms(Dist([(cc([dx, dy]), half), (cc([dx]), half)]))
    assert set(got.base) == {dx, mix(x=half, y=half)}


def test_wms_needs_sets():
    with pytest.raises(TypeError):
        wms(Dist.dirac("x"))


@given(csets(), csets(), st.sampled_from([F(1, 3), half, F(3, 4)]))
def test_wms_matches_all_combinations(s1, s2, p):
    if s1 == s2:
        return
    brute = cc(Dist.mix([(p, a), (1 - p, b)]) for a in s1.base for b in s2.base)
    assert wms(Dist([(s1, p), (s2, 1 - p)])) == brute


# --- gamma ---------------------------------------------------------------------------


def test_gamma_examples():
    assert gamma(cc([mix(x=half, star=half)])) is STAR
    assert gamma(cc([dx])) == cc([dx])
    assert gamma(cc([mix(x=half, star=half), dx])) == cc([dx])


def test_gamma_top_examples():
    assert gamma_top(cc([dx])) == cc([dx])
    assert gamma_top(cc([mix(x=half, star=half), dx])) is STAR
    assert gamma_top(cc([dx, dy])) == cc([dx, dy])


def test_gamma_at_outer_point():
    s = cc([Dist({"x": half, OUTER: half}), Dist({STAR: 1})])
    assert gamma(s, OUTER) == cc([dstar])


def _raw_gamma(points):
    """Full members of a finite raw set (before taking hulls)."""
    return [d for d in points if d.weight(STAR) == 0]


@given(st.lists(csets(), min_size=1, max_size=3))
def test_gamma_commutes_with_unions(family):
    union = cc([d for s in family for d in s.base])
    full = _raw_gamma([d for s in family for d in s.base])
    expected = cc(full) if full else STAR
    assert gamma(union) == expected
    parts = [gamma(s) for s in family]
    assert expected == (STAR if all(p is STAR for p in parts) else cc(
        [d for p in parts if p is not STAR for d in p.base]
    ))


@given(csets())
def test_gamma_keeps_exactly_the_full_members(s):
    g = gamma(s)
    for d in s.base:
        assert (d.weight(STAR) == 0) == (g is not STAR and contains(g, d))


# --- xi ------------------------------------------------------------------------------


def test_xi_examples():
    assert xi(cc([dstar])) == cc([dstar])
    assert xi(cc([dx])) == cc([dx, dstar])
    got = xi(cc([mix(x=half, y=half)]))
    assert set(got.base) == {mix(x=half, y=half), mix(x=half, star=half), mix(y=half, star=half), dstar}


def test_restrict():
    d = mix(x=F(1, 3), y=F(1, 3), star=F(1, 3))
    assert restrict(d, ["x"]) == mix(x=F(1, 3), star=F(2, 3))


def test_is_bot_closed_examples():
    assert is_bot_closed(cc([dstar]))
    assert not is_bot_closed(cc([dx]))


@given(csets())
def test_xi_closure_properties(s):
    c = xi(s)
    assert is_bot_closed(c)
    assert xi(c) == c
    assert all(contains(c, d) for d in s.base)
    assert contains(c, dstar)


@given(csets(), csets())
def test_xi_preserves_unions(s1, s2):
    assert xi(convex_union(s1, s2)) == convex_union(xi(s1), xi(s2))


# --- membership, images --------------------------------------------------------------


def test_contains_examples():
    s = cc([dx, dy])
    assert contains(s, dx)
    assert contains(s, mix(x=half, y=half))
    assert not contains(s, dz)
    assert membership(s, mix(x=half, y=half))


def test_image_merges():
    s = cc([mix(x=half, y=half), dx])
    assert image(s, lambda e: "z") == cc([dz])
    assert image(s, lambda e: e) == s


@given(csets(), st.lists(st.integers(1, 5), min_size=3, max_size=3))
def test_mixtures_are_members(s, ws):
    ws = ws[: len(s.base)]
    total = sum(ws)
    assert contains(s, mixture_in(s, [F(w, total) for w in ws]))
