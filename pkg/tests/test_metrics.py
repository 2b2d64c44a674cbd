from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from csmonads.convsets import STAR, ConvexSet, Dist, cc, gamma, mixture_in, xi
from csmonads.metrics import (
    GAMMA_COUNTEREXAMPLE,
    MU_COUNTEREXAMPLE,
    CoproductMetric,
    FinMetric,
    MetricAxiomError,
    _inf_to_set,
    check_nonexpansive,
    directed_hk,
    format_metric,
    hk_distance,
    hk_maybe,
    kantorovich,
    parse_metric,
    plus_one,
    term_distance,
)
from csmonads.monads import mult_cplus1
from csmonads.theories import TheoryId, parse_term

from conftest import csets, dists
from oracles import transport

F = Fraction
half = F(1, 2)
XY = FinMetric.discrete(["x", "y"])
XYZ = FinMetric.discrete(["x", "y", "z"])
dx, dy, dstar = (Dist.dirac(e) for e in ("x", "y", STAR))


@st.composite
def metrics(draw, names=("x", "y", "z")):
    """Random rational metrics built as shortest paths of random edge weights."""
    n = len(names)
    w = [[F(draw(st.integers(1, 6)), 6) for _ in range(n)] for _ in range(n)]
    d = [[F(0) if i == j else min(w[i][j], w[j][i]) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                d[i][j] = min(d[i][j], d[i][k] + d[k][j])
    return FinMetric(names, d)


# --- finite metrics ----------------------------------------------------------------


def test_discrete_metric():
    assert XY("x", "y") == 1 and XY("x", "x") == 0


@pytest.mark.parametrize(
    "table, axiom",
    [
        ([[0, 1], [1, 1]], "reflexivity"),
        ([[0, 2], [2, 0]], "1-boundedness"),
        ([[0, 1], [F(1, 2), 0]], "symmetry"),
        ([[0, 0], [0, 0]], "identity of indiscernibles"),
    ],
)
def test_metric_axioms_are_enforced(table, axiom):
    with pytest.raises(MetricAxiomError) as err:
        FinMetric(["x", "y"], table)
    assert err.value.axiom == axiom


def test_triangle_violation_names_triple():
    with pytest.raises(MetricAxiomError) as err:
        FinMetric(["x", "y", "z"], {("x", "y"): F(1, 4), ("y", "z"): F(1, 4), ("x", "z"): 1})
    assert err.value.axiom == "triangle inequality"
    assert set(err.value.triple) == {"x", "y", "z"}


def test_pseudometric_allowed_when_requested():
    assert FinMetric(["x", "y"], [[0, 0], [0, 0]], pseudo=True)("x", "y") == 0


def test_unknown_element():
    with pytest.raises(ValueError):
        XY("x", "q")


def test_coproduct_metric():
    d = CoproductMetric(XY, FinMetric.discrete(["u"]))
    assert d("x", "u") == 1 and d("x", "y") == 1 and d("u", "u") == 0
    p1 = plus_one(FinMetric(["x", "y"], [[0, half], [half, 0]]))
    assert p1("x", "y") == half and p1("x", STAR) == 1 and p1(STAR, STAR) == 0
    with pytest.raises(ValueError):
        CoproductMetric(XY, XY)


def test_metric_file_round_trip():
    text = "x y z\n0\n1/2 0\n1 1/2 0\n"
    d = parse_metric(text)
    assert d("x", "z") == 1 and d("y", "z") == half
    assert parse_metric(format_metric(d)) == d


@pytest.mark.parametrize(
    "text",
    ["", "x y\n0\n", "x y\n0\n1 0 0\n", "x x\n0\n1 0\n", "x y z\n0\n1/4 0\n1 1/2 0\n", "x y\n0\nq 0\n"],
)
def test_metric_file_errors(text):
    with pytest.raises(ValueError):
        parse_metric(text)


# --- Kantorovich ----------------------------------------------------------------------


def test_kantorovich_examples():
    assert kantorovich(dx, dy, XY) == 1
    assert kantorovich(Dist({"x": half, "y": half}), dx, XY) == half


@given(st.sampled_from([F(k, 6) for k in range(7)]), st.sampled_from([F(k, 6) for k in range(7)]), metrics(("x", "y")))
def test_kantorovich_subdistribution_formula(p, q, d):
    p, q = min(p, q), max(p, q)
    a = Dist({"x": p, STAR: 1 - p})
    b = Dist({"y": q, STAR: 1 - q})
    assert kantorovich(a, b, plus_one(d)) == p * d("x", "y") + (q - p)


@given(dists(), dists(), metrics())
def test_kantorovich_matches_vertex_enumeration(a, b, d):
    g = plus_one(d)
    assert kantorovich(a, b, g) == transport(a.as_dict(), b.as_dict(), g)


@given(dists(), dists(), dists(), metrics())
def test_kantorovich_is_a_metric(a, b, c, d):
    g = plus_one(d)
    k = lambda u, v: kantorovich(u, v, g)  # noqa: E731
    assert (k(a, b) == 0) == (a == b)
    assert k(a, b) == k(b, a)
    assert k(a, c) <= k(a, b) + k(b, c)
    assert 0 <= k(a, b) <= 1


# --- Hausdorff–Kantorovich ---------------------------------------------------------------


def test_hk_examples():
    s = cc([dx, dy])
    assert hk_distance(s, s, XY) == 0
    assert hk_distance(cc([Dist({"x": half, STAR: half})]), cc([dx]), FinMetric.discrete(["x"])) == half
    g = plus_one(XY)
    assert directed_hk(s, cc([dx]), g) == 1 and directed_hk(cc([dx]), s, g) == 0
    assert hk_distance(s, cc([dx]), XY) == 1


def test_hk_rejects_foreign_elements():
    with pytest.raises(ValueError):
        hk_distance(cc([Dist.dirac("q")]), cc([dx]), XY)


def test_hk_maybe():
    s = cc([dx])
    assert hk_maybe(STAR, STAR, XY) == 0
    assert hk_maybe(STAR, s, XY) == 1
    assert hk_maybe(s, s, XY) == 0
    assert hk_maybe(cc([dx, dy]), s, XY) == 1
    with pytest.raises(ValueError):
        hk_maybe(cc([dstar]), s, XY)


@given(csets(), csets(), csets(), metrics())
def test_hk_is_a_metric(a, b, c, d):
    h = lambda u, v: hk_distance(u, v, d)  # noqa: E731
    assert (h(a, b) == 0) == (a == b)
    assert h(a, b) == h(b, a)
    assert h(a, c) <= h(a, b) + h(b, c)


@given(csets(), csets(), st.lists(st.integers(1, 5), min_size=3, max_size=3), metrics())
def test_sup_is_attained_on_the_base(s1, s2, ws, d):
    ws = ws[: len(s1.base)]
    phi = mixture_in(s1, [F(w, sum(ws)) for w in ws])
    g = plus_one(d)
    assert _inf_to_set(phi, s2, g) <= directed_hk(s1, s2, g)


@given(dists(), csets(), metrics())
def test_inf_to_set_matches_single_couplings_at_base_points(phi, s, d):
    g = plus_one(d)
    best = _inf_to_set(phi, s, g)
    assert best <= min(kantorovich(phi, psi, g) for psi in s.base)


# --- term distances and counterexamples ------------------------------------------------------------


def test_term_distance_examples():
    t = parse_term("(oplus x (pplus 1/3 y star))")
    assert term_distance(t, t, XY, TheoryId.CSStar) == 0
    assert term_distance(parse_term("x"), parse_term("star"), XY, TheoryId.CSBot) == 1
    a = FinMetric.discrete(["a"])
    d = term_distance(parse_term("(pplus 1/2 star a)"), parse_term("(pplus 1/4 star a)"), a, TheoryId.CSStar)
    assert d == F(1, 4)


def test_term_distance_errors():
    with pytest.raises(ValueError):
        term_distance(parse_term("q"), parse_term("x"), XY, TheoryId.CSStar)
    with pytest.raises(ValueError):
        term_distance(parse_term("x"), parse_term("x"), XY, TheoryId.CSBotBH)


@given(st.sampled_from([F(1, 4), half, F(3, 4), F(1, 3), F(5, 6)]))
def test_black_hole_axiom_fails_quantitatively(p):
    d = term_distance(parse_term(f"(pplus {p} x star)"), parse_term("star"), FinMetric.discrete(["x"]), TheoryId.CSStar)
    assert d == p > 0


def test_gamma_counterexample():
    s1, s2 = GAMMA_COUNTEREXAMPLE
    dx1 = FinMetric.discrete(["x"])
    assert hk_distance(s1, s2, dx1) == half
    assert hk_maybe(gamma(s1), gamma(s2), dx1) == 1
    report = check_nonexpansive("gamma_hat", samples=20)
    assert report.witness == (half, 1)


def test_mu_counterexample():
    s1, s2 = MU_COUNTEREXAMPLE
    assert mult_cplus1(s1) is STAR and mult_cplus1(s2) == cc([dx])
    report = check_nonexpansive("mu_cplus1_hat", samples=20)
    assert report.witness == (half, 1)


def test_xi_hat_is_nonexpansive():
    report = check_nonexpansive("xi_hat", samples=60, seed=4)
    assert report.passed and report.max_excess == 0


def test_unknown_map_rejected():
    with pytest.raises(ValueError):
        check_nonexpansive("eta_hat", 1)


@given(metrics())
def test_xi_isometry_on_generators(d):
    for a in d.carrier:
        for b in d.carrier:
            sa, sb = xi(ConvexSet([Dist.dirac(a)])), xi(ConvexSet([Dist.dirac(b)]))
            assert hk_distance(sa, sb, d) == d(a, b)


def test_random_violations_are_reported_with_magnitude():
    report = check_nonexpansive("gamma_hat", samples=80, seed=1)
    assert report.failures and report.max_excess > 0
    for f in report.failures:
        assert f.lhs > f.rhs


def test_random_sets_helper_is_seeded():
    from csmonads.metrics import _random_set

    a = _random_set(random.Random(3), ["x", "y", STAR])
    b = _random_set(random.Random(3), ["x", "y", STAR])
    assert a == b
