"""Exact rational linear programming and convex-hull membership.

Everything here runs on :class:`fractions.Fraction`; there is no floating
point path.  The simplex uses Bland's rule, so runs are deterministic and
cannot cycle.  Every answer carries a certificate (an optimal dual vector, a
Farkas vector, or convex weights) which is re-verified before returning.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = None

Rational = Fraction

#: pivoting arithmetic: "gmpy2" (default when importable) or "fraction"
BACKEND = "fraction" if _mpq is None else os.environ.get("CSMONADS_RATIONAL", "gmpy2")


def set_backend(name: str) -> None:
    """Select the rational type used inside the simplex kernel."""
    global BACKEND
    if name not in ("gmpy2", "fraction"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "gmpy2" and _mpq is None:
        raise RuntimeError("gmpy2 is not installed")
    BACKEND = name


def _kernel_types():
    if BACKEND == "gmpy2":
        return _mpq, lambda q: Fraction(int(q.numerator), int(q.denominator))
    return Fraction, lambda q: q

LE, EQ, GE = "<=", "=", ">="
_RELATIONS = (LE, EQ, GE)


class CertificateError(RuntimeError):
    """An internally produced certificate failed its exact re-check."""


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = sum((a * v for a, v in zip(self.coeffs, x)), Fraction(0))
        if self.relation == LE:
            return lhs <= self.rhs
        if self.relation == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class LinearProgram:
    """``min objective . x`` subject to ``constraints``.

    Variables are bounded below by 0 unless listed in ``free``.
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...] = ()
    free: frozenset[int] = frozenset()

    def __post_init__(self):
        n = len(self.objective)
        if n == 0:
            raise ValueError("a linear program needs at least one variable")
        for c in self.constraints:
            if len(c.coeffs) != n:
                raise ValueError(
                    f"constraint row has {len(c.coeffs)} coefficients, expected {n}"
                )
            if c.relation not in _RELATIONS:
                raise ValueError(f"unknown relation {c.relation!r}")
        if any(j < 0 or j >= n for j in self.free):
            raise ValueError("free variable index out of range")

    @classmethod
    def build(cls, objective: Iterable, constraints: Iterable = (), free: Iterable[int] = ()):
        """Convenience constructor taking ``(row, relation, rhs)`` triples of plain numbers."""
        obj = tuple(_frac(v) for v in objective)
        rows = tuple(
            Constraint(tuple(_frac(v) for v in row), rel, _frac(rhs))
            for row, rel, rhs in constraints
        )
        return cls(obj, rows, frozenset(free))

    @property
    def num_vars(self) -> int:
        return len(self.objective)


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LPResult:
    status: Status
    value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None
    # optimal dual (Optimal) or Farkas multipliers (Infeasible), one per constraint
    dual: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Tableau:
    """Dense simplex tableau in equality form with a maintained cost row."""

    def __init__(self, rows, rhs, basis, ncols, zero):
        self.rows = [list(r) + [b] for r, b in zip(rows, rhs)]
        self.basis = list(basis)
        self.ncols = ncols
        self.zero = zero
        self.cost = [zero] * (ncols + 1)

    def set_cost(self, c):
        # reduced costs relative to the current basis; last entry holds -value
        cost = list(c) + [self.zero]
        for i, b in enumerate(self.basis):
            cb = c[b]
            if cb:
                row = self.rows[i]
                for j in range(self.ncols + 1):
                    if row[j]:
                        cost[j] -= cb * row[j]
        self.cost = cost

    def pivot(self, r, col):
        prow = self.rows[r]
        piv = prow[col]
        if piv != 1:
            inv = 1 / piv
            prow = [v * inv if v else v for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[col]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        f = self.cost[col]
        if f:
            for j in nz:
                self.cost[j] -= f * prow[j]
        self.basis[r] = col

    def run(self, allowed) -> bool:
        """Minimise the current cost row.  Returns False if unbounded."""
        while True:
            col = next((j for j in range(self.ncols) if allowed[j] and self.cost[j] < 0), None)
            if col is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], col)


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve ``lp`` exactly with a two-phase Bland-rule simplex."""
    Q, back = _kernel_types()
    zero, one = Q(0), Q(1)
    n = lp.num_vars
    # split free variables x = x+ - x-
    colmap: list[tuple[int, int]] = []
    for j in range(n):
        colmap.append((j, 1))
        if j in lp.free:
            colmap.append((j, -1))
    nstruct = len(colmap)

    rows, rhs, signs, rels = [], [], [], []
    for con in lp.constraints:
        s = -1 if con.rhs < 0 else 1
        rel = con.relation
        if s < 0 and rel != EQ:
            rel = GE if rel == LE else LE
        rows.append([Q(s * sg * con.coeffs[j]) for j, sg in colmap])
        rhs.append(Q(s * con.rhs))
        signs.append(s)
        rels.append(rel)
    m = len(rows)

    extra = []  # (row, coefficient, is_artificial)
    ident_col = [0] * m
    basis = [0] * m
    for i, rel in enumerate(rels):
        if rel == LE:
            ident_col[i] = basis[i] = nstruct + len(extra)
            extra.append((i, 1, False))
        else:
            if rel == GE:
                extra.append((i, -1, False))
            ident_col[i] = basis[i] = nstruct + len(extra)
            extra.append((i, 1, True))
    ncols = nstruct + len(extra)
    full_rows = []
    for i in range(m):
        r = rows[i] + [zero] * len(extra)
        for k, (ri, coef, _) in enumerate(extra):
            if ri == i:
                r[nstruct + k] = Q(coef)
        full_rows.append(r)
    artificial = [False] * nstruct + [a for _, _, a in extra]

    tab = _Tableau(full_rows, rhs, basis, ncols, zero)
    all_cols = [True] * ncols

    if any(artificial):
        c1 = [one if a else zero for a in artificial]
        tab.set_cost(c1)
        tab.run(all_cols)
        if -tab.cost[-1] > 0:
            y = [c1[ident_col[i]] - tab.cost[ident_col[i]] for i in range(m)]
            farkas = tuple(back(signs[i] * y[i]) for i in range(m))
            _check_farkas(lp, farkas)
            return LPResult(Status.INFEASIBLE, dual=farkas)
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if artificial[tab.basis[i]]:
                row = tab.rows[i]
                col = next((j for j in range(ncols) if not artificial[j] and row[j]), None)
                if col is not None:
                    tab.pivot(i, col)

    c2 = [zero] * ncols
    for k, (j, sg) in enumerate(colmap):
        c2[k] = Q(sg * lp.objective[j])
    tab.set_cost(c2)
    if not tab.run([not a for a in artificial]):
        return LPResult(Status.UNBOUNDED)

    xs = [Fraction(0)] * ncols
    for i, b in enumerate(tab.basis):
        xs[b] = back(tab.rows[i][-1])
    point = [Fraction(0)] * n
    for k, (j, sg) in enumerate(colmap):
        point[j] += sg * xs[k]
    point = tuple(point)
    value = sum((c * x for c, x in zip(lp.objective, point)), Fraction(0))
    y = [c2[ident_col[i]] - tab.cost[ident_col[i]] for i in range(m)]
    dual = tuple(back(signs[i] * y[i]) for i in range(m))
    _check_optimal(lp, point, value, dual)
    return LPResult(Status.OPTIMAL, value, point, dual)


def _column_products(lp: LinearProgram, y: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * lp.num_vars
    for con, yi in zip(lp.constraints, y):
        if yi:
            for j, a in enumerate(con.coeffs):
                if a:
                    out[j] += yi * a
    return out


def _dual_signs_ok(lp: LinearProgram, y: Sequence[Fraction]) -> bool:
    for con, yi in zip(lp.constraints, y):
        if con.relation == LE and yi > 0:
            return False
        if con.relation == GE and yi < 0:
            return False
    return True


def _check_optimal(lp, point, value, dual):
    for j, v in enumerate(point):
        if j not in lp.free and v < 0:
            raise CertificateError("primal point violates a lower bound")
    for con in lp.constraints:
        if not con.holds(point):
            raise CertificateError("primal point violates a constraint")
    if not _dual_signs_ok(lp, dual):
        raise CertificateError("dual multiplier has the wrong sign")
    aty = _column_products(lp, dual)
    for j, (c, a) in enumerate(zip(lp.objective, aty)):
        red = c - a
        if (j in lp.free and red != 0) or red < 0:
            raise CertificateError("dual infeasible")
    by = sum((con.rhs * yi for con, yi in zip(lp.constraints, dual)), Fraction(0))
    if by != value:
        raise CertificateError("duality gap is not zero")


def _check_farkas(lp, y):
    if not _dual_signs_ok(lp, y):
        raise CertificateError("Farkas multiplier has the wrong sign")
    aty = _column_products(lp, y)
    for j, a in enumerate(aty):
        if (j in lp.free and a != 0) or a > 0:
            raise CertificateError("Farkas combination is not non-positive")
    by = sum((con.rhs * yi for con, yi in zip(lp.constraints, y)), Fraction(0))
    if by <= 0:
        raise CertificateError("Farkas combination does not separate")


# ---------------------------------------------------------------------------
# convex hull membership


@dataclass(frozen=True)
class Inside:
    """``point == sum(weights[i] * generators[i])`` with convex weights."""

    weights: tuple[Fraction, ...]

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Outside:
    """Separating hyperplane: ``normal.g + offset <= 0`` on every generator,
    ``normal.point + offset > 0``."""

    normal: tuple[Fraction, ...]
    offset: Fraction = field(default=Fraction(0))

    def __bool__(self):
        return False


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def verify_membership(verdict: Inside | Outside, point, generators) -> bool:
    if isinstance(verdict, Inside):
        w = verdict.weights
        if len(w) != len(generators) or any(v < 0 for v in w) or sum(w) != 1:
            return False
        return all(
            sum((wi * g[c] for wi, g in zip(w, generators)), Fraction(0)) == point[c]
            for c in range(len(point))
        )
    if any(_dot(verdict.normal, g) + verdict.offset > 0 for g in generators):
        return False
    return _dot(verdict.normal, point) + verdict.offset > 0


def hull_membership(point: Sequence, generators: Sequence[Sequence]) -> Inside | Outside:
    """Decide whether ``point`` lies in the convex hull of ``generators``.

    The verdict is truthy for :class:`Inside` and carries a certificate that has
    already been checked exactly.
    """
    if not generators:
        raise ValueError("hull_membership needs at least one generator")
    p = tuple(_frac(v) for v in point)
    gens = [tuple(_frac(v) for v in g) for g in generators]
    dim = len(p)
    if any(len(g) != dim for g in gens):
        raise ValueError("dimension mismatch between point and generators")
    verdict = _fast_membership(p, gens)
    if verdict is None:
        verdict = _lp_membership(p, gens)
    if not verify_membership(verdict, p, gens):
        raise CertificateError("hull membership certificate failed re-check")
    return verdict


def _fast_membership(p, gens):
    k = len(gens)
    for c in range(len(p)):
        hi = max(g[c] for g in gens)
        if p[c] > hi:
            normal = [Fraction(0)] * len(p)
            normal[c] = Fraction(1)
            return Outside(tuple(normal), -hi)
        lo = min(g[c] for g in gens)
        if p[c] < lo:
            normal = [Fraction(0)] * len(p)
            normal[c] = Fraction(-1)
            return Outside(tuple(normal), lo)
    for i, g in enumerate(gens):
        if g == p:
            w = [Fraction(0)] * k
            w[i] = Fraction(1)
            return Inside(tuple(w))
    if k == 2:
        g0, g1 = gens
        c = next((c for c in range(len(p)) if g0[c] != g1[c]), None)
        if c is not None:
            lam = (p[c] - g1[c]) / (g0[c] - g1[c])
            if 0 <= lam <= 1 and all(lam * a + (1 - lam) * b == v for a, b, v in zip(g0, g1, p)):
                return Inside((lam, 1 - lam))
    return None


def _lp_membership(p, gens):
    k = len(gens)
    cons = [
        Constraint(tuple(g[c] for g in gens), EQ, p[c]) for c in range(len(p))
    ]
    cons.append(Constraint((Fraction(1),) * k, EQ, Fraction(1)))
    res = solve_lp(LinearProgram((Fraction(0),) * k, tuple(cons)))
    if res.status is Status.OPTIMAL:
        return Inside(res.point)
    y = res.dual
    return Outside(tuple(y[:-1]), y[-1])
