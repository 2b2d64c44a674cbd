"""Exact computations with convex sets of (sub)distributions: the monads
``C(+1)``, ``C+1`` and ``C↓``, their equational theories, Hausdorff–Kantorovich
metrics, and a small process algebra interpreted over them.
"""

from .convsets import OUTER, STAR, ConvexSet, Dist, Point, cc, gamma, gamma_top, wms, xi
from .exactlp import CertificateError, hull_membership, solve_lp
from .metrics import FinMetric, hk_distance, hk_maybe, kantorovich, term_distance
from .monads import MonadId, check_distributive_law, check_monad_laws, check_monad_map
from .process import behavioral_equivalent, bisim_distance, parse_process, prove, tau
from .theories import TheoryId, interpret, kappa, parse_term, theory_equal

__all__ = [
    "OUTER",
    "STAR",
    "ConvexSet",
    "Dist",
    "Point",
    "cc",
    "gamma",
    "gamma_top",
    "wms",
    "xi",
    "CertificateError",
    "hull_membership",
    "solve_lp",
    "FinMetric",
    "hk_distance",
    "hk_maybe",
    "kantorovich",
    "term_distance",
    "MonadId",
    "check_distributive_law",
    "check_monad_laws",
    "check_monad_map",
    "behavioral_equivalent",
    "bisim_distance",
    "parse_process",
    "prove",
    "tau",
    "TheoryId",
    "interpret",
    "kappa",
    "parse_term",
    "theory_equal",
]
