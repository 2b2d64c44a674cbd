"""Compare the gmpy2 and Fraction backends of the exact simplex kernel.

Usage: python benchmarks/bench_backends.py [--repeat N]

Each workload runs with cold caches under each backend; results must agree
exactly, only the wall-clock time may differ.
"""

from __future__ import annotations

import argparse
import random
import time
from fractions import Fraction

from csmonads import exactlp
from csmonads.convsets import STAR, clear_caches, xi
from csmonads.exactlp import hull_membership, set_backend
from csmonads.metrics import FinMetric, _random_set, hk_distance
from csmonads.monads import MonadId, check_monad_laws


def hulls():
    rng = random.Random(0)
    out = []
    for _ in range(300):
        gens = [[Fraction(rng.randint(0, 12), 12) for _ in range(4)] for _ in range(6)]
        point = [Fraction(rng.randint(0, 12), 12) for _ in range(4)]
        out.append(type(hull_membership(point, gens)).__name__)
    return out


def closures():
    rng = random.Random(1)
    return [xi(_random_set(rng, ["x", "y", "z", STAR])) for _ in range(200)]


def distances():
    rng = random.Random(2)
    d = FinMetric.discrete(["x", "y", "z"])
    return [hk_distance(_random_set(rng, ["x", "y", "z", STAR]), _random_set(rng, ["x", "y", "z", STAR]), d)
            for _ in range(100)]


def laws():
    return check_monad_laws(MonadId.CDOWN, samples=30, seed=0).passed


WORKLOADS = {"hull membership": hulls, "xi closure": closures, "hk distance": distances, "C-down laws": laws}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["fraction"] + (["gmpy2"] if exactlp._mpq is not None else [])
    print(f"{'workload':<18}" + "".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, fn in WORKLOADS.items():
        times, results = {}, {}
        for b in backends:
            set_backend(b)
            best = float("inf")
            for _ in range(args.repeat):
                clear_caches()
                t = time.perf_counter()
                results[b] = fn()
                best = min(best, time.perf_counter() - t)
            times[b] = best
        assert len({repr(r) for r in results.values()}) == 1, f"{name}: backends disagree"
        speedup = times["fraction"] / times["gmpy2"] if "gmpy2" in times else float("nan")
        print(f"{name:<18}" + "".join(f"{times[b]:>11.3f}s" for b in backends) + f"   {speedup:6.2f}x")


if __name__ == "__main__":
    main()
