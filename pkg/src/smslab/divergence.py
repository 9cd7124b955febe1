from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, SupportError
from .report import CheckReport, simple_check

KL = "kl"
TV = "tv"
JS = "js"

ALIASES = {
    "kl": KL,
    "tv": TV,
    "total-variation": TV,
    "js": JS,
    "jensen-shannon": JS,
}

# Divergences whose local Lipschitz property fails at the support boundary.
NEEDS_FULL_SUPPORT = {KL, JS}


def kind_of(name: str) -> str:
    try:
        return ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown divergence {name!r}; choose kl, tv or js") from None


def _kl(p: dict, r: dict) -> float:
    total = 0.0
    for k, pk in p.items():
        if not pk:
            continue
        rk = r[k]
        if not rk:
            raise SupportError(f"kl needs support(p) inside support(r); outcome {k!r} has p={pk}, r=0")
        total += float(pk) * math.log(Fraction(pk) / Fraction(rk))
    return max(total, 0.0)


def divergence(p: dict, r: dict, kind: str = KL) -> float:
    """D[p, r] for two distributions over the same outcomes.

    Equal inputs return exactly 0.0; the comparison is done on the exact
    rationals before any float conversion.
    """
    kind = kind_of(kind)
    if set(p) != set(r):
        raise DomainError(f"outcome sets differ: {sorted(set(p) ^ set(r))}")
    if all(Fraction(p[k]) == Fraction(r[k]) for k in p):
        return 0.0
    if kind == KL:
        return _kl(p, r)
    if kind == TV:
        return float(sum(abs(Fraction(p[k]) - Fraction(r[k])) for k in p) / 2)
    m = {k: (Fraction(p[k]) + Fraction(r[k])) / 2 for k in p}
    return 0.5 * _kl(p, m) + 0.5 * _kl(r, m)


def full_support(d: dict) -> bool:
    return all(v > 0 for v in d.values())


def _random_dist(rng, k):
    w = rng.integers(1, 20, size=k)
    return {i: Fraction(int(x), int(w.sum())) for i, x in enumerate(w)}


def check_convexity(kind: str, trials: int = 1000, seed: int = 0, slack: float = 1e-12) -> CheckReport:
    """Randomized check that D is convex in its first argument."""
    kind = kind_of(kind)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for t in range(trials):
        k = int(rng.integers(2, 5))
        p1, p2, r = (_random_dist(rng, k) for _ in range(3))
        lam = Fraction(int(rng.integers(0, 11)), 10)
        mix = {i: lam * p1[i] + (1 - lam) * p2[i] for i in range(k)}
        lhs = divergence(mix, r, kind)
        rhs = float(lam) * divergence(p1, r, kind) + float(1 - lam) * divergence(p2, r, kind)
        worst = max(worst, lhs - rhs)
        if lhs > rhs + slack:
            return simple_check(
                "convexity", False, {"trial": t, "lhs": lhs, "rhs": rhs, "lambda": lam}, kind=kind, trials=trials
            )
    return simple_check("convexity", True, None, kind=kind, trials=trials, worst_gap=worst)
