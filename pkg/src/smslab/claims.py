"""Claims, claim vectors and claim sets.

A claim is a ``(question, answer)`` pair of strings.  Vectors are tuples of
claims; sets are frozensets.  Everything here is a plain immutable builtin so
claim sets can key dictionaries directly.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Tuple

Claim = Tuple[str, str]
ClaimVector = Tuple[Claim, ...]
ClaimSet = frozenset

EMPTY: ClaimSet = frozenset()


def claim(question, answer) -> Claim:
    return (str(question), str(answer))


def vector(items: Iterable) -> ClaimVector:
    return tuple(claim(q, a) for q, a in items)


def claim_set(items: Iterable = ()) -> ClaimSet:
    return frozenset(claim(q, a) for q, a in items)


def unorder(v: ClaimVector) -> ClaimSet:
    """The un-ordering map U: forget the order of a claim vector."""
    return frozenset(v)


def canonical(s: Iterable[Claim]) -> list[Claim]:
    """Claims sorted by question then answer, the serialization order."""
    return sorted(s)


def questions_of(s: Iterable[Claim]) -> frozenset:
    return frozenset(q for q, _ in s)


def has_repeat(v: Iterable[Claim]) -> bool:
    seen = set()
    for q, _ in v:
        if q in seen:
            return True
        seen.add(q)
    return False


def subsets(s: ClaimSet):
    """Every subset of ``s``, smallest first, in a deterministic order."""
    items = canonical(s)
    for k in range(len(items) + 1):
        for combo in combinations(items, k):
            yield frozenset(combo)


def minimal_members(coll: Iterable[ClaimSet]) -> tuple[ClaimSet, ...]:
    """Drop members that contain another member.

    The event "some member is contained in U" only depends on the minimal
    members, so this shrinks collection queries without changing them.
    """
    members = sorted({frozenset(m) for m in coll}, key=lambda m: (len(m), canonical(m)))
    kept: list[ClaimSet] = []
    for m in members:
        if not any(k <= m for k in kept):
            kept.append(m)
    return tuple(kept)


def fmt_claims(s: Iterable[Claim]) -> str:
    return "{" + ", ".join(f"({q},{a})" for q, a in canonical(s)) + "}"


def fmt_q(x: Fraction) -> str:
    return str(Fraction(x))
