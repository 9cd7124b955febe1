"""Interpretation maps, prediction pairs, calibration and the prediction distribution."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Optional

from .claims import EMPTY, ClaimSet, claim
from .dist import ZERO, Response, SetLaw, law_for, limit_law, step_law
from .divergence import divergence
from .errors import ConditioningError, RepetitionError, StructuralError, SupportError
from .report import CheckReport, Conclusion, Precondition
from .sms import SmsSpec


@dataclass(frozen=True)
class PsiMap:
    """Partial map from questions of one SMS to question tuples of another."""

    mapping: dict

    def __post_init__(self):
        object.__setattr__(self, "mapping", {str(k): tuple(v) for k, v in self.mapping.items()})

    def __contains__(self, q) -> bool:
        return q in self.mapping

    def __call__(self, q) -> tuple:
        return self.mapping[q]

    @property
    def invertible(self) -> bool:
        values = list(self.mapping.values())
        return len(set(values)) == len(values)

    def inverse(self, qt) -> str:
        qt = tuple(qt)
        hits = [q for q, t in self.mapping.items() if t == qt]
        if len(hits) != 1:
            raise StructuralError(f"psi has {len(hits)} preimages for {list(qt)}")
        return hits[0]

    __hash__ = object.__hash__


@dataclass(frozen=True)
class PsiInterp:
    """Partial map (question tuple, answer) -> distribution over answer tuples."""

    table: dict

    def __post_init__(self):
        clean = {}
        for (qt, v), dist in self.table.items():
            d = {tuple(a): Fraction(p) for a, p in dist.items()}
            if sum(d.values()) != 1:
                raise StructuralError(f"Psi({list(qt)}, {v}) sums to {sum(d.values())}")
            clean[(tuple(qt), str(v))] = d
        object.__setattr__(self, "table", clean)

    __hash__ = object.__hash__

    def defined(self, qt, v) -> bool:
        return (tuple(qt), v) in self.table

    def dist(self, qt, v, answers) -> dict:
        """The stored distribution padded with zeros over answers^m."""
        qt = tuple(qt)
        d = self.table[(qt, v)]
        full = {a: d.get(a, ZERO) for a in product(answers, repeat=len(qt))}
        for a, p in d.items():
            if a not in full:
                full[a] = p
        return full

    def mixed(self, delta: Fraction, answers, support=None) -> "PsiInterp":
        """Move mass ``delta`` of every entry onto a uniform distribution.

        The uniform is over ``support[qt]`` when given and non-empty, else
        over every answer tuple.
        """
        out = {}
        for (qt, v) in self.table:
            d = self.dist(qt, v, answers)
            cells = sorted((support or {}).get(qt) or d)
            u = Fraction(1, len(cells))
            mix = {a: (1 - delta) * p for a, p in d.items()}
            for a in cells:
                mix[a] = mix.get(a, ZERO) + delta * u
            out[(qt, v)] = mix
        return PsiInterp(out)


def check_alphabets(phi1: SmsSpec, phi2: SmsSpec) -> None:
    if not set(phi2.questions) <= set(phi1.questions):
        raise StructuralError("the predictor's questions must be a subset of the oracle's")
    if not set(phi2.answers) <= set(phi1.answers):
        raise StructuralError("the predictor's answers must be a subset of the oracle's")


def math_event(q, v, s):
    """Oracle conditioning event of a (non-embedded) prediction pair."""
    return s, None


@dataclass
class PairResult:
    """Outcome of checking a prediction pair, with the pieces later steps reuse."""

    conditions: list
    predictor: Optional[Response] = None
    oracle: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.conditions)


def pair_conditions(law1: SetLaw, law2: SetLaw, psi: PsiMap, Psi: PsiInterp, q: str, s: ClaimSet,
                    event: Callable = math_event, prefix: str = "") -> PairResult:
    """The four conditions shared by plain and embedded prediction pairs.

    ``event(q, v, s)`` returns the ``(claims, collection)`` the oracle is
    conditioned on for answer ``v``.
    """
    s = frozenset(s)
    res = PairResult([])
    try:
        res.predictor = law2.response((q,), s)
        res.conditions.append(Precondition(f"{prefix}(1) predictor response well-defined", True))
    except (ConditioningError, RepetitionError) as err:
        res.conditions.append(Precondition(f"{prefix}(1) predictor response well-defined", False, str(err)))
    in_dom = q in psi
    res.conditions.append(Precondition(f"{prefix}(2) q in dom psi", in_dom, None if in_dom else q))
    if res.predictor is None or not in_dom:
        res.conditions.append(Precondition(f"{prefix}(3) Psi defined on positive answers", False, "not evaluated"))
        res.conditions.append(Precondition(f"{prefix}(4) oracle conditional well-defined", False, "not evaluated"))
        return res
    qt = psi(q)
    positive = [a[0] for a in res.predictor.support()]
    missing = [v for v in positive if not Psi.defined(qt, v)]
    res.conditions.append(
        Precondition(f"{prefix}(3) Psi defined on positive answers", not missing, missing or None)
    )
    bad = []
    for v in positive:
        claims, coll = event(q, v, s)
        try:
            res.oracle[v] = law1.response(qt, claims, coll)
        except (ConditioningError, RepetitionError) as err:
            bad.append({"answer": v, "error": str(err)})
    res.conditions.append(Precondition(f"{prefix}(4) oracle conditional well-defined", not bad, bad or None))
    return res


def is_prediction_pair(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, n1, n2: int, q: str,
                       s: ClaimSet) -> CheckReport:
    check_alphabets(phi1, phi2)
    res = pair_conditions(law_for(phi1, n1), step_law(phi2, n2), psi, Psi, q, s)
    return CheckReport("prediction-pair", tuple(res.conditions), Conclusion(res.holds))


def score_terms(pair: PairResult, psi: PsiMap, Psi: PsiInterp, q: str, answers1, kind: str) -> list:
    """Per-answer (weight, Psi distribution, oracle distribution, divergence)."""
    qt = psi(q)
    terms = []
    for (v,), w in pair.predictor.dist.items():
        if not w:
            continue
        p = Psi.dist(qt, v, answers1)
        r = pair.oracle[v].dist
        terms.append((v, w, p, r, divergence(p, r, kind)))
    return terms


def total_score(terms) -> float:
    return float(sum(float(w) * d for _, w, _, _, d in terms))


def calibration_score(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, n: int, q: str, s: ClaimSet,
                      kind: str = "kl") -> float:
    """Expected divergence between Psi-interpreted answers and the oracle's limit conditional."""
    check_alphabets(phi1, phi2)
    law1 = limit_law(phi1)
    pair = pair_conditions(law1, step_law(phi2, n), psi, Psi, q, s)
    if not pair.holds:
        raise ConditioningError("not a prediction pair: " + ", ".join(c.label for c in pair.conditions if not c.holds))
    return total_score(score_terms(pair, psi, Psi, q, phi1.answers, kind))


def is_calibrated(phi1, phi2, psi, Psi, n, q, s, epsilon: float, kind: str = "kl") -> bool:
    return calibration_score(phi1, phi2, psi, Psi, n, q, s, kind) <= epsilon


def single_sms_reduction(phi: SmsSpec, n: int, q: str, s: ClaimSet = EMPTY, kind: str = "kl",
                         oracle: SmsSpec | None = None) -> float:
    """D[P^n(V|q,s), limit(V|q,s)] for a single SMS predicting its own limit.

    With psi the identity and Psi the Kronecker delta this value is a lower
    bound on the calibration score (convexity of D); the bound is checked
    whenever the delta score is finite.
    """
    oracle = oracle or phi
    p = step_law(phi, n).response((q,), s).dist
    r = limit_law(oracle).response((q,), s).dist
    value = divergence(p, r, kind)
    try:
        delta = sum(
            float(w) * divergence({b: Fraction(int(b == a)) for b in r}, r, kind) for a, w in p.items() if w
        )
    except SupportError:
        return value
    if value > delta + 1e-12:
        raise ArithmeticError(f"reduction {value} exceeds the delta calibration score {delta}")
    return value


def is_honest(phi: SmsSpec, psi: PsiMap, Psi: PsiInterp, n, q: str, v: str, s: ClaimSet = EMPTY) -> CheckReport:
    """The SMS's own conditional given its answer (q, v) equals Psi(psi(q), v)."""
    law = law_for(phi, n)
    qt = psi(q)
    augmented = frozenset(s) | {claim(q, v)}
    own = law.response(qt, augmented).dist
    stated = Psi.dist(qt, v, phi.answers)
    diff = {"|".join(a): (own[a], stated[a]) for a in own if own[a] != stated[a]}
    return CheckReport(
        "honest", (), Conclusion(not diff, own, stated, diff or None), {"question": q, "answer": v}
    )


class PredictionDistribution:
    """Queryable view of the prediction distribution F^n.

    ``value`` is the Psi-mixture over the predictor's answers, ``weight`` the
    raw (unnormalized) clause-2 weight P2^n(q, s), zero for non-pairs.
    Conditionals are ratios of weights and values, where the missing
    normalization constant cancels.
    """

    def __init__(self, phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, n: int,
                 event: Callable = math_event, law1: SetLaw | None = None, law2: SetLaw | None = None):
        if not psi.invertible:
            raise StructuralError("the prediction distribution needs an invertible psi")
        self.phi1, self.phi2, self.psi, self.Psi, self.n = phi1, phi2, psi, Psi, n
        self.event = event
        self.law1 = law1 or limit_law(phi1)
        self.law2 = law2 or step_law(phi2, n)
        self.answers1 = phi1.answers
        self._pairs: dict = {}

    def pair(self, qt, s) -> PairResult:
        key = (tuple(qt), frozenset(s))
        if key not in self._pairs:
            q = self.psi.inverse(qt)
            self._pairs[key] = pair_conditions(self.law1, self.law2, self.psi, self.Psi, q, key[1], self.event)
        return self._pairs[key]

    def weight(self, qt, s) -> Fraction:
        pr = self.pair(qt, s)
        if not pr.holds:
            return ZERO
        return self.law2.prob(frozenset(s), (self.psi.inverse(qt),))

    def value(self, qt, s) -> dict:
        pr = self.pair(qt, s)
        if not pr.holds:
            raise ConditioningError("F^n is only defined on prediction pairs", questions=list(qt), claims=sorted(s))
        out: dict = {}
        for (v,), w in pr.predictor.dist.items():
            if not w:
                continue
            for a, p in self.Psi.dist(tuple(qt), v, self.answers1).items():
                out[a] = out.get(a, ZERO) + w * p
        return out

    def joint(self, qt, answers, s) -> Fraction:
        """Unnormalized F^n((qt, answers), s); with answers None, F^n(qt, s)."""
        w = self.weight(qt, s)
        if answers is None or not w:
            return w
        return w * self.value(qt, s)[tuple(answers)]

    def conditional(self, qt, answers, s) -> Fraction:
        return self.value(qt, s)[tuple(answers)]
