"""Embedding maps from a universe SMS into a scientist SMS."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional

from .calibration import PairResult, PredictionDistribution, PsiInterp, PsiMap, pair_conditions, score_terms, total_score
from .claims import EMPTY, ClaimSet, canonical, claim, fmt_claims, minimal_members, subsets
from .dist import ZERO, limit_law, step_law
from .errors import ConditioningError, DomainError, RepetitionError, SupportError
from .report import CheckReport, Conclusion, Precondition
from .sms import SmsSpec


@dataclass(frozen=True)
class EmbeddingMap:
    """Explicit finite table for the partial function E.

    ``rule`` remembers a compact description (a question projection) when
    the table was expanded from one, so scenarios serialize back the way they
    were written.
    """

    table: dict
    rule: Optional[dict] = None
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    __hash__ = object.__hash__

    def __post_init__(self):
        object.__setattr__(self, "table", {frozenset(k): frozenset(v) for k, v in self.table.items()})

    def __contains__(self, s) -> bool:
        return frozenset(s) in self.table

    def image(self, s: ClaimSet) -> ClaimSet:
        s = frozenset(s)
        if s not in self.table:
            raise DomainError(f"E is undefined on {fmt_claims(s)}", witness=sorted(s))
        return self.table[s]

    def _build(self):
        if None not in self._index:
            inv: dict = {}
            for k, v in self.table.items():
                inv.setdefault(v, []).append(k)
            for v, ks in inv.items():
                self._index[v] = tuple(sorted(ks, key=canonical))
            self._index[None] = True

    def preimage(self, y: ClaimSet) -> tuple:
        """E^-1[y]: every domain set whose image is exactly ``y``."""
        self._build()
        return self._index.get(frozenset(y), ())

    def preimage_event(self, y: ClaimSet) -> tuple:
        """Minimal members of E^-1[y]; they define the same "some member" event."""
        key = ("min", frozenset(y))
        if key not in self._index:
            self._index[key] = minimal_members(self.preimage(y))
        return self._index[key]

    def images(self) -> set:
        return set(self.table.values())


def projection_map(universe: SmsSpec, questions, rename=None) -> EmbeddingMap:
    """E(S) = the claims of S on ``questions``, optionally relabelled.

    The table covers the downward closure of the universe's limit support,
    so every subset of a possible terminal claim set has an image.
    """
    keep = set(questions)
    rename = {tuple(a): tuple(b) for a, b in (rename or {}).items()}
    table = {}
    for top in limit_law(universe).support_sets():
        for s in subsets(top):
            if s not in table:
                table[s] = frozenset(rename.get(c, c) for c in s if c[0] in keep)
    rule = {"project": sorted(keep)}
    if rename:
        rule["rename"] = [[list(a), list(b)] for a, b in sorted(rename.items())]
    return EmbeddingMap(table, rule)


def embedded_event(E: EmbeddingMap):
    def event(q, v, s):
        return EMPTY, E.preimage_event(frozenset(s) | {claim(q, v)})

    return event


def verify_embedding(phi1: SmsSpec, phi2: SmsSpec, E: EmbeddingMap, n: int) -> CheckReport:
    """Check limit P1(E^-1[Y]) = P2^n(Y) for every non-empty Y phi2 can emit a superset of."""
    pre = []
    try:
        law1 = limit_law(phi1)
        pre.append(Precondition("universe backward-consistent", True))
    except Exception as err:  # noqa: BLE001 - reported, not raised
        pre.append(Precondition("universe backward-consistent", False, str(err)))
        return CheckReport("embedding", tuple(pre), None)
    law2 = step_law(phi2, n)
    seen = set()
    residuals = []
    empty = []
    for top in law2.support_sets():
        for y in subsets(top):
            if not y or y in seen:
                continue
            seen.add(y)
            coll = E.preimage_event(y)
            lhs = law1.prob(EMPTY, (), coll) if coll else ZERO
            rhs = law2.prob(y)
            if not coll and rhs:
                empty.append(sorted(y))
            residuals.append((y, lhs, rhs, lhs - rhs))
    residuals.sort(key=lambda r: canonical(r[0]))
    worst = max(residuals, key=lambda r: abs(r[3]), default=None)
    holds = all(r[3] == 0 for r in residuals)
    details = {
        "residuals": [{"set": r[0], "universe": r[1], "scientist": r[2], "residual": r[3]} for r in residuals],
        "bracket_width": 0,
    }
    if empty:
        details["empty_preimage"] = empty
    conc = Conclusion(
        holds,
        None if worst is None else worst[1],
        None if worst is None else worst[2],
        0.0 if worst is None else float(abs(worst[3])),
    )
    return CheckReport("embedding", tuple(pre), conc, details)


def embedded_pair(phi1, phi2, psi, Psi, E, n, q, s, prefix="") -> PairResult:
    return pair_conditions(limit_law(phi1), step_law(phi2, n), psi, Psi, q, frozenset(s), embedded_event(E), prefix)


def is_embedded_prediction_pair(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap,
                                n: int, q: str, s: ClaimSet) -> CheckReport:
    res = embedded_pair(phi1, phi2, psi, Psi, E, n, q, s)
    return CheckReport("embedded-prediction-pair", tuple(res.conditions), Conclusion(res.holds))


def is_embedded_prediction_triple(phi1, phi2, psi, Psi, E, n, q, s, v) -> CheckReport:
    """The pair conditions for the single answer ``v``, which must be positive."""
    law1, law2 = limit_law(phi1), step_law(phi2, n)
    s = frozenset(s)
    conds = []
    try:
        w = law2.response((q,), s).dist.get((v,), ZERO)
        conds.append(Precondition("(1) predictor gives the answer positive probability", w > 0, None if w else v))
    except (ConditioningError, RepetitionError) as err:
        conds.append(Precondition("(1) predictor gives the answer positive probability", False, str(err)))
    conds.append(Precondition("(2) q in dom psi", q in psi, None if q in psi else q))
    ok = q in psi and Psi.defined(psi(q), v)
    conds.append(Precondition("(3) Psi defined at the answer", ok, None if ok else v))
    try:
        law1.response(psi(q), EMPTY, E.preimage_event(s | {claim(q, v)}))
        conds.append(Precondition("(4) oracle conditional well-defined", True))
    except (ConditioningError, RepetitionError, KeyError) as err:
        conds.append(Precondition("(4) oracle conditional well-defined", False, str(err)))
    return CheckReport("embedded-prediction-triple", tuple(conds), Conclusion(all(c.holds for c in conds)))


def embed_calibration_score(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap, n: int,
                            q: str, s: ClaimSet, kind: str = "kl") -> float:
    res = embedded_pair(phi1, phi2, psi, Psi, E, n, q, s)
    if not res.holds:
        raise ConditioningError(
            "not an embedded prediction pair: " + ", ".join(c.label for c in res.conditions if not c.holds)
        )
    return total_score(score_terms(res, psi, Psi, q, phi1.answers, kind))


def embedded_prediction_distribution(phi1, phi2, psi, Psi, E, n) -> PredictionDistribution:
    return PredictionDistribution(phi1, phi2, psi, Psi, n, embedded_event(E))


def _augment(coll, qt, answers) -> list:
    extra = frozenset(claim(q, a) for q, a in zip(qt, answers))
    return [m | extra for m in coll]


def is_discriminating(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, E: EmbeddingMap, n: int, q: str,
                      s: ClaimSet) -> CheckReport:
    """E^-1 E[A] = A for each outcome-augmented preimage collection A."""
    law1, law2 = limit_law(phi1), step_law(phi2, n)
    s = frozenset(s)
    qt = psi(q)
    pred = law2.response((q,), s)
    for (v,), w in pred.dist.items():
        if not w:
            continue
        coll = E.preimage(s | {claim(q, v)})
        oracle = law1.response(qt, EMPTY, E.preimage_event(s | {claim(q, v)}))
        for v1 in oracle.support():
            # augmented sets outside E's domain are not possible universe sets
            aug = {m for m in _augment(coll, qt, v1) if m in E}
            imgs = {E.image(m) for m in aug}
            back = set()
            for y in imgs:
                back.update(E.preimage(y))
            if back != aug:
                extra = sorted((sorted(m) for m in back - aug))[:2]
                return CheckReport(
                    "discriminating",
                    (),
                    Conclusion(False, None, None, None),
                    {"answer": v, "outcome": list(v1), "images": sorted(sorted(y) for y in imgs), "collided": extra},
                )
    return CheckReport("discriminating", (), Conclusion(True))


def _exact_zero_terms(terms) -> bool:
    return all(all(p[a] == r[a] for a in p) for _, _, p, r, _ in terms)


def check_projection(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap, n: int, q: str,
                     s: ClaimSet, kind: str = "kl", embed_check: bool = True) -> CheckReport:
    """Psi(psi(q), v) equals the E-image ratio of scientist probabilities."""
    s = frozenset(s)
    law2 = step_law(phi2, n)
    pre = []
    if embed_check:
        emb = verify_embedding(phi1, phi2, E, n)
        pre.append(Precondition("embedding identity", emb.ok, None if emb.ok else emb.conclusion.to_dict()))
    pair = embedded_pair(phi1, phi2, psi, Psi, E, n, q, s, "embedded pair ")
    pre.extend(pair.conditions)
    if not pair.holds:
        return CheckReport("projection", tuple(pre), None)
    try:
        terms = score_terms(pair, psi, Psi, q, phi1.answers, kind)
        zero = _exact_zero_terms(terms)
        score = None if zero else total_score(terms)
    except SupportError:
        zero, score = False, float("inf")
    pre.append(Precondition("embed-calibrated at epsilon 0", zero, score))
    try:
        disc = is_discriminating(phi1, phi2, psi, E, n, q, s)
        pre.append(Precondition("discriminating", disc.ok, None if disc.ok else disc.details))
    except DomainError as err:
        pre.append(Precondition("discriminating", False, {"undefined": err.witness}))
    qt = psi(q)
    outcomes = list(product(phi1.answers, repeat=len(qt)))
    rows = []
    worst = Fraction(0)
    for (v,), w in pair.predictor.dist.items():
        if not w:
            continue
        coll = E.preimage(s | {claim(q, v)})
        num = {}
        for v1 in outcomes:
            imgs = [E.table[m] for m in _augment(coll, qt, v1) if m in E]
            num[v1] = law2.prob(EMPTY, (), imgs) if imgs else ZERO
        den = sum(num.values(), ZERO)
        if not den:
            return CheckReport("projection", tuple(pre), None, {"undefined_ratio": v})
        stated = Psi.dist(qt, v, phi1.answers)
        for v1 in outcomes:
            rhs = num[v1] / den
            worst = max(worst, abs(stated[v1] - rhs))
            rows.append({"answer": v, "outcome": list(v1), "psi": stated[v1], "ratio": rhs})
    return CheckReport("projection", tuple(pre), Conclusion(worst == 0, None, None, float(worst)), {"rows": rows})
