"""Shared hypothesis checks for the evidence and abduction propositions."""
from __future__ import annotations

import math
from fractions import Fraction

from .calibration import math_event, pair_conditions, score_terms, total_score
from .claims import EMPTY, fmt_claims
from .divergence import NEEDS_FULL_SUPPORT, kind_of
from .errors import ConditioningError, RepetitionError, SupportError
from .report import Precondition

CALIBRATION = "calibration"


def answer_range(law1, qt) -> set:
    """Answer tuples the oracle gives ``qt`` with positive limit probability."""
    try:
        return set(law1.response(tuple(qt)).support())
    except (ConditioningError, RepetitionError):
        return set()


def calibrated(terms, epsilon: float) -> tuple[bool, float]:
    """(holds, score).  At epsilon 0 the test is exact equality of every term."""
    try:
        score = total_score(terms)
    except SupportError:
        return False, math.inf
    if epsilon == 0:
        return all(all(p[a] == r[a] for a in p) for _, _, p, r, _ in terms), score
    return score <= epsilon, score


def _terms(pair, psi, Psi, q, answers1, kind):
    try:
        return score_terms(pair, psi, Psi, q, answers1, kind)
    except SupportError:
        # keep the distributions so the gate can still be reported
        return [(v, w, Psi.dist(psi(q), v, answers1), pair.oracle[v].dist, math.inf)
                for (v,), w in pair.predictor.dist.items() if w]


def calibration_family(law1, law2, psi, Psi, family, answers1, kind: str, epsilon: float, E=None,
                       number: int = 2, what: str = "") -> tuple[list, float]:
    """Pair, calibration and full-support hypotheses over a family of states.

    ``family`` lists ``(name set, q, predictor state)`` triples; with ``E`` the
    oracle is conditioned on preimage collections (embedded pairs).  The
    three results are aggregated into one precondition each, numbered from
    ``number``; the witness names the first failing state.
    """
    kind = kind_of(kind)
    embedded = E is not None
    tag = "embedded " if embedded else ""
    if embedded:
        def event(q, v, s):
            return EMPTY, E.preimage_event(frozenset(s) | {(q, v)})
    else:
        event = math_event
    pair_bad, cal_bad, gate_bad = None, None, None
    worst = 0.0
    ranges: dict = {}
    for name, q, state in family:
        pair = pair_conditions(law1, law2, psi, Psi, q, state, event)
        where = {"set": fmt_claims(name), "question": q}
        if not pair.holds:
            if pair_bad is None:
                pair_bad = dict(where, failed=[c.label for c in pair.conditions if not c.holds])
            continue
        terms = _terms(pair, psi, Psi, q, answers1, kind)
        ok, score = calibrated(terms, epsilon)
        worst = max(worst, score)
        if not ok and cal_bad is None:
            cal_bad = dict(where, score=score)
        if kind in NEEDS_FULL_SUPPORT:
            qt = psi(q)
            if qt not in ranges:
                ranges[qt] = answer_range(law1, qt)
            rng = ranges[qt]
            for v, _, p, r, _ in terms:
                if any(not p.get(a) or not r.get(a) for a in rng) and gate_bad is None:
                    gate_bad = dict(where, answer=v)
    label = f" {what}" if what else ""
    pre = [
        Precondition(f"({number}) {tag}prediction pairs{label}", pair_bad is None, pair_bad),
        Precondition(f"({number + 1}) {tag}{CALIBRATION} at epsilon{label}", cal_bad is None, cal_bad),
        Precondition(f"({number + 2}) full-support gate{label}", gate_bad is None, gate_bad),
    ]
    return pre, worst


def _calibration_free(rep) -> bool:
    others = all(p.holds for p in rep.preconditions if CALIBRATION not in p.label)
    return others and rep.conclusion is not None and rep.conclusion.holds


def sweep_epsilon(run, Psi, answers, law1=None, iterations: int = 10) -> dict:
    """Bisect the largest Psi perturbation at which the conclusion still holds.

    ``run(Psi', epsilon)`` re-evaluates the check.  The perturbation is
    ``(1 - delta) Psi + delta * uniform``; calibration is judged separately so
    the reported threshold is the calibration score at the largest passing
    delta.  The search is empirical: it assumes the passing deltas form an
    interval starting at 0.  With ``law1`` the uniform is over each
    question tuple's answer range, so kl and js scores stay finite.
    """
    support = None if law1 is None else {qt: answer_range(law1, qt) for qt, _ in Psi.table}
    base = run(Psi, math.inf)
    if not _calibration_free(base):
        return {"delta": None, "epsilon": None}
    lo, hi = Fraction(0), Fraction(1)
    top = run(Psi.mixed(hi, answers, support), math.inf)
    if _calibration_free(top):
        return {"delta": hi, "epsilon": top.details.get("max_score")}
    best = base
    for _ in range(iterations):
        mid = (lo + hi) / 2
        rep = run(Psi.mixed(mid, answers, support), math.inf)
        if _calibration_free(rep):
            lo, best = mid, rep
        else:
            hi = mid
    return {"delta": lo, "epsilon": best.details.get("max_score")}
