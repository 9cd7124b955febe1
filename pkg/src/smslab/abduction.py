"""The abduction premise/implication algebra and the three abduction propositions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calibration import PredictionDistribution, PsiInterp, PsiMap, check_alphabets
from .claims import EMPTY, ClaimSet, claim, subsets
from .dist import ZERO, SetLaw, limit_law, step_law
from .embedding import EmbeddingMap, embedded_event
from .errors import ConditioningError, DomainError, RepetitionError, StructuralError
from .evidence import _embedding_hypothesis
from .hypotheses import calibration_family, sweep_epsilon
from .report import CheckReport, Conclusion, Precondition
from .sms import SmsSpec


@dataclass(frozen=True)
class AlphaResult:
    premise: Fraction
    implication: Fraction
    both_sure: bool

    @property
    def equal(self) -> bool:
        return self.premise == self.implication


def _ratio(num, den, what):
    if not den:
        raise ConditioningError(f"{what}: conditioning event has probability 0")
    val = num / den
    return val


def abduction_alpha(law: SetLaw, qs: str, vs: str, qd: str, vd: str, s: ClaimSet = EMPTY) -> AlphaResult:
    """Premise and implication lift factors under a claim-set law.

    The premise is P(vs | qs, (qd, vd), s) / P(vs | qs, s) and the
    implication swaps the roles of the two questions.
    """
    s = frozenset(s)
    cs, cd = claim(qs, vs), claim(qd, vd)
    both = law.prob(s | {cs, cd})
    p_s = _ratio(law.prob(s | {cs}), law.prob(s, (qs,)), "P(vs | qs, s)")
    p_d = _ratio(law.prob(s | {cd}), law.prob(s, (qd,)), "P(vd | qd, s)")
    p_s_given_d = _ratio(both, law.prob(s | {cd}, (qs,)), "P(vs | qs, (qd, vd), s)")
    p_d_given_s = _ratio(both, law.prob(s | {cs}, (qd,)), "P(vd | qd, (qs, vs), s)")
    if not p_s or not p_d:
        raise ConditioningError("a lift factor has a zero denominator")
    total = law.prob(s)
    sure = total > 0 and law.prob(s, (qs,)) == total and law.prob(s, (qd,)) == total
    return AlphaResult(p_s_given_d / p_s, p_d_given_s / p_d, sure)


def alpha_from_joint(joint: dict, vs, vd) -> AlphaResult:
    """Both lift factors of a joint table {(a, b): p} over always-asked questions."""
    row = sum((p for (a, _), p in joint.items() if a == vs), ZERO)
    col = sum((p for (_, b), p in joint.items() if b == vd), ZERO)
    total = sum(joint.values(), ZERO)
    cell = joint.get((vs, vd), ZERO)
    if not row or not col:
        raise ConditioningError("zero marginal in the joint table")
    prem = (cell / col) / (row / total)
    impl = (cell / row) / (col / total)
    return AlphaResult(prem, impl, True)


# -- shared pieces of the three propositions -------------------------------


def _questions(psi: PsiMap, qs: str, qd: str):
    """psi^-1 of (qs,), (qd,) and (qs, qd), or a failed precondition."""
    if not psi.invertible:
        return None, Precondition("psi invertible with the three questions in its image", False, "psi not invertible")
    try:
        out = (psi.inverse((qs,)), psi.inverse((qd,)), psi.inverse((qs, qd)))
    except StructuralError as err:
        return None, Precondition("psi invertible with the three questions in its image", False, str(err))
    return out, Precondition("psi invertible with the three questions in its image", True)


def _F_alpha(F: PredictionDistribution, qs, vs, qd, vd, state):
    """Premise lift of F at one state: F(vs | qs, (qd, vd)) / F(vs | qs)."""
    joint = F.value((qs, qd), state)
    col = sum((p for (a, b), p in joint.items() if b == vd), ZERO)
    single = F.value((qs,), state)[(vs,)]
    if not col or not single:
        raise ConditioningError("zero in the F lift factor")
    return (joint[(vs, vd)] / col) / single


def _F_lift_implication(F, qs, vs, qd, vd, state):
    joint = F.value((qs, qd), state)
    row = sum((p for (a, b), p in joint.items() if a == vs), ZERO)
    single = F.value((qd,), state)[(vd,)]
    if not row or not single:
        raise ConditioningError("zero in the F lift factor")
    return (joint[(vs, vd)] / row), single


def _F_marginal(F, qs, vs, qd, state) -> Precondition | tuple:
    joint = F.value((qs, qd), state)
    lhs = sum((p for (a, _), p in joint.items() if a == vs), ZERO)
    rhs = F.value((qs,), state)[(vs,)]
    return lhs, rhs


def _premise_scope(law2: SetLaw, state: ClaimSet) -> list:
    """Every subset of a positive-probability predictor set, plus the given state."""
    seen = {frozenset(state)}
    out = [frozenset(state)]
    for top in law2.support_sets():
        for c in subsets(top):
            if c not in seen:
                seen.add(c)
                out.append(c)
    return out


def _F_premise(F, law2, qs, vs, qd, vd, state) -> tuple[Precondition, dict]:
    """Hypothesis (1): the premise lift of F exceeds 1 wherever F is defined."""
    label = "(1) abductive premise under F"
    scope = _premise_scope(law2, state)
    evaluated, worst, bad = 0, None, None
    for c in scope:
        try:
            a = _F_alpha(F, qs, vs, qd, vd, c)
        except ConditioningError as err:
            if c == frozenset(state):
                bad = {"set": sorted(c), "error": str(err)}
            continue
        evaluated += 1
        worst = a if worst is None else min(worst, a)
        if not a > 1 and bad is None:
            bad = {"set": sorted(c), "alpha": a}
    info = {"scope": "positive-probability predictor sets and their subsets plus the given state",
            "sets_in_scope": len(scope), "sets_evaluated": evaluated, "min_alpha": worst}
    return Precondition(label, bad is None and evaluated > 0, bad), info


def _run_with_sweep(run, Psi, answers, epsilon, sweep, law1=None):
    rep = run(Psi, epsilon)
    if sweep:
        rep.details["sweep"] = sweep_epsilon(run, Psi, answers, law1)
    return rep


# -- the propositions --------------------------------------------------------


def verify_abduction_math(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, n: int, qs: str, vs: str,
                          qd: str, vd: str, epsilon: float, s: ClaimSet = EMPTY, kind: str = "kl",
                          sweep: bool = False) -> CheckReport:
    """Premise under F^n plus calibration gives the implication under the oracle's limit."""
    s = frozenset(s)
    law1, law2 = limit_law(phi1), step_law(phi2, n)

    def run(Psi_, eps):
        names, pre0 = _questions(psi, qs, qd)
        pre = [pre0]
        try:
            check_alphabets(phi1, phi2)
            pre.append(Precondition("nested alphabets", True))
        except StructuralError as err:
            pre.append(Precondition("nested alphabets", False, str(err)))
        if names is None or not pre[-1].holds:
            return CheckReport("abduction-math", tuple(pre), None)
        a, b, ab = names
        F = PredictionDistribution(phi1, phi2, psi, Psi_, n, law1=law1, law2=law2)
        hyp, score = calibration_family(law1, law2, psi, Psi_, [(s, a, s), (s, b, s), (s, ab, s)],
                                        phi1.answers, kind, eps, None, number=2)
        pairs_ok = hyp[0].holds
        prem, info = _F_premise(F, law2, qs, vs, qd, vd, s) if pairs_ok else (
            Precondition("(1) abductive premise under F", False, "F undefined at the state"), {})
        pre.append(prem)
        pre.append(hyp[0])
        if pairs_ok:
            lhs, rhs = _F_marginal(F, qs, vs, qd, s)
            pre.append(Precondition("(3) F marginalization", lhs == rhs, None if lhs == rhs else {"joint": lhs, "single": rhs}))
        else:
            pre.append(Precondition("(3) F marginalization", False, "F undefined at the state"))
        pre.append(Precondition(hyp[1].label.replace("(3)", "(4)"), hyp[1].holds, hyp[1].witness))
        pre.append(Precondition(hyp[2].label.replace("(4)", "(5)"), hyp[2].holds, hyp[2].witness))
        pre.append(_oracle_marginal(law1, qs, vs, qd, [(s, None)]))
        details = {"max_score": score, "epsilon": eps, "premise": info}
        try:
            lhs = law1.conditional((qd,), (vd,), s | {claim(qs, vs)})
            rhs = law1.conditional((qd,), (vd,), s)
            conc = Conclusion(lhs > rhs, lhs, rhs, lhs - rhs)
            details["lift"] = lhs / rhs
        except (ConditioningError, RepetitionError):
            conc = None
        return CheckReport("abduction-math", tuple(pre), conc, details)

    return _run_with_sweep(run, Psi, phi1.answers, epsilon, sweep, law1)


def _oracle_marginal(law1, qs, vs, qd, events, number=6) -> Precondition:
    """Sum over the second answer of the joint equals the single-question conditional."""
    label = f"({number}) oracle marginalization"
    for claims, coll in events:
        try:
            joint = law1.response((qs, qd), claims or EMPTY, coll)
            single = law1.response((qs,), claims or EMPTY, coll)
        except (ConditioningError, RepetitionError) as err:
            return Precondition(label, False, str(err))
        lhs = sum((p for (a, _), p in joint.dist.items() if a == vs), ZERO)
        if lhs != single[(vs,)]:
            return Precondition(label, False, {"joint": lhs, "single": single[(vs,)]})
    return Precondition(label, True)


def _renumber(p: Precondition, old: str, new: str) -> Precondition:
    return Precondition(p.label.replace(old, new, 1), p.holds, p.witness)


def verify_abduction_sci_expect(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap, n: int,
                                qs: str, vs: str, qd: str, vd: str, epsilon: float, s: ClaimSet = EMPTY,
                                kind: str = "kl", embed_check: bool = True, sweep: bool = False) -> CheckReport:
    """Embedded premise plus embed-calibration gives the expected universe implication."""
    s = frozenset(s)
    law1, law2 = limit_law(phi1), step_law(phi2, n)

    def run(Psi_, eps):
        names, pre0 = _questions(psi, qs, qd)
        pre = [pre0, _embedding_hypothesis(phi1, phi2, E, n, embed_check)]
        if names is None:
            return CheckReport("abduction-sci-expect", tuple(pre), None)
        a, b, ab = names
        F = PredictionDistribution(phi1, phi2, psi, Psi_, n, embedded_event(E), law1, law2)
        hyp, score = calibration_family(law1, law2, psi, Psi_, [(s, a, s), (s, b, s), (s, ab, s)],
                                        phi1.answers, kind, eps, E, number=2)
        pairs_ok = hyp[0].holds
        prem, info = _F_premise(F, law2, qs, vs, qd, vd, s) if pairs_ok else (
            Precondition("(1) abductive premise under F", False, "F undefined at the state"), {})
        pre += [prem, hyp[0]]
        if pairs_ok:
            lhs, rhs = _F_marginal(F, qs, vs, qd, s)
            pre.append(Precondition("(3) F marginalization", lhs == rhs, None if lhs == rhs else {"joint": lhs, "single": rhs}))
        else:
            pre.append(Precondition("(3) F marginalization", False, "F undefined at the state"))
        pre.append(_renumber(hyp[1], "(3)", "(4)"))
        pre.append(_renumber(hyp[2], "(4)", "(5)"))
        pre.append(_embedded_oracle_marginal(law1, E, qs, vs, qd, a, ab, s, phi2.answers))
        details = {"max_score": score, "epsilon": eps, "premise": info}
        try:
            with_claim = _expectation(law1, law2, E, b, qd, vd, s, claim(qs, vs))
            without = _expectation(law1, law2, E, b, qd, vd, s, None)
            conc = Conclusion(with_claim > without, with_claim, without, with_claim - without)
            details["lift"] = with_claim / without
        except (ConditioningError, RepetitionError):
            conc = None
        return CheckReport("abduction-sci-expect", tuple(pre), conc, details)

    return _run_with_sweep(run, Psi, phi1.answers, epsilon, sweep, law1)


def _expectation(law1, law2, E, b, qd, vd, s, extra):
    """Sum_v P2(v | b, [extra], s) P1(vd | qd, [extra], E^-1[{(b, v)} u s])."""
    state = s | {extra} if extra is not None else s
    pred = law2.response((b,), state)
    total = ZERO
    for (v,), w in pred.dist.items():
        if not w:
            continue
        coll = E.preimage_event(s | {claim(b, v)})
        total += w * law1.conditional((qd,), (vd,), frozenset([extra]) if extra else EMPTY, coll)
    return total


def _embedded_oracle_marginal(law1, E, qs, vs, qd, a, ab, state, answers2) -> Precondition:
    """Condition (6): for each v the joint-question conditional marginalizes to the single one."""
    label = "(6) oracle marginalization on preimage events"
    evaluated = 0
    for v in answers2:
        c_ab = E.preimage_event(state | {claim(ab, v)})
        c_a = E.preimage_event(state | {claim(a, v)})
        if not c_ab or not c_a:
            continue
        try:
            joint = law1.response((qs, qd), EMPTY, c_ab)
            single = law1.response((qs,), EMPTY, c_a)
        except (ConditioningError, RepetitionError):
            continue
        evaluated += 1
        lhs = sum((p for (x, _), p in joint.dist.items() if x == vs), ZERO)
        if lhs != single[(vs,)]:
            return Precondition(label, False, {"answer": v, "joint": lhs, "single": single[(vs,)]})
    return Precondition(label, True, None if evaluated else "vacuous")


def verify_abduction_sci_project(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap,
                                 n: int, qs: str, vs: str, qd: str, vd: str, epsilon: float,
                                 s: ClaimSet = EMPTY, kind: str = "kl", embed_check: bool = True,
                                 sweep: bool = False) -> CheckReport:
    """A universe premise plus embed-calibration gives the implication under F^n at E[s]."""
    s = frozenset(s)
    law1, law2 = limit_law(phi1), step_law(phi2, n)

    def run(Psi_, eps):
        names, pre0 = _questions(psi, qs, qd)
        pre = [pre0, _embedding_hypothesis(phi1, phi2, E, n, embed_check)]
        if names is None:
            return CheckReport("abduction-sci-project", tuple(pre), None)
        try:
            y = E.image(s)
        except DomainError as err:
            pre.append(Precondition("E defined on the universe state", False, err.witness))
            return CheckReport("abduction-sci-project", tuple(pre), None)
        a, b, ab = names
        hyp, score = calibration_family(law1, law2, psi, Psi_, [(y, a, y), (y, b, y), (y, ab, y)],
                                        phi1.answers, kind, eps, E, number=2)
        prem, info = _universe_premise(law1, law2, E, qs, vs, qd, vd, a, ab, y)
        pre += [prem, hyp[0]]
        pre.append(_renumber(_embedded_oracle_marginal(law1, E, qs, vs, qd, a, ab, y, phi2.answers), "(6)", "(3)"))
        pre.append(_renumber(hyp[1], "(3)", "(4)"))
        pre.append(_renumber(hyp[2], "(4)", "(5)"))
        details = {"max_score": score, "epsilon": eps, "premise": info, "image": sorted(y)}
        F = PredictionDistribution(phi1, phi2, psi, Psi_, n, embedded_event(E), law1, law2)
        if not hyp[0].holds:
            pre.append(Precondition("(6) F marginalization", False, "F undefined at the image"))
            return CheckReport("abduction-sci-project", tuple(pre), None, details)
        lhs, rhs = _F_marginal(F, qs, vs, qd, y)
        pre.append(Precondition("(6) F marginalization", lhs == rhs, None if lhs == rhs else {"joint": lhs, "single": rhs}))
        try:
            cond, prior = _F_lift_implication(F, qs, vs, qd, vd, y)
            conc = Conclusion(cond > prior, cond, prior, cond - prior)
            details["lift"] = cond / prior
        except ConditioningError:
            conc = None
        return CheckReport("abduction-sci-project", tuple(pre), conc, details)

    return _run_with_sweep(run, Psi, phi1.answers, epsilon, sweep, law1)


def _universe_premise(law1, law2, E, qs, vs, qd, vd, a, ab, y) -> tuple[Precondition, dict]:
    """Hypothesis (1): the universe premise on preimage-conditioned events, for every v."""
    label = "(1) abductive premise under the universe on preimage events"
    answers = set()
    for q in (a, ab):
        try:
            answers |= {v for (v,) in law2.response((q,), y).support()}
        except (ConditioningError, RepetitionError):
            pass
    evaluated, worst = 0, None
    for v in sorted(answers):
        c_ab = E.preimage_event(y | {claim(ab, v)})
        c_a = E.preimage_event(y | {claim(a, v)})
        if not c_ab or not c_a:
            continue
        try:
            num = law1.prob({claim(qs, vs), claim(qd, vd)}, (), c_ab) / law1.prob({claim(qd, vd)}, (qs,), c_ab)
            den = law1.conditional((qs,), (vs,), EMPTY, c_a)
        except (ConditioningError, RepetitionError, ZeroDivisionError) as err:
            return Precondition(label, False, {"answer": v, "error": str(err) or "zero conditional"}), {}
        if not den:
            return Precondition(label, False, {"answer": v, "error": "zero conditional"}), {}
        alpha = num / den
        evaluated += 1
        worst = alpha if worst is None else min(worst, alpha)
        if not alpha > 1:
            return Precondition(label, False, {"answer": v, "alpha": alpha}), {"min_alpha": alpha}
    info = {"answers_evaluated": evaluated, "min_alpha": worst}
    return Precondition(label, evaluated > 0, None if evaluated else "no answer evaluated"), info
