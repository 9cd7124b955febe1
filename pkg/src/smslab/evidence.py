"""Evidence paths, the non-thwarting condition and the evidence propositions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .calibration import PredictionDistribution, PsiInterp, PsiMap, check_alphabets
from .claims import EMPTY, ClaimSet, claim, fmt_claims, subsets
from .dist import ZERO, SetLaw, limit_law, step_law
from .embedding import EmbeddingMap, embedded_event, verify_embedding
from .errors import ConditioningError, DomainError, RepetitionError, StructuralError
from .hypotheses import calibration_family, sweep_epsilon
from .report import CheckReport, Conclusion, Precondition
from .sms import SmsSpec


class LawBase:
    """Evidence base backed by an exact claim-set law."""

    def __init__(self, law: SetLaw):
        self.law = law

    def joint(self, qt, answers, claims) -> Fraction:
        claims = frozenset(claims)
        if answers is None:
            return self.law.prob(claims, tuple(qt))
        return self.law.prob(claims | {claim(q, a) for q, a in zip(qt, answers)})


class FBase:
    """Evidence base backed by a prediction distribution."""

    def __init__(self, F: PredictionDistribution):
        self.F = F

    def joint(self, qt, answers, claims) -> Fraction:
        return self.F.joint(tuple(qt), answers, frozenset(claims))


@dataclass(frozen=True)
class EvidenceScenario:
    base: object
    beta: ClaimSet
    paths: tuple
    question: tuple
    target: tuple

    def __post_init__(self):
        if not self.paths:
            raise ValueError("an evidence collection needs at least one path")
        object.__setattr__(self, "beta", frozenset(self.beta))
        object.__setattr__(self, "paths", tuple(frozenset(p) for p in self.paths))
        object.__setattr__(self, "question", tuple(self.question))
        object.__setattr__(self, "target", tuple(self.target))

    def cumulative(self, i: int) -> ClaimSet:
        """beta together with B(1..i); claim-set lists are read as unions."""
        out = set(self.beta)
        for p in self.paths[:i]:
            out |= p
        return frozenset(out)

    def cond(self, extra: ClaimSet) -> Fraction:
        """P(target | question, beta, extra); zero or undefined raises."""
        x = self.beta | extra
        den = self.base.joint(self.question, None, x)
        if not den:
            raise ConditioningError(f"P(question, {fmt_claims(x)}) = 0")
        val = self.base.joint(self.question, self.target, x) / den
        if not val:
            raise ConditioningError(f"P(target | question, {fmt_claims(x)}) = 0")
        return val

    def given_claim(self, extra: ClaimSet, with_answer: bool) -> Fraction:
        """P(extra | (question, target), beta) or P(extra | question, beta)."""
        ans = self.target if with_answer else None
        den = self.base.joint(self.question, ans, self.beta)
        if not den:
            raise ConditioningError("conditioning on beta has probability 0")
        val = self.base.joint(self.question, ans, self.beta | extra) / den
        if not val:
            raise ConditioningError(f"P({fmt_claims(extra)} | ...) = 0")
        return val

    def reordered(self, order) -> "EvidenceScenario":
        return EvidenceScenario(self.base, self.beta, tuple(self.paths[i] for i in order), self.question, self.target)


def _evidence_terms(scn: EvidenceScenario):
    base = scn.cond(EMPTY)
    lifts = [(i + 1, scn.cond(p), base) for i, p in enumerate(scn.paths)]
    chain_vals = [scn.cond(scn.cumulative(i)) for i in range(len(scn.paths) + 1)]
    chain = [(i, chain_vals[i], chain_vals[i - 1]) for i in range(1, len(chain_vals))]
    return lifts, chain, chain_vals


def evidence_status(scn: EvidenceScenario):
    """(nonzero, holds, witness, chain values) for the evidence definition."""
    try:
        lifts, chain, vals = _evidence_terms(scn)
    except ConditioningError as err:
        return False, False, str(err), None
    bad_lift = [{"path": i, "with": a, "without": b} for i, a, b in lifts if not a > b]
    bad_chain = [{"index": i, "cumulative": a, "previous": b} for i, a, b in chain if not a > b]
    witness = None
    if bad_lift or bad_chain:
        witness = {"lift": bad_lift, "chain": bad_chain}
    return True, not witness, witness, vals


def is_evidence_collection(scn: EvidenceScenario, all_orders: bool = False) -> CheckReport:
    """Per-path lift plus the strict cumulative chain.

    With ``all_orders`` the chain must hold for every ordering of the paths
    (only offered for up to six paths).
    """
    orders = [tuple(range(len(scn.paths)))]
    if all_orders:
        if len(scn.paths) > 6:
            raise ValueError("all-orders mode is limited to six paths")
        orders = list(permutations(range(len(scn.paths))))
    for order in orders:
        nz, holds, witness, vals = evidence_status(scn.reordered(order))
        pre = (Precondition("nonzero conditionals", nz, None if nz else witness),)
        if not nz:
            return CheckReport("evidence-collection", pre, None)
        if not holds:
            return CheckReport("evidence-collection", pre, Conclusion(False, vals, None, None), {"order": list(order), "witness": witness})
    return CheckReport("evidence-collection", pre, Conclusion(True, vals, None, _min_step(vals)), {"orders": len(orders)})


def _min_step(vals):
    return min((b - a for a, b in zip(vals, vals[1:])), default=None)


def _thwart_ratios(scn: EvidenceScenario):
    rows = []
    for i in range(2, len(scn.paths) + 1):
        x, y, b = scn.cumulative(i) - scn.beta, scn.cumulative(i - 1) - scn.beta, scn.paths[i - 1]
        sides = []
        for with_answer in (True, False):
            sides.append(
                scn.given_claim(x, with_answer) / (scn.given_claim(y, with_answer) * scn.given_claim(b, with_answer))
            )
        rows.append((i, sides[0], sides[1]))
    return rows


def is_nonthwarting(scn: EvidenceScenario) -> CheckReport:
    """The ratio condition under which paths do not work at cross-purposes."""
    try:
        rows = _thwart_ratios(scn)
    except ConditioningError as err:
        return CheckReport("non-thwarting", (Precondition("nonzero conditionals", False, str(err)),), None)
    bad = [{"index": i, "with_answer": a, "question_only": b} for i, a, b in rows if a < b]
    return CheckReport(
        "non-thwarting",
        (Precondition("nonzero conditionals", True),),
        Conclusion(not bad, [r[1] for r in rows], [r[2] for r in rows], bad or None),
    )


def derive_monotone(scn: EvidenceScenario) -> CheckReport:
    """Per-path lift and non-thwarting imply the cumulative chain.

    Each chain ratio is split into three factors: the lift of the newest
    path, the inverse question-only overlap ratio and the answer-conditioned
    overlap ratio.  The product is checked to reproduce the ratio exactly.
    """
    try:
        lifts, chain, vals = _evidence_terms(scn)
        rows = _thwart_ratios(scn)
    except ConditioningError as err:
        return CheckReport("derive-monotone", (Precondition("nonzero conditionals", False, str(err)),), None)
    lift_ok = all(a > b for _, a, b in lifts)
    thwart_bad = [i for i, a, b in rows if a < b]
    factors = []
    exact = True
    for i in range(2, len(scn.paths) + 1):
        f1 = scn.cond(scn.paths[i - 1]) / scn.cond(EMPTY)
        _, with_a, q_only = rows[i - 2]
        f2, f3 = 1 / q_only, with_a
        ratio = vals[i] / vals[i - 1]
        exact = exact and f1 * f2 * f3 == ratio
        factors.append({"index": i, "lift": f1, "question_factor": f2, "answer_factor": f3, "ratio": ratio})
    pre = (
        Precondition("nonzero conditionals", True),
        Precondition("per-path lift", lift_ok, None if lift_ok else [i for i, a, b in lifts if not a > b]),
        Precondition("non-thwarting", not thwart_bad, thwart_bad or None),
    )
    chain_ok = all(a > b for _, a, b in chain)
    return CheckReport(
        "derive-monotone",
        pre,
        Conclusion(chain_ok and exact, vals, None, _min_step(vals)),
        {"factors": factors, "decomposition_exact": exact},
    )


# -- the three evidence propositions ---------------------------------------


def _strict_chain(values):
    holds = all(b > a for a, b in zip(values, values[1:]))
    return Conclusion(holds, values, None, _min_step(values))


def _single_question(psi: PsiMap, q: str):
    if q not in psi:
        return Precondition("|psi(q)| = 1", False, f"{q} not in dom psi")
    ok = len(psi(q)) == 1
    return Precondition("|psi(q)| = 1", ok, None if ok else list(psi(q)))


def _union(beta, paths) -> ClaimSet:
    out = set(beta)
    for p in paths:
        out |= set(p)
    return frozenset(out)


def _evidence_hypothesis(label, scn) -> Precondition:
    nz, holds, witness, _ = evidence_status(scn)
    if not nz:
        return Precondition(label, False, {"zero conditional": witness})
    return Precondition(label, holds, witness)


def verify_evidence_math(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, n: int, q: str,
                         beta: ClaimSet, paths, target, epsilon: float, kind: str = "kl",
                         sweep: bool = False) -> CheckReport:
    """Calibration transfers an evidence chain from F^n to the oracle's limit."""
    beta = frozenset(beta)
    paths = tuple(frozenset(p) for p in paths)
    target = (target,) if isinstance(target, str) else tuple(target)

    def run(Psi_, eps):
        pre = [_single_question(psi, q)]
        try:
            check_alphabets(phi1, phi2)
            pre.append(Precondition("nested alphabets", True))
        except StructuralError as err:
            pre.append(Precondition("nested alphabets", False, str(err)))
        if not all(p.holds for p in pre):
            return CheckReport("evidence-math", tuple(pre), None)
        qt = psi(q)
        law1, law2 = limit_law(phi1), step_law(phi2, n)
        F = PredictionDistribution(phi1, phi2, psi, Psi_, n, law1=law1, law2=law2)
        scn = EvidenceScenario(FBase(F), beta, paths, qt, target)
        pre.append(_evidence_hypothesis("(1) evidence collection under F", scn))
        fam = [(c, q, c) for c in subsets(_union(beta, paths))]
        hyp, score = calibration_family(law1, law2, psi, Psi_, fam, phi1.answers, kind, eps, None)
        pre.extend(hyp)
        try:
            vals = [law1.conditional(qt, target, beta | scn.cumulative(i)) for i in range(len(paths) + 1)]
            conc = _strict_chain(vals)
        except (ConditioningError, RepetitionError):
            conc = None
        return CheckReport("evidence-math", tuple(pre), conc, {"max_score": score, "epsilon": eps})

    rep = run(Psi, epsilon)
    if sweep:
        rep.details["sweep"] = sweep_epsilon(run, Psi, phi1.answers, limit_law(phi1))
    return rep


def verify_evidence_sci(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap, n: int,
                        q: str, beta: ClaimSet, paths, target, epsilon: float, kind: str = "kl",
                        embed_check: bool = True, sweep: bool = False) -> CheckReport:
    """Embed-calibration makes the expected universe probability of the target grow."""
    beta = frozenset(beta)
    paths = tuple(frozenset(p) for p in paths)
    target = (target,) if isinstance(target, str) else tuple(target)
    law1, law2 = limit_law(phi1), step_law(phi2, n)

    def run(Psi_, eps):
        pre = [_single_question(psi, q)]
        pre.append(_embedding_hypothesis(phi1, phi2, E, n, embed_check))
        if not pre[0].holds:
            return CheckReport("evidence-sci", tuple(pre), None)
        qt = psi(q)
        F = PredictionDistribution(phi1, phi2, psi, Psi_, n, embedded_event(E), law1, law2)
        scn = EvidenceScenario(FBase(F), beta, paths, qt, target)
        pre.append(_evidence_hypothesis("(1) evidence collection under embedded F", scn))
        fam = [(c, q, c) for c in subsets(_union(beta, paths))]
        hyp, score = calibration_family(law1, law2, psi, Psi_, fam, phi1.answers, kind, eps, E)
        pre.extend(hyp)
        try:
            vals = []
            for i in range(len(paths) + 1):
                x = scn.cumulative(i)
                pred = law2.response((q,), x)
                total = ZERO
                for (v,), w in pred.dist.items():
                    if w:
                        coll = E.preimage_event(x | {claim(q, v)})
                        total += w * law1.conditional(qt, target, EMPTY, coll)
                vals.append(total)
            conc = _strict_chain(vals)
        except (ConditioningError, RepetitionError):
            conc = None
        return CheckReport("evidence-sci", tuple(pre), conc, {"max_score": score, "epsilon": eps})

    rep = run(Psi, epsilon)
    if sweep:
        rep.details["sweep"] = sweep_epsilon(run, Psi, phi1.answers, law1)
    return rep


def _embedding_hypothesis(phi1, phi2, E, n, embed_check) -> Precondition:
    if not embed_check:
        return Precondition("embedding identity", True, "relaxed")
    rep = verify_embedding(phi1, phi2, E, n)
    return Precondition("embedding identity", rep.ok, None if rep.ok else {"max_residual": rep.conclusion.margin})


def verify_evidence_sci_flipped(phi1: SmsSpec, phi2: SmsSpec, psi: PsiMap, Psi: PsiInterp, E: EmbeddingMap,
                                n: int, q: str, beta: ClaimSet, paths, target, epsilon: float, kind: str = "kl",
                                embed_check: bool = True, sweep: bool = False) -> CheckReport:
    """Universe evidence plus embed-calibration makes F^n's belief in the target grow."""
    beta = frozenset(beta)
    paths = tuple(frozenset(p) for p in paths)
    target = (target,) if isinstance(target, str) else tuple(target)
    law1, law2 = limit_law(phi1), step_law(phi2, n)

    def run(Psi_, eps):
        pre = [_single_question(psi, q)]
        pre.append(_embedding_hypothesis(phi1, phi2, E, n, embed_check))
        if not pre[0].holds:
            return CheckReport("evidence-sci-flipped", tuple(pre), None)
        qt = psi(q)
        scn = EvidenceScenario(LawBase(law1), beta, paths, qt, target)
        pre.append(_evidence_hypothesis("(1) evidence collection under the universe limit", scn))
        images = {}
        undefined = []
        for c in subsets(_union(beta, paths)):
            try:
                images[c] = E.image(c)
            except DomainError:
                undefined.append(sorted(c))
        if undefined:
            pre.append(Precondition("E defined on every sub-claim-set", False, undefined[:3]))
            return CheckReport("evidence-sci-flipped", tuple(pre), None)
        fam = [(c, q, images[c]) for c in images]
        hyp, score = calibration_family(law1, law2, psi, Psi_, fam, phi1.answers, kind, eps, E)
        pre.extend(hyp)
        pre.append(_proportionality(law1, law2, E, q, qt, target, scn, len(paths)))
        F = PredictionDistribution(phi1, phi2, psi, Psi_, n, embedded_event(E), law1, law2)
        try:
            vals = [F.conditional(qt, target, E.image(scn.cumulative(i))) for i in range(len(paths) + 1)]
            conc = _strict_chain(vals)
        except (ConditioningError, RepetitionError, DomainError):
            conc = None
        return CheckReport("evidence-sci-flipped", tuple(pre), conc, {"max_score": score, "epsilon": eps})

    rep = run(Psi, epsilon)
    if sweep:
        rep.details["sweep"] = sweep_epsilon(run, Psi, phi1.answers, law1)
    return rep


def _proportionality(law1, law2, E, q, qt, target, scn, N) -> Precondition:
    """Condition (5): for each i the ratio is the same for every answer v."""
    label = "(5) proportional universe conditionals"
    table = []
    for i in range(1, N + 1):
        x = scn.cumulative(i)
        y = E.image(x)
        try:
            base = law1.conditional(qt, target, x)
            pred = law2.response((q,), y)
        except (ConditioningError, RepetitionError) as err:
            return Precondition(label, False, {"index": i, "error": str(err)})
        ratios = {}
        for (v,), w in pred.dist.items():
            if not w:
                continue
            try:
                ratios[v] = law1.conditional(qt, target, EMPTY, E.preimage_event(y | {claim(q, v)})) / base
            except (ConditioningError, RepetitionError) as err:
                return Precondition(label, False, {"index": i, "answer": v, "error": str(err)})
        distinct = sorted(set(ratios.values()))
        if len(distinct) > 1:
            pair = [(v, r) for v, r in sorted(ratios.items()) if r in distinct[:1] or r == distinct[-1]]
            return Precondition(label, False, {"index": i, "ratios": pair[:2]})
        table.append({"index": i, "ratio": distinct[0] if distinct else None})
    return Precondition(label, True, None)
