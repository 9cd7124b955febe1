"""Exact distributions over what an SMS emits.

Every probability in the library is a question about the claim set an SMS
emits, so each source of randomness is first reduced to a :class:`SetLaw`: a
finite distribution over claim sets.  The step-n law aggregates the step-n
marginal over vectors by their unordering.  The limit law is the
distribution of the claim set a backward-consistent kernel eventually
settles on, computed exactly from its recurrent classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional

import networkx as nx
import numpy as np

from .claims import EMPTY, ClaimSet, fmt_claims, minimal_members, questions_of, unorder
from .errors import ConditioningError, HorizonError, PreconditionError, RepetitionError, UnsupportedModeError
from .exact import solve
from .sms import Meter, SmsSpec, check_step, closure_consistent, ensure_valid

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Response:
    """A normalized distribution over answer tuples plus the sure flag."""

    dist: dict
    sure: bool

    def __getitem__(self, answers) -> Fraction:
        return self.dist[tuple(answers)]

    def support(self) -> list:
        return [a for a, p in self.dist.items() if p]


@dataclass(frozen=True)
class SetLaw:
    """A finite distribution over claim sets.

    ``entries`` holds ``(claim set, its questions, probability)`` triples and
    ``answers`` is the answer alphabet used to enumerate response outcomes.
    """

    entries: tuple
    answers: tuple
    label: str = ""
    _responses: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_sets(cls, table: dict, answers, label: str = "") -> "SetLaw":
        rows = tuple(
            (s, questions_of(s), Fraction(p)) for s, p in sorted(table.items(), key=lambda kv: sorted(kv[0])) if p
        )
        return cls(rows, tuple(answers), label)

    def table(self) -> dict:
        return {s: p for s, _, p in self.entries}

    def _rows(self, claims: ClaimSet, questions: Iterable, any_of):
        claims = frozenset(claims)
        qs = frozenset(questions)
        members = None if any_of is None else minimal_members(any_of)
        for s, sq, p in self.entries:
            if not claims <= s or not qs <= sq:
                continue
            if members is not None and not any(m <= s for m in members):
                continue
            yield s, p

    def prob(self, claims: ClaimSet = EMPTY, questions: Iterable = (), any_of=None) -> Fraction:
        """Probability that the emitted set contains ``claims``, asks every
        question in ``questions`` and (when given) contains some member of
        ``any_of``."""
        return sum((p for _, p in self._rows(claims, questions, any_of)), ZERO)

    def prob_exact(self, s: ClaimSet) -> Fraction:
        s = frozenset(s)
        return sum((p for t, _, p in self.entries if t == s), ZERO)

    def response(self, qs, claims: ClaimSet = EMPTY, any_of=None) -> Response:
        """Distribution over answers to ``qs`` given the conditioning event."""
        qs = tuple(qs)
        if not qs:
            raise ValueError("need at least one question")
        key = (qs, frozenset(claims), None if any_of is None else frozenset(map(frozenset, any_of)))
        if key not in self._responses:
            self._responses[key] = self._response(qs, claims, any_of)
        return self._responses[key]

    def _response(self, qs, claims, any_of) -> Response:
        total = ZERO
        num: dict = {}
        for s, p in self._rows(claims, qs, any_of):
            picked = []
            for q in qs:
                found = [a for (qq, a) in s if qq == q]
                if len(found) != 1:
                    raise RepetitionError(
                        f"{self.label}: emitted set {fmt_claims(s)} answers {q!r} {len(found)} times; "
                        "the response distribution is only normalized for non-repeating vectors"
                    )
                picked.append(found[0])
            key = tuple(picked)
            num[key] = num.get(key, ZERO) + p
            total += p
        if total == 0:
            raise ConditioningError(
                f"{self.label}: conditioning event has probability 0",
                questions=list(qs),
                claims=sorted(frozenset(claims)),
                collection=None if any_of is None else [sorted(m) for m in minimal_members(any_of)],
            )
        dist = {a: num[a] / total if a in num else ZERO for a in product(self.answers, repeat=len(qs))}
        for a in num:
            dist.setdefault(a, num[a] / total)
        sure = sum(1 for p in dist.values() if p) == 1
        return Response(dist, sure)

    def conditional(self, qs, answers, claims: ClaimSet = EMPTY, any_of=None) -> Fraction:
        """P(answers | qs, conditioning event), for one answer tuple."""
        return self.response(qs, claims, any_of)[tuple(answers)]

    def support_sets(self) -> list:
        return [s for s, _, _ in self.entries]


def step_law(spec: SmsSpec, n: int) -> SetLaw:
    ensure_valid(spec)
    check_step(spec, n)

    def build():
        agg: dict = {}
        for v, p in spec.marginal(n).items():
            u = unorder(v)
            agg[u] = agg.get(u, ZERO) + p
        return SetLaw.from_sets(agg, spec.answers, f"step {n}")

    return spec.cached(("step_law", n), build)


def limit_law(spec: SmsSpec) -> SetLaw:
    """Exact law of the claim set a backward-consistent kernel settles on.

    After step kappa every trajectory's unordering only grows, so it is
    eventually constant and equals the common unordering of the recurrent
    class the chain is absorbed into.  Superset probabilities converge to the
    probabilities of this terminal set, so the limit is a finite law computed
    from absorption probabilities.
    """
    if not spec.is_kernel:
        raise UnsupportedModeError("the limit distribution needs kernel mode")
    ensure_valid(spec)
    return spec.cached("limit_law", lambda: _limit_law(spec))


def _limit_kappa(spec: SmsSpec) -> int:
    return spec.kappa or 0


def _limit_law(spec: SmsSpec) -> SetLaw:
    kappa = _limit_kappa(spec)
    ok, witness = closure_consistent(spec, kappa)
    if not ok:
        raise PreconditionError(f"not backward-consistent after step {kappa}: {witness}")
    mu = spec.marginal(kappa + 1)
    graph = nx.DiGraph()
    meter = Meter("limit law")
    for v in _closure_of(spec, mu):
        graph.add_node(v)
        for t in spec.successors(v):
            meter.tick()
            graph.add_edge(v, t)
    cond = nx.condensation(graph)
    members = cond.graph["mapping"]
    recurrent: dict = {}
    for comp in cond.nodes:
        if cond.out_degree(comp) == 0:
            states = cond.nodes[comp]["members"]
            sets = {unorder(s) for s in states}
            assert len(sets) == 1, "a recurrent class of a monotone chain has one unordering"
            recurrent[comp] = next(iter(sets))
    labels = sorted(set(recurrent.values()), key=sorted)
    col = {lab: i for i, lab in enumerate(labels)}
    transient = sorted(v for v in graph.nodes if members[v] not in recurrent)
    tidx = {v: i for i, v in enumerate(transient)}
    absorb: dict = {}
    if transient:
        a = [[ZERO] * len(transient) for _ in transient]
        b = [[ZERO] * len(labels) for _ in transient]
        for v in transient:
            i = tidx[v]
            a[i][i] += 1
            for t, p in spec.successors(v).items():
                if t in tidx:
                    a[i][tidx[t]] -= p
                else:
                    b[i][col[recurrent[members[t]]]] += p
        sol = solve(a, b)
        absorb = {v: sol[tidx[v]] for v in transient}
    law: dict = {}
    for v, p in mu.items():
        if v in tidx:
            for lab, h in zip(labels, absorb[v]):
                if h:
                    law[lab] = law.get(lab, ZERO) + p * h
        else:
            lab = recurrent[members[v]]
            law[lab] = law.get(lab, ZERO) + p
    assert sum(law.values()) == 1
    return SetLaw.from_sets(law, spec.answers, "limit")


def _closure_of(spec: SmsSpec, table) -> list:
    seen = set(table)
    stack = sorted(seen)
    while stack:
        v = stack.pop()
        for t in spec.successors(v):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return sorted(seen)


def law_for(spec: SmsSpec, n) -> SetLaw:
    """Step-n law for an integer ``n``; the limit law for ``n`` = "limit"/None."""
    if n is None or n == "limit":
        return limit_law(spec)
    return step_law(spec, int(n))


# -- the named operations -------------------------------------------------


def prob_superset(spec: SmsSpec, n: int, s: ClaimSet) -> Fraction:
    return step_law(spec, n).prob(s)


def prob_exact(spec: SmsSpec, n: int, s: ClaimSet) -> Fraction:
    return step_law(spec, n).prob_exact(s)


def semidist_question(spec: SmsSpec, n: int, qs, s: ClaimSet = EMPTY) -> Fraction:
    if not qs:
        raise ValueError("qs must be non-empty")
    return step_law(spec, n).prob(s, qs)


def response_dist(spec: SmsSpec, n, qs, s: ClaimSet = EMPTY) -> Response:
    law = law_for(spec, n)
    try:
        return law.response(qs, s)
    except ConditioningError as err:
        err.context["step"] = n
        raise


def prob_collection(spec: SmsSpec, n, coll, extra: ClaimSet = EMPTY, qs=None) -> Fraction:
    coll = list(coll)
    if not coll:
        raise ValueError("collection must be non-empty")
    return law_for(spec, n).prob(extra, qs or (), coll)


def cond_response_on_collection(spec: SmsSpec, n, qs, coll) -> Response:
    return law_for(spec, n).response(qs, EMPTY, list(coll))


@dataclass(frozen=True)
class LimitValue:
    value: Fraction
    lower: Fraction
    upper: Fraction
    exact: bool
    step: Optional[int] = None

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def limit_prob(spec: SmsSpec, s: ClaimSet, tol=None) -> LimitValue:
    """Limit superset probability of ``s``.

    With ``tol`` unset the value comes from the exact limit law.  With a
    tolerance the monotone iteration is used instead: P^J is a lower bound
    and adding the step-J mass that can still reach a state containing ``s``
    gives an upper bound, so the bracket is returned at the first J where it
    is no wider than ``tol``.
    """
    s = frozenset(s)
    if not s:
        return LimitValue(ONE, ONE, ONE, True)
    if tol is None:
        v = limit_law(spec).prob(s)
        return LimitValue(v, v, v, True)
    if not spec.is_kernel:
        raise UnsupportedModeError("the limit distribution needs kernel mode")
    ensure_valid(spec)
    kappa = _limit_kappa(spec)
    ok, witness = closure_consistent(spec, kappa)
    if not ok:
        raise PreconditionError(f"not backward-consistent after step {kappa}: {witness}")
    tol = Fraction(tol)
    states = _closure_of(spec, spec.marginal(kappa + 1))
    rev = nx.DiGraph()
    for v in states:
        rev.add_node(v)
        for t in spec.successors(v):
            rev.add_edge(t, v)
    targets = [v for v in states if s <= unorder(v)]
    hopeful: set = set()
    for t in targets:
        hopeful |= nx.descendants(rev, t) | {t}
    lower = upper = ZERO
    for j in range(kappa + 1, spec.horizon + 1):
        marg = spec.marginal(j)
        lower = sum((p for v, p in marg.items() if s <= unorder(v)), ZERO)
        gain = sum((p for v, p in marg.items() if not s <= unorder(v) and v in hopeful), ZERO)
        upper = min(ONE, lower + gain)
        if upper - lower <= tol:
            return LimitValue(lower, lower, upper, gain == 0, j)
    raise HorizonError(
        f"bracket [{lower}, {upper}] still wider than {tol} at the horizon", bracket=(lower, upper)
    )


def trajectory_response_dist(spec: SmsSpec, prefix, q: str) -> Response:
    """P(answer to q at step |prefix|+1 | the prefix was emitted)."""
    if not spec.is_kernel:
        raise UnsupportedModeError("trajectory distributions need kernel mode")
    ensure_valid(spec)
    prefix = [tuple(map(tuple, v)) for v in prefix]
    if len(prefix) >= spec.horizon:
        raise HorizonError("prefix must be shorter than the horizon")
    weight = ONE
    nxt = dict(spec.init)
    for v in prefix:
        weight *= nxt.get(v, ZERO)
        if not weight:
            raise ConditioningError("prefix has probability 0", prefix=[list(x) for x in prefix])
        nxt = spec.successors(v)
    table: dict = {}
    for v, p in nxt.items():
        if p:
            u = unorder(v)
            table[u] = table.get(u, ZERO) + p
    law = SetLaw.from_sets(table, spec.answers, f"step {len(prefix) + 1} given prefix")
    return law.response((q,))


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    samples: int


def mc_estimate(spec: SmsSpec, n: int, s: ClaimSet, samples: int, seed: int = 0) -> MCEstimate:
    """Frequency estimate of P^n(s) from independent draws.

    Per-step specs sample the step-n table directly.  Kernel specs simulate
    whole trajectories, which exercises a different code path from the exact
    propagation.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    ensure_valid(spec)
    check_step(spec, n)
    s = frozenset(s)
    rng = np.random.default_rng(seed)
    if not spec.is_kernel:
        vecs = sorted(spec.marginal(n))
        probs = np.array([float(spec.marginal(n)[v]) for v in vecs])
        counts = rng.multinomial(samples, probs / probs.sum())
        hits = int(sum(c for v, c in zip(vecs, counts) if s <= unorder(v)))
    else:
        init = sorted(v for v, p in spec.init.items() if p)
        index = {v: i for i, v in enumerate(init)}
        states = list(init)

        def intern(v):
            if v not in index:
                index[v] = len(states)
                states.append(v)
            return index[v]

        p0 = np.array([float(spec.init[v]) for v in init])
        cur = rng.choice(len(init), size=samples, p=p0 / p0.sum())
        for _ in range(n - 1):
            new = np.empty_like(cur)
            for i in np.unique(cur):
                mask = cur == i
                row = sorted(spec.successors(states[i]).items())
                targets = np.array([intern(t) for t, _ in row])
                w = np.array([float(p) for _, p in row])
                new[mask] = targets[rng.choice(len(row), size=int(mask.sum()), p=w / w.sum())]
            cur = new
        good = np.array([s <= unorder(v) for v in states])
        hits = int(good[cur].sum())
    est = hits / samples
    return MCEstimate(est, math.sqrt(est * (1 - est) / samples), samples)
