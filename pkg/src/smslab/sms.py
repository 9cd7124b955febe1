"""Finite stochastic mathematical systems.

An :class:`SmsSpec` is either a list of per-step tables over claim vectors or
an initial table plus a time-homogeneous transition kernel.  Steps are
numbered from 1.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional

from .claims import ClaimVector, fmt_claims, has_repeat, unorder
from .errors import BudgetError, HorizonError, UnsupportedModeError, ValidationError
from .report import CheckReport, simple_check

PER_STEP = "per-step"
KERNEL = "kernel"

Table = Dict[ClaimVector, Fraction]

DEFAULT_BUDGET = 10**6


def budget() -> int:
    raw = os.environ.get("SMSLAB_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


class Meter:
    """Counts vector evaluations and raises once the enumeration cap is hit."""

    def __init__(self, what: str):
        self.what = what
        self.cap = budget()
        self.used = 0

    def tick(self, k: int = 1) -> None:
        self.used += k
        if self.used > self.cap:
            raise BudgetError(f"{self.what}: enumeration budget of {self.cap} evaluations exceeded")


@dataclass(frozen=True)
class SmsSpec:
    questions: tuple
    answers: tuple
    horizon: int
    mode: str = PER_STEP
    steps: tuple = ()
    init: Optional[Table] = None
    kernel: Optional[Mapping[ClaimVector, Table]] = None
    kappa: Optional[int] = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    __hash__ = object.__hash__

    @classmethod
    def per_step(cls, questions, answers, steps, kappa=None) -> "SmsSpec":
        tables = tuple({tuple(v): Fraction(p) for v, p in t.items()} for t in steps)
        return cls(tuple(questions), tuple(answers), len(tables), PER_STEP, tables, kappa=kappa)

    @classmethod
    def markov(cls, questions, answers, horizon, init, kernel, kappa=None) -> "SmsSpec":
        init_t = {tuple(v): Fraction(p) for v, p in init.items()}
        ker = {tuple(s): {tuple(t): Fraction(p) for t, p in row.items()} for s, row in kernel.items()}
        return cls(tuple(questions), tuple(answers), horizon, KERNEL, (), init_t, ker, kappa)

    @property
    def is_kernel(self) -> bool:
        return self.mode == KERNEL

    def cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def marginal(self, n: int) -> Table:
        """P^n over claim vectors, zero entries dropped."""
        check_step(self, n)
        if not self.is_kernel:
            return {v: p for v, p in self.steps[n - 1].items() if p}
        return self.cached(("marginal", n), lambda: _propagate(self, n))

    def reachable(self) -> frozenset:
        """Every vector reachable from the initial table (kernel mode)."""
        if not self.is_kernel:
            raise UnsupportedModeError("reachability needs kernel mode")
        return self.cached("reachable", lambda: _closure(self, [v for v, p in self.init.items() if p]))

    def successors(self, v: ClaimVector) -> Table:
        row = self.kernel.get(v)
        if row is None:
            raise ValidationError([f"kernel has no row for reachable vector {list(v)}"])
        return {t: p for t, p in row.items() if p}


def check_step(spec: SmsSpec, n: int) -> None:
    if n < 1 or n > spec.horizon:
        raise HorizonError(f"step {n} outside 1..{spec.horizon}")


def _propagate(spec: SmsSpec, n: int) -> Table:
    if n == 1:
        return {v: p for v, p in spec.init.items() if p}
    prev = spec.marginal(n - 1)
    meter = Meter("marginal propagation")
    out: Table = {}
    for v, p in prev.items():
        row = spec.successors(v)
        meter.tick(len(row))
        for t, k in row.items():
            out[t] = out.get(t, Fraction(0)) + p * k
    return {v: p for v, p in out.items() if p}


def _closure(spec: SmsSpec, start) -> frozenset:
    seen = set(start)
    stack = list(start)
    meter = Meter("reachability")
    while stack:
        v = stack.pop()
        row = spec.kernel.get(v)
        if row is None:
            continue
        for t, p in row.items():
            meter.tick()
            if p and t not in seen:
                seen.add(t)
                stack.append(t)
    return frozenset(seen)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def valid(self) -> bool:
        return not self.violations


def _table_violations(name, table, spec, out) -> None:
    total = sum(table.values(), Fraction(0))
    if total != 1:
        out.append(f"{name} sums to {total}")
    for v, p in table.items():
        if p < 0:
            out.append(f"{name} has negative probability {p} at {list(v)}")
        if not p:
            continue
        if len(v) == 0:
            out.append(f"{name} gives positive probability to the empty vector")
        if len(set(v)) != len(v):
            out.append(f"{name} contains duplicate claim in {list(v)}")
        for q, a in v:
            if q not in spec.questions:
                out.append(f"{name} uses unknown question {q!r}")
            if a not in spec.answers:
                out.append(f"{name} uses unknown answer {a!r}")


def validate(spec: SmsSpec) -> ValidationReport:
    out: list[str] = []
    if len(set(spec.questions)) != len(spec.questions):
        out.append("question alphabet has duplicates")
    if len(set(spec.answers)) != len(spec.answers):
        out.append("answer alphabet has duplicates")
    if spec.horizon < 1:
        out.append("horizon must be a positive integer")
    if spec.kappa is not None and not 0 <= spec.kappa < spec.horizon:
        out.append(f"kappa {spec.kappa} must lie in 0..{spec.horizon - 1}")
    if spec.mode == PER_STEP:
        if len(spec.steps) != spec.horizon:
            out.append(f"{len(spec.steps)} step tables for horizon {spec.horizon}")
        for i, t in enumerate(spec.steps):
            _table_violations(f"step {i + 1} table", t, spec, out)
    elif spec.mode == KERNEL:
        if spec.init is None or spec.kernel is None:
            out.append("kernel mode needs init and kernel tables")
            return ValidationReport(tuple(out))
        _table_violations("init table", spec.init, spec, out)
        for v, row in spec.kernel.items():
            _table_violations(f"kernel row {list(v)}", row, spec, out)
        if not out:
            for v in sorted(spec.reachable()):
                if v not in spec.kernel:
                    out.append(f"kernel has no row for reachable vector {list(v)}")
    else:
        out.append(f"unknown mode {spec.mode!r}")
    return ValidationReport(tuple(out))


def ensure_valid(spec: SmsSpec) -> None:
    def run():
        rep = validate(spec)
        if not rep.valid:
            raise ValidationError(rep.violations)
        return True

    spec.cached("valid", run)


def check_nonrepeating(spec: SmsSpec, k: int = 0) -> CheckReport:
    """No positive-probability vector after step ``k`` repeats a question."""
    ensure_valid(spec)
    if k > spec.horizon or k < 0:
        raise HorizonError(f"k={k} outside 0..{spec.horizon}")
    for n in range(k + 1, spec.horizon + 1):
        for v in sorted(spec.marginal(n)):
            if has_repeat(v):
                return simple_check("nonrepeating", False, {"step": n, "vector": [list(c) for c in v]}, k=k)
    return simple_check("nonrepeating", True, None, k=k)


def check_backward_consistent(spec: SmsSpec, kappa: int | None = None) -> CheckReport:
    """Every post-kappa unordering contains the earlier post-kappa ones.

    By transitivity of inclusion it suffices to inspect each positive
    transition taken from a step after ``kappa``; the witness is a full
    trajectory from step 1 rebuilt from stored predecessors.
    """
    if not spec.is_kernel:
        raise UnsupportedModeError("backward consistency needs the joint law of successive steps (kernel mode)")
    ensure_valid(spec)
    kappa = spec.kappa if kappa is None else kappa
    kappa = kappa or 0
    if kappa >= spec.horizon:
        raise HorizonError(f"kappa {kappa} must be below the horizon {spec.horizon}")
    layers = [{v: None for v in sorted(spec.marginal(1))}]
    meter = Meter("backward consistency")
    for step in range(1, spec.horizon):
        nxt: dict = {}
        for v in layers[-1]:
            for t in sorted(spec.successors(v)):
                meter.tick()
                if step > kappa and not unorder(v) <= unorder(t):
                    traj = _trace(layers, v) + [t]
                    return simple_check(
                        "backward-consistent",
                        False,
                        {"trajectory": [[list(c) for c in x] for x in traj], "dropped": sorted(unorder(v) - unorder(t))},
                        kappa=kappa,
                        scope=f"verified up to horizon {spec.horizon}",
                    )
                nxt.setdefault(t, v)
        layers.append(nxt)
    return simple_check("backward-consistent", True, None, kappa=kappa, scope=f"verified up to horizon {spec.horizon}")


def _trace(layers, v):
    path = [v]
    for layer in reversed(layers[1:]):
        v = layer[v]
        path.append(v)
    path.reverse()
    return path


def closure_consistent(spec: SmsSpec, kappa: int) -> tuple[bool, object]:
    """Backward consistency on the whole reachable closure after step kappa.

    Unlike :func:`check_backward_consistent` this is not bounded by the
    horizon, so it certifies the infinite process the limit refers to.
    """
    start = spec.marginal(kappa + 1) if kappa + 1 <= spec.horizon else None
    if start is None:
        raise HorizonError("kappa leaves no step inside the horizon")
    states = _closure(spec, list(start))
    for v in sorted(states):
        for t in spec.successors(v):
            if not unorder(v) <= unorder(t):
                return False, {"from": fmt_claims(v), "to": fmt_claims(t)}
    return True, None
