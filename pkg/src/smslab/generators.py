"""Random and hand-shaped SMS builders used by the constructors, the search and the tests."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .claims import canonical, claim
from .dist import ZERO, limit_law
from .sms import SmsSpec

MIN_MASS = Fraction(1, 32)


@dataclass(frozen=True)
class Profile:
    questions: int = 4
    answers: int = 3
    support: int = 64
    horizon: int = 4
    sparse: bool = False


def rng_for(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_weights(rng, k: int, sparse: bool = False, denom: int = 12) -> list[Fraction]:
    """k rationals summing to 1 with small denominators.

    Unless ``sparse`` every weight is at least 1/32, which keeps kl and the
    full-support gates usable.
    """
    if k == 1:
        return [Fraction(1)]
    low = 0 if sparse else 1
    while True:
        raw = [int(x) for x in rng.integers(low, denom + 1, size=k)]
        total = sum(raw)
        if total == 0:
            continue
        out = [Fraction(x, total) for x in raw]
        if sparse or min(out) >= MIN_MASS:
            return out


def random_prob(rng, lo=Fraction(1, 8), hi=Fraction(7, 8), denom: int = 8) -> Fraction:
    choices = [Fraction(i, denom) for i in range(1, denom) if lo <= Fraction(i, denom) <= hi]
    return choices[int(rng.integers(len(choices)))]


def vec(claims) -> tuple:
    """A claim vector in canonical order."""
    return tuple(canonical(claim(q, a) for q, a in claims))


# -- universes ----------------------------------------------------------------


def held_universe(questions, answers, table: dict, first=None, horizon: int = 3) -> SmsSpec:
    """A backward-consistent kernel whose limit law is ``table``.

    ``table`` maps claim vectors to probabilities.  With ``first`` (a set of
    questions) step 1 emits only the claims on those questions and step 2
    reveals the whole vector; afterwards the vector is held.
    """
    table = {vec(v): Fraction(p) for v, p in table.items() if p}
    kernel: dict = {v: {v: Fraction(1)} for v in table}
    if first is None:
        return SmsSpec.markov(questions, answers, horizon, table, kernel)
    keep = set(first)
    init: dict = {}
    groups: dict = {}
    for v, p in table.items():
        head = tuple(c for c in v if c[0] in keep)
        if not head:
            head = v
        init[head] = init.get(head, ZERO) + p
        groups.setdefault(head, {})[v] = p
    for head, rows in groups.items():
        if head in table and len(rows) > 1:
            raise ValueError(f"the partial vector {list(head)} is also a full row of the table")
        total = sum(rows.values())
        kernel[head] = {v: p / total for v, p in rows.items()}
    return SmsSpec.markov(questions, answers, horizon, init, kernel)


def image_table(universe: SmsSpec, E) -> dict:
    """The scientist table that pushes the universe limit law through E."""
    out: dict = {}
    for s, p in limit_law(universe).table().items():
        y = E.image(s)
        if not y:
            continue
        v = vec(y)
        out[v] = out.get(v, ZERO) + p
    return out


def image_process(universe: SmsSpec, E, questions, answers, horizon: int = 1) -> SmsSpec:
    """Per-step scientist emitting E-images, the same law at every step.

    If E maps some terminal sets to the empty set that mass is dropped from
    the table and the remainder renormalized; callers avoid such maps.
    """
    table = image_table(universe, E)
    total = sum(table.values())
    table = {v: p / total for v, p in table.items()}
    return SmsSpec.per_step(questions, answers, [table] * horizon)


# -- random backward-consistent kernels --------------------------------------


def random_kernel(rng, n_questions: int = 3, n_answers: int = 2, horizon: int = 6, sparse: bool = False,
                  warmup: bool | None = None, max_states: int = 64) -> SmsSpec:
    """A random kernel that only ever adds claims after step kappa.

    Each state is a canonical vector.  From a state the chain either holds
    or appends one claim on a question it has not answered yet.  With
    ``warmup`` step 1 also carries a claim on question "w" that is dropped
    at step 2, so the chain is backward-consistent only after kappa = 1.
    """
    qs = [f"q{i}" for i in range(n_questions)]
    vs = [str(i) for i in range(n_answers)]
    if warmup is None:
        warmup = bool(rng.integers(2))
    all_q = qs + (["w"] if warmup else [])

    def random_answer():
        return vs[int(rng.integers(len(vs)))]

    starts = set()
    for _ in range(int(rng.integers(1, 4))):
        q = qs[int(rng.integers(len(qs)))]
        starts.add(vec([(q, random_answer())]))
    starts = sorted(starts)
    kernel: dict = {}
    frontier = list(starts)
    while frontier:
        v = frontier.pop()
        if v in kernel:
            continue
        asked = {c[0] for c in v}
        free = [q for q in qs if q not in asked]
        targets = [v]
        if free and len(kernel) + len(frontier) < max_states:
            for q in free:
                if rng.random() < 0.6:
                    targets.append(vec(list(v) + [(q, random_answer())]))
        targets = sorted(set(targets))
        kernel[v] = dict(zip(targets, random_weights(rng, len(targets), sparse)))
        frontier.extend(t for t in targets if t not in kernel)
    init = dict(zip(starts, random_weights(rng, len(starts), sparse)))
    if warmup:
        # warm-up states carry a claim on "w" that the next step drops
        w_init = {}
        for v, p in init.items():
            wv = vec(list(v) + [("w", random_answer())])
            w_init[wv] = p
            kernel[wv] = dict(kernel[v])
        return SmsSpec.markov(all_q, vs, horizon, w_init, kernel, kappa=1)
    return SmsSpec.markov(all_q, vs, horizon, init, kernel, kappa=0)


def random_per_step(rng, n_questions: int = 3, n_answers: int = 2, steps: int = 1, support: int = 8,
                    sparse: bool = False) -> SmsSpec:
    """A per-step SMS whose step tables are independent random tables."""
    qs = [f"q{i}" for i in range(n_questions)]
    vs = [str(i) for i in range(n_answers)]
    tables = []
    for _ in range(steps):
        rows = set()
        for _ in range(support):
            k = int(rng.integers(1, n_questions + 1))
            chosen = sorted(rng.choice(n_questions, size=k, replace=False))
            rows.add(vec([(qs[i], vs[int(rng.integers(n_answers))]) for i in chosen]))
        rows = sorted(rows)
        tables.append(dict(zip(rows, random_weights(rng, len(rows), sparse))))
    return SmsSpec.per_step(qs, vs, tables)


def random_joint(rng, n_a: int = 2, n_b: int = 2, sparse: bool = False) -> dict:
    """A random joint table {(a, b): p} over two always-asked questions."""
    cells = [(str(a), str(b)) for a in range(n_a) for b in range(n_b)]
    return dict(zip(cells, random_weights(rng, len(cells), sparse)))


def joint_with_lift(rng, alpha: Fraction) -> dict:
    """2x2 joint over answers 0/1 where the (1, 1) lift factor is exactly ``alpha``."""
    alpha = Fraction(alpha)
    cap = min(Fraction(1, 2), 1 / alpha)
    grid = [Fraction(k, 10) for k in range(1, 10) if Fraction(k, 10) < cap]
    while True:
        p = grid[int(rng.integers(len(grid)))]
        r = grid[int(rng.integers(len(grid)))]
        cell = alpha * p * r
        table = {("1", "1"): cell, ("1", "0"): p - cell, ("0", "1"): r - cell, ("0", "0"): 1 - p - r + cell}
        if min(table.values()) > 0:
            return table


def bits(k: int, n: int) -> str:
    return format(k, f"0{n}b") if n else ""
