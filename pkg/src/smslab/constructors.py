"""Scenarios built to satisfy each proposition's hypotheses at epsilon 0.

Every constructor reads Psi off the oracle or universe conditionals, so the
calibration terms are exact equalities, and injects the evidence or
abduction structure with strict inequalities.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product

from .calibration import PsiInterp, PsiMap
from .claims import claim, subsets
from .dist import ZERO, limit_law
from .embedding import EmbeddingMap, projection_map
from .generators import (Profile, held_universe, image_process, joint_with_lift, random_kernel, random_per_step,
                         random_prob, random_weights, rng_for, vec)
from .scenario import Scenario
from .sms import SmsSpec

PROPS = ("p73", "p74", "p75", "p81", "p82", "p83", "projection")

# lift factors injected by the abduction constructors
INJECTED_ALPHA = {"p81": Fraction(3, 2), "p82": Fraction(3, 2), "p83": Fraction(2)}


# -- evidence universes ----------------------------------------------------------


def naive_bayes(rng, n_paths: int):
    """Prior on x and per-path likelihoods with P(e_i=1 | x=1) > P(e_i=1 | x=0)."""
    prior = random_prob(rng, Fraction(1, 4), Fraction(3, 4), 8)
    lik = []
    for _ in range(n_paths):
        lo = random_prob(rng, Fraction(1, 8), Fraction(5, 8), 8)
        hi = random_prob(rng, lo + Fraction(1, 8), Fraction(7, 8), 8)
        lik.append((hi, lo))
    return prior, lik


def _evidence_joint(prior, lik):
    """{(x, e tuple): p} for the naive-Bayes evidence model."""
    out = {}
    for x in (1, 0):
        px = prior if x else 1 - prior
        for e in product((0, 1), repeat=len(lik)):
            p = px
            for (hi, lo), ei in zip(lik, e):
                q = hi if x else lo
                p *= q if ei else 1 - q
            out[(x, e)] = p
    return out


def _code(e) -> str:
    return "c" + "".join(map(str, e))


def _posterior(joint, e) -> dict:
    num = {x: joint[(x, e)] for x in (0, 1)}
    tot = sum(num.values())
    return {(str(x),): p / tot for x, p in num.items()}


def _evidence_parts(seed):
    rng = rng_for(seed)
    n_paths = 2 + int(rng.integers(2))
    prior, lik = naive_bayes(rng, n_paths)
    joint = _evidence_joint(prior, lik)
    ev = [f"e{i + 1}" for i in range(n_paths)]
    codes = [_code(e) for e in product((0, 1), repeat=n_paths)]
    questions = ["x", *ev, "s"]
    answers = ["0", "1", *codes]
    table = {}
    for (x, e), p in joint.items():
        table[vec([("x", str(x)), *[(q, str(b)) for q, b in zip(ev, e)], ("s", _code(e))])] = p
    universe = held_universe(questions, answers, table, first=[*ev, "s"])
    Psi = PsiInterp({(("x",), _code(e)): _posterior(joint, e) for e in product((0, 1), repeat=n_paths)})
    check = {
        "check": "verify", "q": "s", "beta": [],
        "paths": [[[q, "1"]] for q in ev], "target": ["1"],
    }
    return universe, ev, Psi, check


def _p73(seed) -> Scenario:
    universe, ev, Psi, check = _evidence_parts(seed)
    E = projection_map(universe, [*ev, "s"])
    predictor = image_process(universe, E, [*ev, "s"], universe.answers)
    return Scenario(universe, predictor, PsiMap({"s": ("x",)}), Psi, None, epsilon=0.0,
                    checks=[dict(check, prop="p73")])


def _p74(seed) -> Scenario:
    universe, ev, Psi, check = _evidence_parts(seed)
    E = projection_map(universe, [*ev, "s"])
    scientist = image_process(universe, E, [*ev, "s"], universe.answers)
    return Scenario(universe, scientist, PsiMap({"s": ("x",)}), Psi, E, epsilon=0.0,
                    checks=[dict(check, prop="p74")])


def stage_scenario(seed, leak: bool = False) -> Scenario:
    """The flipped-evidence design with a stage-marking embedding.

    The scientist reports the stage i (how many leading evidence paths the
    universe state contains) and a code from a stage-specific code set.  In
    the universe the code is independent of everything else, so conditioning
    on it carries no information about x and condition (5) holds with ratio
    one.  With ``leak`` the universe code depends on x and the scientist's
    code weights are random, which breaks condition (5).

    The embedding identity does not hold for this E (a state reports a single
    stage, while the preimage events of successive stages are nested), so the
    scenario relaxes that check.
    """
    rng = rng_for(seed)
    n_paths = 2
    prior, lik = naive_bayes(rng, n_paths)
    joint = _evidence_joint(prior, lik)
    ev = [f"e{i + 1}" for i in range(n_paths)]
    stages = range(n_paths + 1)
    codes = {i: [f"a{i}{j}" for j in range(2)] for i in stages}
    all_codes = [c for i in stages for c in codes[i]]
    if leak:
        code_given_x = {x: dict(zip(all_codes, random_weights(rng, len(all_codes)))) for x in (0, 1)}
    else:
        uniform = {c: Fraction(1, len(all_codes)) for c in all_codes}
        code_given_x = {0: uniform, 1: uniform}
    table = {}
    for (x, e), p in joint.items():
        for c, pc in code_given_x[x].items():
            table[vec([("x", str(x)), *[(q, str(b)) for q, b in zip(ev, e)], ("s", c)])] = p * pc
    questions = ["x", *ev, "s"]
    answers = ["0", "1", *all_codes]
    universe = held_universe(questions, answers, table, first=[*ev, "s"])
    law1 = limit_law(universe)

    def stage(s) -> int:
        i = 0
        while i < n_paths and claim(ev[i], "1") in s:
            i += 1
        return i

    etable = {}
    for top in law1.support_sets():
        for s in subsets(top):
            etable[s] = frozenset({claim("m", str(stage(s)))} | {c for c in s if c[0] == "s"})
    E = EmbeddingMap(etable)
    weights = random_weights(rng, len(stages))
    sci_table = {}
    for i, w in zip(stages, weights):
        inner = random_weights(rng, 2)
        for c, wc in zip(codes[i], inner):
            sci_table[vec([("m", str(i)), ("s", c)])] = w * wc
    scientist_answers = [str(i) for i in stages] + all_codes
    scientist = SmsSpec.per_step(["m", "s"], scientist_answers, [sci_table])
    psi_rows = {}
    for i in stages:
        prefix = frozenset(claim(ev[k], "1") for k in range(i))
        for c in codes[i]:
            cond = law1.response(("x",), prefix | {claim("s", c)})
            psi_rows[(("x",), c)] = cond.dist
    check = {"check": "verify", "prop": "p75", "q": "s", "beta": [],
             "paths": [[[q, "1"]] for q in ev], "target": ["1"]}
    return Scenario(universe, scientist, PsiMap({"s": ("x",)}), PsiInterp(psi_rows), E, epsilon=0.0,
                    embed_check=False, checks=[check])


# -- abduction ---------------------------------------------------------------------


def _abduction_universe(rng, alpha):
    joint = joint_with_lift(rng, alpha)
    table = {}
    for (a, b), p in joint.items():
        table[vec([("qs", a), ("qd", b), ("a", "c"), ("b", "c"), ("ab", "c")])] = p
    questions = ["qs", "qd", "a", "b", "ab"]
    answers = ["0", "1", "c"]
    universe = held_universe(questions, answers, table, first=["qs", "a", "b", "ab"])
    ms = {("0",): ZERO, ("1",): ZERO}
    md = {("0",): ZERO, ("1",): ZERO}
    for (a, b), p in joint.items():
        ms[(a,)] += p
        md[(b,)] += p
    Psi = PsiInterp({
        (("qs",), "c"): ms,
        (("qd",), "c"): md,
        (("qs", "qd"), "c"): dict(joint),
    })
    psi = PsiMap({"a": ("qs",), "b": ("qd",), "ab": ("qs", "qd")})
    check = {"check": "verify", "q_star": "qs", "v_star": "1", "q_dagger": "qd", "v_dagger": "1", "state": []}
    return universe, psi, Psi, check


def _p81(seed) -> Scenario:
    rng = rng_for(seed)
    universe, psi, Psi, check = _abduction_universe(rng, INJECTED_ALPHA["p81"])
    predictor = SmsSpec.per_step(["a", "b", "ab"], ["c"], [{vec([("a", "c"), ("b", "c"), ("ab", "c")]): 1}])
    return Scenario(universe, predictor, psi, Psi, None, epsilon=0.0, checks=[dict(check, prop="p81")])


def _p82(seed) -> Scenario:
    rng = rng_for(seed)
    universe, psi, Psi, check = _abduction_universe(rng, INJECTED_ALPHA["p82"])
    keep = ["qs", "a", "b", "ab"]
    E = projection_map(universe, keep)
    scientist = image_process(universe, E, keep, universe.answers)
    return Scenario(universe, scientist, psi, Psi, E, epsilon=0.0, checks=[dict(check, prop="p82")])


def _p83(seed) -> Scenario:
    rng = rng_for(seed)
    universe, psi, Psi, check = _abduction_universe(rng, INJECTED_ALPHA["p83"])
    keep = ["a", "b", "ab"]
    E = projection_map(universe, keep)
    scientist = image_process(universe, E, keep, ["c"])
    return Scenario(universe, scientist, psi, Psi, E, epsilon=0.0, checks=[dict(check, prop="p83")])


# -- projection ----------------------------------------------------------------------


def projection_scenario(seed, collapse: bool = False) -> Scenario:
    """A hidden variable h, an outcome x drawn given h and a coarse code of h.

    The scientist sees the code and the outcome (E projects onto them), asks
    the code question and interprets a code as the universe's outcome
    distribution given that code.  With ``collapse`` E renames both outcomes
    to one, so distinct outcome-augmented sets share an image.
    """
    rng = rng_for(seed)
    n_h = 2 + int(rng.integers(2))
    prior = random_weights(rng, n_h)
    groups = [0, 0] + [int(rng.integers(2)) for _ in range(n_h - 2)]
    if rng.integers(2):
        groups = list(range(n_h))
    table = {}
    for h, ph in enumerate(prior):
        px = random_prob(rng, Fraction(1, 8), Fraction(7, 8), 8)
        for x, p in (("1", px), ("0", 1 - px)):
            table[vec([("h", str(h)), ("x", x), ("s", f"c{groups[h]}")])] = ph * p
    codes = sorted({f"c{g}" for g in groups})
    answers = ["0", "1", *[str(h) for h in range(n_h) if str(h) not in ("0", "1")], *codes]
    universe = held_universe(["h", "x", "s"], answers, table, first=["h", "s"])
    law1 = limit_law(universe)
    rename = {claim("x", "1"): claim("x", "0")} if collapse else None
    E = projection_map(universe, ["s", "x"], rename)
    scientist = image_process(universe, E, ["s", "x"], ["0", "1", *codes])
    Psi = PsiInterp({(("x",), c): law1.response(("x",), {claim("s", c)}).dist for c in codes})
    return Scenario(universe, scientist, PsiMap({"s": ("x",)}), Psi, E, epsilon=0.0,
                    checks=[{"check": "verify", "prop": "projection", "q": "s", "state": []}])


def random_instance(profile: Profile = Profile(), seed=0) -> Scenario:
    """A single-SMS scenario drawn at random within the profile's size bounds.

    Kernel and per-step specs are drawn with equal probability; with one
    question and one answer the result is a sure SMS.
    """
    rng = rng_for(seed)
    n_q, n_v = max(1, profile.questions), max(1, profile.answers)
    if n_q == 1 and n_v == 1:
        spec = random_kernel(rng, 1, 1, profile.horizon, warmup=False, max_states=1)
    elif rng.integers(2):
        # the warm-up claim uses one of the profile's question slots
        warmup = n_q > 1 and bool(rng.integers(2))
        spec = random_kernel(rng, n_q - warmup, n_v, profile.horizon, profile.sparse, warmup, profile.support)
    else:
        spec = random_per_step(rng, n_q, n_v, profile.horizon, min(profile.support, 8), profile.sparse)
    return Scenario(spec, checks=[{"check": "validate"}])


_BUILDERS = {
    "p73": _p73,
    "p74": _p74,
    "p75": stage_scenario,
    "p81": _p81,
    "p82": _p82,
    "p83": _p83,
    "projection": projection_scenario,
}


def construct_eps0(kind: str, seed: int = 0) -> Scenario:
    """A scenario whose hypothesis checks pass at epsilon 0 (deterministic per seed).

    The p73 scenario is the closest attainable one: calibration of the plain
    (non-embedded) kind cannot be exact on nested claim sets while the
    prediction distribution still shows evidence lift, so its calibration
    score is small but positive.
    """
    try:
        return _BUILDERS[kind](seed)
    except KeyError:
        raise ValueError(f"unknown proposition {kind!r}; choose one of {', '.join(PROPS)}") from None
