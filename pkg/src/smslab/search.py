"""Counterexample search: drop one hypothesis and look for a failing conclusion.

Each trial samples an instance from a family that satisfies every
hypothesis of the proposition except (possibly) the ablated one, evaluates
the verifier and records a hit when all other hypotheses hold while the
conclusion fails.  Trials are independent and the first hit in trial order
is returned, so the result is deterministic per seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

import numpy as np

from .calibration import PsiInterp
from .constructors import PROPS, construct_eps0, stage_scenario
from .generators import held_universe, random_weights, rng_for, vec
from .report import CheckReport
from .scenario import Scenario, run_check

# ablation names accepted on the command line -> substring of the precondition label
ABLATIONS = {
    "none": None,
    "calibration": "calibration",
    "premise": "abductive premise",
    "evidence": "(1) evidence",
    "condition-5": "(5) proportional",
    "marginalization": "marginalization",
    "full-support": "full-support",
    "embedding": "embedding identity",
    "discriminating": "discriminating",
}


@dataclass
class SearchResult:
    found: bool
    trials: int
    hypotheses_held: int
    scenario: Optional[Scenario] = None
    report: Optional[CheckReport] = None

    def to_dict(self) -> dict:
        from .scenario import scenario_to_dict

        out = {"found": self.found, "trials": self.trials, "hypotheses_held": self.hypotheses_held}
        if self.scenario is not None:
            out["scenario"] = scenario_to_dict(self.scenario)
            out["report"] = self.report.to_dict()
        return out


# -- instance families ------------------------------------------------------------


def _random_evidence_universe(rng, ev):
    """Universe over x, the evidence questions and a code, with an arbitrary joint."""
    n = len(ev)
    cells = list(product((0, 1), repeat=n + 1))
    weights = random_weights(rng, len(cells), denom=16)
    table = {}
    for (x, *e), p in zip(cells, weights):
        code = "c" + "".join(map(str, e))
        table[vec([("x", str(x)), *[(q, str(b)) for q, b in zip(ev, e)], ("s", code)])] = p
    codes = ["c" + "".join(map(str, e)) for e in product((0, 1), repeat=n)]
    return held_universe(["x", *ev, "s"], ["0", "1", *codes], table, first=[*ev, "s"])


def _p73_mismatch(seed) -> Scenario:
    """Predictor and Psi from a naive-Bayes world; the oracle is an unrelated random world."""
    base = construct_eps0("p73", seed)
    rng = rng_for([seed, 73])
    ev = [q for q in base.sms1.questions if q.startswith("e")]
    oracle = _random_evidence_universe(rng, ev)
    return Scenario(oracle, base.sms2, base.psi, base.Psi, None, base.divergence, base.epsilon, base.step,
                    base.embed_check, base.checks)


def _p73_sound(seed) -> Scenario:
    """The constructor scenario with epsilon raised to its own calibration score.

    Exact calibration is out of reach for this proposition, so this is the
    tightest epsilon at which every hypothesis holds.
    """
    scn = construct_eps0("p73", seed)
    scn.epsilon = float("inf")
    scn.epsilon = run_check(scn, scn.checks[0]).details["max_score"]
    return scn


def _p81_random_joint(seed) -> Scenario:
    """The p81 design with an arbitrary joint, so the lift may fall below one."""
    rng = rng_for([seed, 81])
    scn = construct_eps0("p81", seed)
    joint = dict(zip([(a, b) for a in "01" for b in "01"], random_weights(rng, 4)))
    table = {vec([("qs", a), ("qd", b), ("a", "c"), ("b", "c"), ("ab", "c")]): p for (a, b), p in joint.items()}
    universe = held_universe(scn.sms1.questions, scn.sms1.answers, table, first=["qs", "a", "b", "ab"])
    ms = {(v,): sum(p for (a, _), p in joint.items() if a == v) for v in "01"}
    md = {(v,): sum(p for (_, b), p in joint.items() if b == v) for v in "01"}
    Psi = PsiInterp({(("qs",), "c"): ms, (("qd",), "c"): md, (("qs", "qd"), "c"): joint})
    return Scenario(universe, scn.sms2, scn.psi, Psi, None, checks=scn.checks)


def _perturbed(prop):
    """Fallback family: the constructor scenario with Psi pulled toward uniform."""

    def build(seed) -> Scenario:
        scn = construct_eps0(prop, seed)
        rng = rng_for([seed, 7])
        delta = Fraction(int(rng.integers(1, 11)), 10)
        scn.Psi = scn.Psi.mixed(delta, scn.sms1.answers)
        return scn

    return build


FAMILIES = {
    ("p73", "calibration"): _p73_mismatch,
    ("p73", "none"): _p73_sound,
    ("p81", "premise"): _p81_random_joint,
    ("p75", "condition-5"): lambda seed: stage_scenario(seed, leak=True),
}


def _family(prop, ablate):
    if (prop, ablate) in FAMILIES:
        return FAMILIES[(prop, ablate)]
    if ablate == "none":
        return lambda seed: construct_eps0(prop, seed)
    return _perturbed(prop)


def counterexample_search(prop: str, ablate: str = "none", trials: int = 10_000, seed: int = 0) -> SearchResult:
    if prop not in PROPS:
        raise ValueError(f"unknown proposition {prop!r}; choose one of {', '.join(PROPS)}")
    if ablate not in ABLATIONS:
        raise ValueError(f"unknown hypothesis label {ablate!r}; choose one of {', '.join(ABLATIONS)}")
    label = ABLATIONS[ablate]
    sample = _family(prop, ablate)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint32)
    held = 0
    for t, s in enumerate(seeds, start=1):
        scn = sample(int(s))
        rep = run_check(scn, scn.checks[0])
        others = all(p.holds for p in rep.preconditions if label is None or label not in p.label)
        if not others:
            continue
        held += 1
        if rep.conclusion is not None and not rep.conclusion.holds:
            return SearchResult(True, t, held, scn, rep)
    return SearchResult(False, trials, held)
