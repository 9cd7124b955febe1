"""Regenerate the JSON fixtures under fixtures/ (deterministic)."""
from __future__ import annotations

import math
import sys
from fractions import Fraction as Fr
from pathlib import Path

from smslab.calibration import PsiInterp, PsiMap
from smslab.constructors import PROPS, construct_eps0
from smslab.embedding import projection_map
from smslab.generators import held_universe, image_process, vec
from smslab.scenario import Scenario, run_check, serialize_scenario
from smslab.sms import SmsSpec

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def fix_a(horizon=5) -> SmsSpec:
    coin = {vec([("qa", "0")]): Fr(1, 2), vec([("qa", "1")]): Fr(1, 2)}
    return held_universe(["qa"], ["0", "1"], coin, horizon=horizon)


def fix_b() -> SmsSpec:
    return SmsSpec.per_step(["qa", "qb"], ["0", "1"], [{
        (("qa", "0"), ("qb", "1")): Fr(1, 3),
        (("qa", "0"),): Fr(1, 3),
        (("qb", "0"),): Fr(1, 3),
    }])


def point_masses():
    return PsiInterp({(("qa",), v): {(v,): 1} for v in "01"})


def fixtures() -> dict:
    out = {}
    a = fix_a()
    out["fix_a"] = Scenario(a, checks=[
        {"check": "validate"},
        {"check": "backward"},
        {"check": "nonrepeating", "k": 0},
        {"check": "limit", "set": [["qa", "0"]]},
    ])
    out["fix_b"] = Scenario(fix_b(), checks=[
        {"check": "validate"},
        {"check": "dist", "step": 1, "set": [["qa", "0"]]},
        {"check": "dist", "step": 1, "set": [["qa", "0"]], "exact": True},
        {"check": "respond", "step": 1, "questions": ["qb"], "set": []},
    ])
    out["sc_id"] = Scenario(a, fix_a(), PsiMap({"qa": ("qa",)}), point_masses(), step=1, epsilon=1.0, checks=[
        {"check": "calibrate", "q": "qa", "state": []},
    ])
    # four equally likely (qa, qb) pairs, so every universe set has a qa claim
    uni = held_universe(["qa", "qb"], ["0", "1"],
                        {vec([("qa", x), ("qb", y)]): Fr(1, 4) for x in "01" for y in "01"})
    E = projection_map(uni, ["qa"])
    sci = image_process(uni, E, ["qa"], ["0", "1"])
    psi_emb = PsiInterp({(("qb",), v): {("0",): Fr(1, 2), ("1",): Fr(1, 2)} for v in "01"})
    out["fix_emb"] = Scenario(uni, sci, PsiMap({"qa": ("qb",)}), psi_emb, E, checks=[
        {"check": "embed"},
        {"check": "calibrate", "q": "qa", "state": [], "embedded": True},
    ])
    # correlated given x=1 and anti-correlated given x=0, so non-thwarting holds;
    # z is an independent fair coin
    given = {
        "1": {("1", "1"): Fr(1, 2), ("1", "0"): Fr(1, 6), ("0", "1"): Fr(1, 6), ("0", "0"): Fr(1, 6)},
        "0": {("1", "1"): Fr(1, 24), ("1", "0"): Fr(7, 24), ("0", "1"): Fr(7, 24), ("0", "0"): Fr(9, 24)},
    }
    ev_table = {}
    for x, g in given.items():
        for (e1, e2), p in g.items():
            for z in "01":
                ev_table[vec([("x", x), ("e1", e1), ("e2", e2), ("z", z)])] = Fr(1, 4) * p
    ev = held_universe(["x", "e1", "e2", "z"], ["0", "1"], ev_table, first=["e1", "e2", "z"])
    ev_args = {"question": ["x"], "target": ["1"], "beta": [], "paths": [[["e1", "1"]], [["e2", "1"]]]}
    out["fix_ev"] = Scenario(ev, checks=[
        dict(ev_args, check="evidence", mode="collection"),
        dict(ev_args, check="evidence", mode="nonthwarting"),
        dict(ev_args, check="evidence", mode="derive"),
    ])
    given1 = {("1", "1"): Fr(1, 10), ("1", "0"): Fr(4, 10), ("0", "1"): Fr(4, 10), ("0", "0"): Fr(1, 10)}
    given0 = {("1", "1"): Fr(1, 16), ("1", "0"): Fr(3, 16), ("0", "1"): Fr(3, 16), ("0", "0"): Fr(9, 16)}
    th_table = {}
    for x, g in (("1", given1), ("0", given0)):
        for (e1, e2), p in g.items():
            th_table[vec([("x", x), ("e1", e1), ("e2", e2)])] = Fr(1, 2) * p
    th = held_universe(["x", "e1", "e2"], ["0", "1"], th_table)
    out["fix_thwart"] = Scenario(th, checks=[
        dict(ev_args, check="evidence", mode="nonthwarting"),
        dict(ev_args, check="evidence", mode="collection"),
    ])
    ab = {("1", "1"): Fr(6, 25), ("1", "0"): Fr(4, 25), ("0", "1"): Fr(4, 25), ("0", "0"): Fr(11, 25)}
    ab_uni = held_universe(["qs", "qd"], ["0", "1"], {vec([("qs", a), ("qd", b)]): p for (a, b), p in ab.items()})
    out["fix_ab"] = Scenario(ab_uni, checks=[
        {"check": "abduct", "q_star": "qs", "v_star": "1", "q_dagger": "qd", "v_dagger": "1", "state": []},
    ])
    for prop in PROPS:
        scn = construct_eps0(prop, 1)
        if prop == "p73":
            # plain calibration cannot be exact here; ship the measured score (rounded up) as epsilon
            score = run_check(scn, scn.checks[0]).details["max_score"]
            scn.epsilon = math.ceil(score * 1000) / 1000
        out[f"fix_{prop}"] = scn
    broken = construct_eps0("p81", 1)
    indep = {(a, b): Fr(1, 4) for a in "01" for b in "01"}
    table = {vec([("qs", a), ("qd", b), ("a", "c"), ("b", "c"), ("ab", "c")]): p for (a, b), p in indep.items()}
    broken.sms1 = held_universe(broken.sms1.questions, broken.sms1.answers, table, first=["qs", "a", "b", "ab"])
    half = {("0",): Fr(1, 2), ("1",): Fr(1, 2)}
    broken.Psi = PsiInterp({(("qs",), "c"): half, (("qd",), "c"): half, (("qs", "qd"), "c"): indep})
    out["broken"] = broken
    return out


def main() -> int:
    OUT.mkdir(exist_ok=True)
    for name, scn in fixtures().items():
        (OUT / f"{name}.json").write_text(serialize_scenario(scn) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
