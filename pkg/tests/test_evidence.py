from __future__ import annotations

from fractions import Fraction

import pytest

from smslab.calibration import PsiInterp
from smslab.claims import EMPTY
from smslab.constructors import construct_eps0, stage_scenario
from smslab.dist import limit_law
from smslab.embedding import EmbeddingMap
from smslab.evidence import (
    EvidenceScenario,
    LawBase,
    derive_monotone,
    is_evidence_collection,
    is_nonthwarting,
    verify_evidence_math,
    verify_evidence_sci,
    verify_evidence_sci_flipped,
)
from smslab.generators import held_universe, vec
from smslab.scenario import load_scenario, run_check

E1, E2, Z = {("e1", "1")}, {("e2", "1")}, {("z", "1")}


def _scn(fixtures_dir, name, paths):
    law = limit_law(load_scenario(fixtures_dir / name).sms1)
    return EvidenceScenario(LawBase(law), EMPTY, paths, ("x",), ("1",))


def test_fix_ev_is_an_evidence_collection(fixtures_dir):
    rep = is_evidence_collection(_scn(fixtures_dir, "fix_ev.json", [E1, E2]))
    assert rep.ok
    assert rep.conclusion.lhs == [Fraction(1, 2), Fraction(2, 3), Fraction(12, 13)]


def test_independent_second_path_fails_lift(fixtures_dir):
    rep = is_evidence_collection(_scn(fixtures_dir, "fix_ev.json", [E1, Z]))
    assert not rep.ok
    lift = rep.details["witness"]["lift"]
    assert lift == [{"path": 2, "with": Fraction(1, 2), "without": Fraction(1, 2)}]


def test_single_path_is_one_inequality(fixtures_dir):
    rep = is_evidence_collection(_scn(fixtures_dir, "fix_ev.json", [E1]))
    assert rep.ok
    assert rep.conclusion.lhs == [Fraction(1, 2), Fraction(2, 3)]


def test_fix_ev_nonthwarting_and_derivation(fixtures_dir):
    scn = _scn(fixtures_dir, "fix_ev.json", [E1, E2])
    rep = is_nonthwarting(scn)
    assert rep.ok
    assert rep.conclusion.lhs == [Fraction(9, 8)] and rep.conclusion.rhs == [Fraction(13, 12)]
    der = derive_monotone(scn)
    assert der.ok and der.details["decomposition_exact"]
    (f,) = der.details["factors"]
    assert (f["lift"], f["question_factor"], f["answer_factor"]) == (Fraction(4, 3), Fraction(12, 13), Fraction(9, 8))
    assert f["ratio"] == Fraction(18, 13) == f["lift"] * f["question_factor"] * f["answer_factor"]


def test_fix_thwart_fails_nonthwarting(fixtures_dir):
    rep = is_nonthwarting(_scn(fixtures_dir, "fix_thwart.json", [E1, E2]))
    assert not rep.ok
    (with_answer,) = rep.conclusion.lhs
    # P(e1,e2|x=1) / (P(e1|x=1) P(e2|x=1)) = (1/10) / (1/2 * 1/2)
    assert with_answer == Fraction(2, 5) < 1


def test_independent_paths_meet_the_boundary():
    table = {}
    for x in "01":
        for a in "01":
            for b in "01":
                table[vec([("x", x), ("e1", a), ("e2", b)])] = Fraction(1, 8)
    law = limit_law(held_universe(["x", "e1", "e2"], ["0", "1"], table))
    rep = is_nonthwarting(EvidenceScenario(LawBase(law), EMPTY, [E1, E2], ("x",), ("1",)))
    assert rep.ok
    assert rep.conclusion.lhs == rep.conclusion.rhs == [1]


def test_all_orders():
    # e2 alone lifts x but only after e1; the reversed order breaks the chain
    given = {
        "1": {("1", "1"): Fraction(1, 2), ("1", "0"): Fraction(1, 6), ("0", "1"): Fraction(1, 6), ("0", "0"): Fraction(1, 6)},
        "0": {("1", "1"): Fraction(1, 24), ("1", "0"): Fraction(7, 24), ("0", "1"): Fraction(7, 24), ("0", "0"): Fraction(9, 24)},
    }
    table = {vec([("x", x), ("e1", a), ("e2", b)]): Fraction(1, 2) * p for x, g in given.items() for (a, b), p in g.items()}
    law = limit_law(held_universe(["x", "e1", "e2"], ["0", "1"], table))
    scn = EvidenceScenario(LawBase(law), EMPTY, [E1, E2], ("x",), ("1",))
    assert is_evidence_collection(scn, all_orders=True).details["orders"] == 2


# -- the propositions -------------------------------------------------------------


def _args(scn):
    c = scn.checks[0]
    return (c["q"], EMPTY, [{tuple(x) for x in p} for p in c["paths"]], tuple(c["target"]))


@pytest.mark.xfail(strict=True, reason="exact calibration is unattainable for this proposition; see the ledger")
def test_p73_constructor_verifies_at_epsilon_zero():
    scn = construct_eps0("p73", 1)
    rep = verify_evidence_math(scn.sms1, scn.sms2, scn.psi, scn.Psi, 1, *_args(scn), 0.0)
    assert rep.verdict == "verified"


def test_p73_at_its_measured_score(fixtures_dir):
    scn = load_scenario(fixtures_dir / "fix_p73.json")
    rep = verify_evidence_math(scn.sms1, scn.sms2, scn.psi, scn.Psi, 1, *_args(scn), scn.epsilon)
    assert rep.verdict == "verified"
    assert 0 < rep.details["max_score"] <= scn.epsilon
    assert rep.conclusion.margin > 0


def test_p73_broken_calibration():
    scn = construct_eps0("p73", 1)
    # pull every interpretation 9/10 of the way toward (0: 1/10, 1: 9/10)
    skew = {("0",): Fraction(1, 10), ("1",): Fraction(9, 10)}
    d = Fraction(9, 10)
    bent = PsiInterp({k: {a: (1 - d) * p + d * skew[a] for a, p in v.items()} for k, v in scn.Psi.table.items()})
    rep = verify_evidence_math(scn.sms1, scn.sms2, scn.psi, bent, 1, *_args(scn), 0.1)
    assert rep.details["max_score"] == pytest.approx(0.29, abs=0.01)
    assert rep.verdict in ("precondition-failed", "refuted")


def test_p73_evidence_hypothesis_ablated():
    scn = construct_eps0("p73", 1)
    q, beta, paths, _ = _args(scn)
    rep = verify_evidence_math(scn.sms1, scn.sms2, scn.psi, scn.Psi, 1, q, beta, paths, ("0",), 1.0)
    assert rep.verdict == "precondition-failed"
    assert not rep.precondition("(1)").holds


def test_p74_constructor_and_sweep():
    scn = construct_eps0("p74", 1)
    rep = verify_evidence_sci(scn.sms1, scn.sms2, scn.psi, scn.Psi, scn.E, 1, *_args(scn), 0.0, sweep=True)
    assert rep.verdict == "verified"
    sweep = rep.details["sweep"]
    assert 0 < sweep["delta"] < 1 and 0 < sweep["epsilon"] < float("inf")


def test_p74_collapsed_e_fails_a_gate():
    scn = construct_eps0("p74", 1)
    # drop the code claims from every image, so no universe set maps onto a code claim
    E = EmbeddingMap({s: frozenset(c for c in y if c[0] != "s") for s, y in scn.E.table.items()})
    rep = verify_evidence_sci(scn.sms1, scn.sms2, scn.psi, scn.Psi, E, 1, *_args(scn), 0.0)
    assert rep.verdict == "precondition-failed"
    assert not rep.precondition("(2)").holds


def test_p75_constructor_and_leak():
    scn = construct_eps0("p75", 1)
    rep = verify_evidence_sci_flipped(scn.sms1, scn.sms2, scn.psi, scn.Psi, scn.E, 1, *_args(scn), 0.0,
                                      embed_check=False)
    assert rep.verdict == "verified"
    leak = stage_scenario(1, leak=True)
    rep = verify_evidence_sci_flipped(leak.sms1, leak.sms2, leak.psi, leak.Psi, leak.E, 1, *_args(leak), 0.0,
                                      embed_check=False)
    assert rep.verdict == "precondition-failed"
    bad = rep.precondition("(5)")
    assert not bad.holds and len({r for _, r in bad.witness["ratios"]}) == 2


def test_fixture_checks_run(fixtures_dir):
    scn = load_scenario(fixtures_dir / "fix_ev.json")
    assert [run_check(scn, c).verdict for c in scn.checks] == ["verified"] * 3
