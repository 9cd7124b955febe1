from __future__ import annotations

from fractions import Fraction

from smslab.claims import claim_set, unorder
from smslab.sms import SmsSpec, check_backward_consistent, check_nonrepeating, validate


def test_unorder_erases_order():
    assert unorder([("qa", "0"), ("qb", "1")]) == {("qa", "0"), ("qb", "1")}
    assert unorder([("qa", "0")]) == {("qa", "0")}
    assert unorder([("qb", "1"), ("qa", "0")]) == claim_set([("qa", "0"), ("qb", "1")])


def test_validate_accepts_normalized(fix_b):
    assert validate(fix_b).valid


def test_validate_reports_bad_sum():
    spec = SmsSpec.per_step(["qa"], ["0", "1"], [{(("qa", "0"),): Fraction(1, 2), (("qa", "1"),): Fraction(1, 3)}])
    rep = validate(spec)
    assert not rep.valid
    assert any("sums to 5/6" in v for v in rep.violations)


def test_validate_reports_duplicate_claim():
    spec = SmsSpec.per_step(["qa"], ["0"], [{(("qa", "0"), ("qa", "0")): 1}])
    assert any("duplicate claim" in v for v in validate(spec).violations)


def test_nonrepeating(fix_a):
    assert check_nonrepeating(fix_a, 0).ok
    rep_at_2 = SmsSpec.per_step(["qa"], ["0", "1"], [{(("qa", "0"),): 1}, {(("qa", "0"), ("qa", "1")): 1}])
    rep = check_nonrepeating(rep_at_2, 0)
    assert not rep.ok
    assert rep.conclusion.lhs["step"] == 2
    assert [tuple(c) for c in rep.conclusion.lhs["vector"]] == [("qa", "0"), ("qa", "1")]
    rep_at_1 = SmsSpec.per_step(["qa"], ["0", "1"], [{(("qa", "0"), ("qa", "1")): 1}, {(("qa", "0"),): 1}])
    assert check_nonrepeating(rep_at_1, 1).ok


def _appender():
    a, ab, abc = (("qa", "0"),), (("qa", "0"), ("qb", "1")), (("qa", "0"), ("qb", "1"), ("qc", "0"))
    kernel = {a: {ab: 1}, ab: {abc: 1}, abc: {abc: 1}}
    return SmsSpec.markov(["qa", "qb", "qc"], ["0", "1"], 5, {a: 1}, kernel)


def _dropper():
    a, ab, b = (("qa", "0"),), (("qa", "0"), ("qb", "1")), (("qb", "1"),)
    # step 3 drops (qa, 0); afterwards the chain holds
    kernel = {a: {ab: 1}, ab: {b: 1}, b: {b: 1}}
    return SmsSpec.markov(["qa", "qb"], ["0", "1"], 6, {a: 1}, kernel)


def test_backward_consistent_appender():
    assert check_backward_consistent(_appender(), 0).ok


def test_backward_consistent_drop_detected_and_kappa_skips_it():
    rep = check_backward_consistent(_dropper(), 0)
    assert not rep.ok
    assert len(rep.conclusion.lhs["trajectory"]) == 3
    assert [tuple(c) for c in rep.conclusion.lhs["dropped"]] == [("qa", "0")]
    assert check_backward_consistent(_dropper(), 3).ok
