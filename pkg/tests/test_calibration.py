from __future__ import annotations

import math
from fractions import Fraction

import pytest

from smslab.calibration import (
    PredictionDistribution,
    PsiInterp,
    PsiMap,
    calibration_score,
    is_calibrated,
    is_honest,
    is_prediction_pair,
    single_sms_reduction,
)
from smslab.claims import EMPTY
from smslab.dist import limit_law
from smslab.errors import ConditioningError
from smslab.generators import held_universe, vec

PSI = PsiMap({"qa": ("qa",)})
DELTA = PsiInterp({(("qa",), v): {(v,): 1} for v in "01"})
FLAT = PsiInterp({(("qa",), v): {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)} for v in "01"})


def test_sc_id_is_a_prediction_pair(fix_a):
    rep = is_prediction_pair(fix_a, fix_a, PSI, DELTA, None, 1, "qa", EMPTY)
    assert rep.ok
    assert len(rep.preconditions) == 4 and all(p.holds for p in rep.preconditions)


def test_prediction_pair_failures(fix_a):
    rep = is_prediction_pair(fix_a, fix_a, PsiMap({}), DELTA, None, 1, "qa", EMPTY)
    assert not rep.precondition("(2)").holds
    rep = is_prediction_pair(fix_a, fix_a, PSI, DELTA, None, 1, "qa", {("qb", "1")})
    assert not rep.precondition("(1)").holds


def test_sc_id_score_is_ln2(fix_a):
    score = calibration_score(fix_a, fix_a, PSI, DELTA, 1, "qa", EMPTY)
    assert score == pytest.approx(math.log(2), abs=1e-15)
    assert is_calibrated(fix_a, fix_a, PSI, DELTA, 1, "qa", EMPTY, math.log(2))
    assert not is_calibrated(fix_a, fix_a, PSI, DELTA, 1, "qa", EMPTY, 0.5)


def test_sc_hon_score_is_zero(fix_a):
    assert calibration_score(fix_a, fix_a, PSI, FLAT, 1, "qa", EMPTY) == 0


def test_single_sms_reduction(fix_a):
    assert single_sms_reduction(fix_a, 1, "qa") == 0
    skewed = held_universe(["qa"], ["0", "1"], {vec([("qa", "0")]): Fraction(3, 4), vec([("qa", "1")]): Fraction(1, 4)})
    assert single_sms_reduction(fix_a, 1, "qa", kind="tv", oracle=skewed) == pytest.approx(0.25)
    bound = calibration_score(fix_a, fix_a, PSI, DELTA, 1, "qa", EMPTY)
    assert single_sms_reduction(fix_a, 1, "qa", oracle=skewed) <= bound


def test_honesty_reads_off_the_augmented_conditional(fix_a):
    law = limit_law(fix_a)
    read_off = PsiInterp({(("qa",), v): law.response(("qa",), {("qa", v)}).dist for v in "01"})
    assert is_honest(fix_a, PSI, read_off, None, "qa", "0").ok
    assert is_honest(fix_a, PSI, read_off, None, "qa", "1").ok


def test_flat_psi_is_dishonest(fix_a):
    # with psi the identity the self-conditional given (qa, v) is a point mass
    rep = is_honest(fix_a, PSI, FLAT, None, "qa", "0")
    assert not rep.ok
    assert rep.conclusion.lhs == {("0",): 1, ("1",): 0}


def test_honesty_zero_probability_state(fix_a):
    with pytest.raises(ConditioningError):
        is_honest(fix_a, PSI, DELTA, None, "qa", "0", {("qa", "1")})


def test_prediction_distribution(fix_a):
    for Psi in (DELTA, FLAT):
        F = PredictionDistribution(fix_a, fix_a, PSI, Psi, 1)
        assert F.value(("qa",), EMPTY) == {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}
    F = PredictionDistribution(fix_a, fix_a, PSI, DELTA, 1)
    assert F.weight(("qa",), {("qa", "0"), ("qa", "1")}) == 0
