from __future__ import annotations

from fractions import Fraction

import pytest

from smslab.claims import EMPTY
from smslab.dist import (
    cond_response_on_collection,
    limit_prob,
    mc_estimate,
    prob_collection,
    prob_exact,
    prob_superset,
    response_dist,
    semidist_question,
    trajectory_response_dist,
)
from smslab.errors import ConditioningError
from smslab.sms import SmsSpec

A0, A1, B0, B1 = ("qa", "0"), ("qa", "1"), ("qb", "0"), ("qb", "1")


def test_superset_probabilities(fix_b):
    assert prob_superset(fix_b, 1, {A0}) == Fraction(2, 3)
    assert prob_superset(fix_b, 1, EMPTY) == 1
    assert prob_superset(fix_b, 1, {A1}) == 0


def test_exact_probabilities(fix_b):
    assert prob_exact(fix_b, 1, {A0}) == Fraction(1, 3)
    assert prob_exact(fix_b, 1, {A0, B1}) == Fraction(1, 3)
    assert prob_exact(fix_b, 1, EMPTY) == 0


def test_semidist_question(fix_b):
    assert semidist_question(fix_b, 1, ["qb"], {A0}) == Fraction(1, 3)
    assert semidist_question(fix_b, 1, ["qa"]) == Fraction(2, 3)
    assert semidist_question(fix_b, 1, ["qa", "qb"]) == Fraction(1, 3)


def test_response_dist(fix_b):
    r = response_dist(fix_b, 1, ["qa"])
    assert r.dist == {("0",): 1, ("1",): 0} and r.sure
    r = response_dist(fix_b, 1, ["qb"])
    assert r.dist == {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)} and not r.sure
    with pytest.raises(ConditioningError):
        response_dist(fix_b, 1, ["qb"], {A1})


def test_prob_collection(fix_b):
    assert prob_collection(fix_b, 1, [{A0}, {B0}]) == 1
    assert prob_collection(fix_b, 1, [{A1}]) == 0
    assert prob_collection(fix_b, 1, [{A0}], {B1}) == Fraction(1, 3)


def test_cond_response_on_collection(fix_b):
    assert cond_response_on_collection(fix_b, 1, ["qb"], [{A0}]).support() == [("1",)]
    assert cond_response_on_collection(fix_b, 1, ["qa"], [EMPTY]).dist[("0",)] == 1
    with pytest.raises(ConditioningError):
        cond_response_on_collection(fix_b, 1, ["qb"], [{A1}])


def test_limit_of_hold_kernel(fix_a):
    lv = limit_prob(fix_a, {A0})
    assert lv.value == Fraction(1, 2) and lv.exact and lv.width == 0
    assert limit_prob(fix_a, EMPTY).value == 1


def test_limit_of_absorbing_kernel():
    a, ab = (A0,), (A0, B1)
    spec = SmsSpec.markov(["qa", "qb"], ["0", "1"], 4, {a: 1}, {a: {ab: 1}, ab: {ab: 1}})
    assert limit_prob(spec, {B1}).value == 1


def test_limit_bracket_with_tolerance():
    # the chain adds (qb, 1) with probability 1/2 per step, so the gap halves each step
    a, ab = (A0,), (A0, B1)
    spec = SmsSpec.markov(["qa", "qb"], ["0", "1"], 12, {a: 1}, {a: {a: Fraction(1, 2), ab: Fraction(1, 2)}, ab: {ab: 1}})
    lv = limit_prob(spec, {B1}, tol=Fraction(1, 100))
    assert lv.lower <= 1 <= lv.upper
    assert lv.width <= Fraction(1, 100)
    assert limit_prob(spec, {B1}).value == 1


def test_trajectory_response(fix_a):
    assert trajectory_response_dist(fix_a, [(A0,)], "qa").dist == {("0",): 1, ("1",): 0}
    assert trajectory_response_dist(fix_a, [(A1,)], "qa").dist == {("0",): 0, ("1",): 1}
    with pytest.raises(ConditioningError):
        trajectory_response_dist(fix_a, [(B0,)], "qa")


def test_mc_estimate(fix_b):
    est = mc_estimate(fix_b, 1, {A0}, 100_000, seed=7)
    assert abs(est.estimate - 2 / 3) <= 4 * est.std_error
    assert mc_estimate(fix_b, 1, EMPTY, 100, seed=1).estimate == 1
    assert mc_estimate(fix_b, 1, {A1}, 100, seed=1).estimate == 0


def test_mc_estimate_kernel_paths(fix_a):
    est = mc_estimate(fix_a, 3, {A0}, 20_000, seed=2)
    assert abs(est.estimate - 0.5) <= 4 * est.std_error
