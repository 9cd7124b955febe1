from __future__ import annotations

import math
from fractions import Fraction

import pytest

from smslab.divergence import check_convexity, divergence, full_support, kind_of
from smslab.errors import SupportError

HALF = {"0": Fraction(1, 2), "1": Fraction(1, 2)}
POINT = {"0": Fraction(1), "1": Fraction(0)}


@pytest.mark.parametrize("kind", ["kl", "tv", "js"])
def test_identical_distributions_have_zero_divergence(kind):
    p = {"0": Fraction(1, 3), "1": Fraction(2, 3)}
    assert divergence(p, p, kind) == 0


def test_known_values():
    assert divergence(POINT, HALF, "tv") == pytest.approx(0.5)
    assert divergence(POINT, HALF, "kl") == pytest.approx(math.log(2))
    # JS of a point mass against the uniform pair, in nats
    js = 0.5 * math.log(1 / 0.75) + 0.25 * math.log(0.5 / 0.25) + 0.25 * math.log(0.5 / 0.75)
    assert divergence(POINT, HALF, "js") == pytest.approx(js)


def test_kl_needs_support():
    with pytest.raises(SupportError):
        divergence(HALF, POINT, "kl")
    assert not full_support(POINT) and full_support(HALF)


def test_aliases():
    assert kind_of("total-variation") == "tv"
    with pytest.raises(ValueError):
        kind_of("hellinger")


@pytest.mark.parametrize("kind", ["kl", "total-variation", "js"])
def test_convexity(kind):
    assert check_convexity(kind, 1000, 1).ok


def test_convexity_endpoint_is_equality():
    r = {"0": Fraction(1, 4), "1": Fraction(3, 4)}
    mix = {a: 0 * POINT[a] + 1 * HALF[a] for a in HALF}
    assert divergence(mix, r, "kl") == divergence(HALF, r, "kl")
