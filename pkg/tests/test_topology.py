import random
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from sepnets.exact import creal_from_rational, dyadic
from sepnets.properties import prop_decide_convergent, prop_regular_pair_totality
from sepnets.topology import (
    Ball,
    ContractViolation,
    RegularPair,
    Side,
    classify,
    decide_convergent,
    regular_chain,
    shrink_to_regular,
)

ZERO = creal_from_rational(0)
UNIT = shrink_to_regular(Ball(ZERO, 1))


def const_seq(values, tail):
    return lambda n: creal_from_rational(values[n] if n < len(values) else tail)


def test_ball_rejects_non_positive_radius():
    with pytest.raises(ValueError):
        Ball(ZERO, 0)


def test_regular_pair_invariants():
    with pytest.raises(ValueError):
        RegularPair(Ball(ZERO, 1), Ball(ZERO, 1))
    with pytest.raises(ValueError):
        RegularPair(Ball(ZERO, 1), Ball(creal_from_rational(0), mpq(1, 2)))


def test_shrink_halves_radius():
    assert UNIT.outer.radius == 1 and UNIT.inner.radius == mpq(1, 2)
    assert UNIT.inner.center is UNIT.outer.center
    assert shrink_to_regular(Ball(mpq(1, 3), mpq(1, 8))).inner.radius == mpq(1, 16)


def test_chain_of_three_balls():
    first, second = regular_chain(Ball(ZERO, 1), 2)
    assert [first.outer.radius, first.inner.radius, second.inner.radius] == [1, mpq(1, 2), mpq(1, 4)]
    assert second.outer is first.inner


@pytest.mark.parametrize("x, side", [
    (mpq(3, 4), Side.IN_OUTER),        # d = 3/4 is exactly the midpoint of (1/2, 1)
    (mpq(2), Side.NOT_TOUCH_INNER),
    (mpq(0), Side.IN_OUTER),
])
def test_classify_examples(x, side):
    assert classify(UNIT, creal_from_rational(x)).side is side


@given(st.fractions(-4, 4, max_denominator=4096), st.fractions(-4, 4, max_denominator=4096),
       st.fractions(Fraction(1, 1024), 4, max_denominator=1024), st.integers(1, 1023))
def test_classify_certificate(x, c, R, k):
    R = mpq(R)
    r = R * mpq(k, 1024)
    center = creal_from_rational(c)
    pair = RegularPair(Ball(center, R), Ball(center, r))
    verdict = classify(pair, creal_from_rational(x))
    if verdict.side is Side.IN_OUTER:
        assert abs(x - c) < R
    else:
        assert abs(x - c) > r


def test_decide_convergent_constant_at_center():
    assert decide_convergent(const_seq([], 0), lambda eps: 0, ZERO, UNIT).side is Side.IN_OUTER


def test_decide_convergent_single_outlier():
    verdict = decide_convergent(const_seq([5], 0), lambda eps: 1, ZERO, UNIT)
    assert verdict == verdict.__class__(Side.NOT_TOUCH_INNER, witness=0)


def test_decide_convergent_boundary_golden():
    # seq(0) = 1 sits on the outer boundary; compare_within(1, 1/2, 1) reads at
    # n = 3 and 1 > 3/4, so the midpoint rule certifies "outside V" at index 0
    def modulus(eps):
        N = 0
        while dyadic(N) >= eps:
            N += 1
        return N

    verdict = decide_convergent(lambda n: creal_from_rational(dyadic(n)), modulus, ZERO, UNIT)
    assert verdict.side is Side.NOT_TOUCH_INNER and verdict.witness == 0


def test_decide_convergent_inside():
    seq = lambda n: creal_from_rational(mpq(1, 4) * dyadic(n))
    verdict = decide_convergent(seq, lambda eps: 4, ZERO, UNIT, audit=10)
    assert verdict.side is Side.IN_OUTER


def test_decide_convergent_rejects_off_center_pair():
    pair = shrink_to_regular(Ball(creal_from_rational(3), 1))
    with pytest.raises(ValueError):
        decide_convergent(const_seq([], 0), lambda eps: 0, ZERO, pair)


def test_decide_convergent_audit_catches_lying_modulus():
    # claims convergence from N = 0 on, but term 3 jumps far away
    with pytest.raises(ContractViolation):
        decide_convergent(const_seq([0, 0, 0, 9], 0), lambda eps: 0, ZERO, UNIT, audit=5)


def test_regular_pair_property_suite():
    assert prop_regular_pair_totality(random.Random(11), 500).ok


def test_decide_convergent_property_suite():
    assert prop_decide_convergent(random.Random(12), 60).ok
