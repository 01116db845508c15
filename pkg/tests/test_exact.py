import random
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from sepnets.exact import (
    BranchTag,
    CReal,
    arith,
    compare_within,
    creal_from_rational,
    dyadic,
    to_rational,
)
from sepnets.properties import SQRT2, jittered, random_composition

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=10_000)


def test_to_rational_accepts_common_forms():
    assert to_rational(3) == 3
    assert to_rational("-7/2") == Fraction(-7, 2)
    assert to_rational(Fraction(2, 6)) == mpq(1, 3)
    with pytest.raises(TypeError):
        to_rational(0.5)
    with pytest.raises(TypeError):
        to_rational(True)


def test_rational_is_lowest_terms():
    q = to_rational("6/8")
    assert (q.numerator, q.denominator) == (3, 4)


@pytest.mark.parametrize("q, n, expected", [
    (0, 7, 0),
    (Fraction(1, 3), 10, Fraction(1, 3)),
    (Fraction(-7, 2), 0, Fraction(-7, 2)),
])
def test_from_rational_is_exact(q, n, expected):
    assert creal_from_rational(q).approx(n) == expected


def test_arith_examples():
    quarter = creal_from_rational(Fraction(1, 4))
    half = arith("add", quarter, quarter)
    assert abs(half.approx(5) - Fraction(1, 2)) <= dyadic(5)
    assert arith("abs", creal_from_rational(-3)).approx(0) == 3
    zero = arith("mul", SQRT2, creal_from_rational(0))
    assert all(zero.approx(n) == 0 for n in range(20))


def test_arith_rejects_bad_calls():
    x = creal_from_rational(1)
    with pytest.raises(ValueError):
        arith("div", x, x)
    with pytest.raises(ValueError):
        arith("add", x)


def test_approx_rejects_negative_precision():
    with pytest.raises(ValueError):
        SQRT2.approx(-1)


def test_sqrt2_square_is_two():
    two = SQRT2 * SQRT2
    for n in (0, 5, 30):
        assert abs(two.approx(n) - 2) <= dyadic(n)


def test_memoized_approximations_are_stable():
    x = jittered(mpq(1, 3), "memo") * jittered(mpq(2, 7), "memo2")
    assert [x.approx(n) for n in range(12)] == [x.approx(n) for n in range(12)]


@given(fractions, fractions, st.sampled_from(["add", "sub", "mul", "min", "max"]), st.integers(0, 30))
def test_binary_ops_on_jittered_rationals(a, b, op, n):
    x = jittered(to_rational(a), f"a{a}")
    y = jittered(to_rational(b), f"b{b}")
    exact = {"add": a + b, "sub": a - b, "mul": a * b, "min": min(a, b), "max": max(a, b)}[op]
    assert abs(arith(op, x, y).approx(n) - exact) <= dyadic(n)


@given(fractions, st.integers(0, 30))
def test_unary_ops(a, n):
    x = jittered(to_rational(a), "u")
    assert abs(arith("neg", x).approx(n) + a) <= dyadic(n)
    assert abs(arith("abs", x).approx(n) - abs(a)) <= dyadic(n)


@settings(max_examples=300)
@given(st.integers(0, 2**32))
def test_regularity_of_random_compositions(seed):
    rng = random.Random(seed)
    x, value = random_composition(rng, 3)
    for m in range(0, 31, 5):
        for n in range(0, 31, 7):
            assert abs(x.approx(m) - x.approx(n)) <= dyadic(m) + dyadic(n)
        if value is not None:
            assert abs(x.approx(m) - value) <= dyadic(m)


def test_compare_within_forced_branches():
    assert compare_within(creal_from_rational(2), 0, 1).tag is BranchTag.ABOVE_LOWER
    assert compare_within(creal_from_rational(-1), 0, 1).tag is BranchTag.BELOW_UPPER


def test_compare_within_midpoint_tie():
    # n = 2 is the least index with 2**(1-n) < 1; approx(2) = 1/2 <= midpoint 1/2
    seen = []
    x = CReal(lambda n: seen.append(n) or mpq(1, 2))
    branch = compare_within(x, 0, 1)
    assert branch.tag is BranchTag.BELOW_UPPER and branch.bound == 1
    assert seen == [2]


def test_compare_within_rejects_empty_window():
    with pytest.raises(ValueError):
        compare_within(creal_from_rational(0), 1, 1)
    with pytest.raises(ValueError):
        compare_within(creal_from_rational(0), 2, 1)


@given(fractions, fractions, fractions.filter(lambda g: g != 0))
def test_compare_within_soundness(q, a, gap):
    b = a + abs(gap)
    for x in (creal_from_rational(q), jittered(to_rational(q), "cmp")):
        branch = compare_within(x, a, b)
        if branch.tag is BranchTag.BELOW_UPPER:
            assert q < b and branch.bound == b
        else:
            assert q > a and branch.bound == a
