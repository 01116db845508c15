"""Exact scalars: GMP rationals and constructive reals with a 2**-n modulus.

A :class:`CReal` is a function ``n -> Rational`` whose value at ``n`` lies
within ``2**-n`` of the real number it represents.  Every operation here
keeps that contract, so results can be fed into one another without any
precision bookkeeping on the caller's side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from gmpy2 import mpq

Rational = type(mpq())
RationalLike = Union[int, str, Fraction, Rational]

__all__ = [
    "Rational",
    "to_rational",
    "dyadic",
    "CReal",
    "creal_from_rational",
    "arith",
    "creal_min",
    "creal_max",
    "BranchTag",
    "Branch",
    "compare_within",
]


def to_rational(value: RationalLike) -> Rational:
    """Coerce ints, ``"a/b"`` strings, Fractions and mpqs to an exact mpq."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact or boolean value {value!r}")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, (int, str)):
        return mpq(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def dyadic(n: int) -> Rational:
    """``2**-n`` as an exact rational (``n`` may be negative)."""
    return mpq(1, 1 << n) if n >= 0 else mpq(1 << -n)


def _extra_bits(q: Rational) -> int:
    # smallest e >= 0 with 2**e >= q
    e = 0
    while (1 << e) < q:
        e += 1
    return e


class CReal:
    """A real number given by rational approximations.

    ``approx(n)`` is within ``2**-n`` of the value.  Approximations are
    memoized per instance; since the approximation function is pure, a race
    on the cache can only store the same rational twice.
    """

    __slots__ = ("_fn", "_cache", "exact")

    def __init__(self, fn: Callable[[int], Rational], exact: Optional[Rational] = None):
        self._fn = fn
        self._cache: dict[int, Rational] = {}
        self.exact = exact

    def approx(self, n: int) -> Rational:
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"precision index must be a non-negative int, got {n!r}")
        if self.exact is not None:
            return self.exact
        try:
            return self._cache[n]
        except KeyError:
            value = to_rational(self._fn(n))
            self._cache[n] = value
            return value

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"CReal({self.exact})"
        return f"CReal(~{float(self.approx(20)):.6g})"

    # arithmetic sugar; rational operands are embedded exactly
    def __add__(self, other):
        return arith("add", self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return arith("sub", self, _lift(other))

    def __rsub__(self, other):
        return arith("sub", _lift(other), self)

    def __mul__(self, other):
        return arith("mul", self, _lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return arith("neg", self)

    def __abs__(self):
        return arith("abs", self)


def creal_from_rational(q: RationalLike) -> CReal:
    q = to_rational(q)
    return CReal(lambda n: q, exact=q)


def _lift(value) -> CReal:
    return value if isinstance(value, CReal) else creal_from_rational(value)


def _add(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return creal_from_rational(x.exact + y.exact)
    return CReal(lambda n: x.approx(n + 1) + y.approx(n + 1))


def _neg(x: CReal) -> CReal:
    if x.exact is not None:
        return creal_from_rational(-x.exact)
    return CReal(lambda n: -x.approx(n))


def _abs(x: CReal) -> CReal:
    if x.exact is not None:
        return creal_from_rational(abs(x.exact))
    return CReal(lambda n: abs(x.approx(n)))


def _scale(q: Rational, y: CReal) -> CReal:
    if q == 0:
        return creal_from_rational(0)
    e = _extra_bits(abs(q))
    return CReal(lambda n: q * y.approx(n + e))


def _mul(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return creal_from_rational(x.exact * y.exact)
    if x.exact is not None:
        return _scale(x.exact, y)
    if y.exact is not None:
        return _scale(y.exact, x)

    def approx(n: int) -> Rational:
        # |x| <= |x(0)| + 1, and |xy - ab| <= (|x| + |b|) * 2**-k
        bound = abs(x.approx(0)) + abs(y.approx(0)) + 2
        k = n + _extra_bits(bound)
        return x.approx(k) * y.approx(k)

    return CReal(approx)


def creal_min(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return creal_from_rational(min(x.exact, y.exact))
    return CReal(lambda n: min(x.approx(n), y.approx(n)))


def creal_max(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return creal_from_rational(max(x.exact, y.exact))
    return CReal(lambda n: max(x.approx(n), y.approx(n)))


_BINARY = {
    "add": _add,
    "sub": lambda x, y: _add(x, _neg(y)),
    "mul": _mul,
    "min": creal_min,
    "max": creal_max,
}
_UNARY = {"neg": _neg, "abs": _abs}


def arith(op: str, x: CReal, y: Optional[CReal] = None) -> CReal:
    """Apply ``op`` (add, sub, mul, neg, abs, min, max) to constructive reals."""
    if op in _UNARY:
        return _UNARY[op](x)
    if op not in _BINARY:
        raise ValueError(f"unknown operation {op!r}")
    if y is None:
        raise ValueError(f"{op} needs two operands")
    return _BINARY[op](x, y)


class BranchTag(enum.Enum):
    BELOW_UPPER = "below_upper"
    ABOVE_LOWER = "above_lower"


@dataclass(frozen=True)
class Branch:
    """Certificate from :func:`compare_within`.

    ``BELOW_UPPER`` certifies ``x < bound``; ``ABOVE_LOWER`` certifies
    ``x > bound``.
    """

    tag: BranchTag
    bound: Rational


def compare_within(x: CReal, a: RationalLike, b: RationalLike) -> Branch:
    """Decide ``x < b`` or ``x > a`` for rationals ``a < b``.

    Queries ``x`` once, at the least ``n`` with ``2**(1 - n) < b - a``, and
    returns ``BELOW_UPPER`` when the approximation is at most the midpoint.
    """
    a, b = to_rational(a), to_rational(b)
    if not a < b:
        raise ValueError(f"compare_within needs a < b, got a={a}, b={b}")
    gap = b - a
    n = 0
    while dyadic(n - 1) >= gap:
        n += 1
    if x.approx(n) <= (a + b) / 2:
        return Branch(BranchTag.BELOW_UPPER, b)
    return Branch(BranchTag.ABOVE_LOWER, a)
