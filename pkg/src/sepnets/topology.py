"""Basic neighborhoods of the real line and regular pairs of them.

A basic neighborhood is an open ball with a CReal center and a positive
rational radius.  A pair ``<U, V>`` of concentric balls with
``V.radius < U.radius`` is regular: every point ``x`` either lies in ``U``
or is at distance greater than ``V.radius`` from the center, hence not a
touch point of ``V``.  :func:`classify` decides which, for any ``x``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

from .exact import (
    BranchTag,
    CReal,
    Rational,
    compare_within,
    creal_from_rational,
    to_rational,
)

__all__ = [
    "Ball",
    "RegularPair",
    "Side",
    "Classification",
    "ContractViolation",
    "shrink_to_regular",
    "regular_chain",
    "classify",
    "decide_convergent",
]


class ContractViolation(Exception):
    """A caller-supplied modulus or witness broke its stated contract."""


@dataclass(frozen=True)
class Ball:
    center: CReal
    radius: Rational

    def __post_init__(self):
        if not isinstance(self.center, CReal):
            object.__setattr__(self, "center", creal_from_rational(self.center))
        object.__setattr__(self, "radius", to_rational(self.radius))
        if self.radius <= 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class RegularPair:
    outer: Ball
    inner: Ball

    def __post_init__(self):
        # centers are CReals, so "same center" means the same object
        if self.outer.center is not self.inner.center:
            raise ValueError("regular pair balls must share one center object")
        if not self.inner.radius < self.outer.radius:
            raise ValueError("inner radius must be strictly below outer radius")

    @property
    def center(self) -> CReal:
        return self.outer.center


class Side(enum.Enum):
    IN_OUTER = "in_outer"
    NOT_TOUCH_INNER = "not_touch_inner"


@dataclass(frozen=True)
class Classification:
    """``IN_OUTER`` certifies ``d(x, c) < outer.radius``;
    ``NOT_TOUCH_INNER`` certifies ``d(x, c) > inner.radius``.

    ``witness`` is the failing sequence index when produced by
    :func:`decide_convergent`.
    """

    side: Side
    witness: Optional[int] = None

    @property
    def in_outer(self) -> bool:
        return self.side is Side.IN_OUTER


def shrink_to_regular(outer: Ball) -> RegularPair:
    """Pair ``outer`` with the concentric ball of half its radius."""
    return RegularPair(outer, Ball(outer.center, outer.radius / 2))


def regular_chain(outer: Ball, length: int = 3) -> list[RegularPair]:
    """``<U, V1>, <V1, V2>, ...`` built by repeated halving."""
    pairs = []
    ball = outer
    for _ in range(length):
        pair = shrink_to_regular(ball)
        pairs.append(pair)
        ball = pair.inner
    return pairs


def classify(pair: RegularPair, x: CReal) -> Classification:
    distance = abs(x - pair.center)
    branch = compare_within(distance, pair.inner.radius, pair.outer.radius)
    if branch.tag is BranchTag.BELOW_UPPER:
        return Classification(Side.IN_OUTER)
    return Classification(Side.NOT_TOUCH_INNER)


def decide_convergent(
    seq: Callable[[int], CReal],
    modulus: Callable[[Rational], int],
    limit: CReal,
    pair: RegularPair,
    audit: int = 0,
) -> Classification:
    """Either every ``seq(n)`` lies in ``pair.outer``, or some ``seq(m)`` is
    not a touch point of ``pair.inner``.

    ``modulus(eps)`` must return ``N`` with ``|seq(n) - limit| < eps`` for all
    ``n >= N``.  The pair must be centered at ``limit``; this is confirmed up
    to ``inner.radius / 2`` before anything else.  With ``audit > 0`` the
    ``audit`` terms after ``N`` are classified too, and a term certified
    outside the inner ball raises :class:`ContractViolation`.
    """
    r = pair.inner.radius
    offset = abs(limit - pair.center)
    if compare_within(offset, r / 4, r / 2).tag is not BranchTag.BELOW_UPPER:
        raise ValueError("pair is not centered at the limit")
    # tail terms are within r/2 of limit and limit within r/2 of the center
    N = modulus(r / 2)
    for m in range(N + 1):
        if not classify(pair, seq(m)).in_outer:
            return Classification(Side.NOT_TOUCH_INNER, witness=m)
    for m in range(N + 1, N + 1 + audit):
        if not classify(pair, seq(m)).in_outer:
            raise ContractViolation(
                f"term {m} lies outside the inner ball although modulus gave N={N}"
            )
    return Classification(Side.IN_OUTER)

