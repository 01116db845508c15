"""Riemann sums over tagged partitions of [0, 1] as a net.

Partitions are ordered by mesh: ``W <= W'`` iff ``mesh(W') <= mesh(W)``.
Under that preorder the uniform partitions into ``2**(n+1)`` cells form a
nondecreasing cofinal sequence, and any sequence regular with respect to it
has ``mesh(x(n)) < 2**-n``.

Separability uses an enumeration of all rational partitions.  A natural
number is read as a list of tokens, the tokens as cuts and relative tag
positions, and the resulting partition is split uniformly until its mesh
fits under the base index.  :func:`encode_partition` inverts the reading,
so every partition that already fits is enumerated.
"""

from __future__ import annotations

import bisect
import functools
import itertools
import math
import os
import random
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from gmpy2 import mpq

from .exact import CReal, Rational, RationalLike, creal_from_rational, dyadic, to_rational
from .nets import CofinalSequence, DirectedSet, Net, SeparabilityWitness

__all__ = [
    "PRECISION_CEILING_ENV",
    "ResourceLimitError",
    "precision_ceiling",
    "TaggedPartition",
    "mesh",
    "partition_leq",
    "partition_join",
    "PARTITIONS",
    "dyadic_cofinal",
    "dyadic_witness",
    "DYADIC",
    "Integrand",
    "REGISTRY",
    "get_integrand",
    "riemann_sum",
    "riemann_net",
    "refinement_level",
    "riemann_modulus",
    "integral",
    "integrate",
    "eps_for_mesh",
    "random_partition",
    "audit_modulus",
    "WeakProbeReport",
    "weak_integrability_probe",
    "encode_partition",
    "decode_partition",
    "refine_to_mesh",
    "enumerate_dominating",
    "riemann_separability",
]

PRECISION_CEILING_ENV = "SEPNETS_PRECISION_CEILING"
_DEFAULT_CEILING = 24


class ResourceLimitError(RuntimeError):
    pass


def precision_ceiling() -> int:
    raw = os.environ.get(PRECISION_CEILING_ENV)
    return int(raw) if raw else _DEFAULT_CEILING


class _Grid(Sequence):
    """Lazy ``(offset + step * i) / denom`` for ``i < count``."""

    __slots__ = ("count", "denom", "offset", "step")

    def __init__(self, count: int, denom: int, offset: int, step: int):
        self.count, self.denom, self.offset, self.step = count, denom, offset, step

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(self.count))]
        if i < 0:
            i += self.count
        if not 0 <= i < self.count:
            raise IndexError(i)
        return mpq(self.offset + self.step * i, self.denom)

    def __iter__(self):
        denom, offset, step = self.denom, self.offset, self.step
        return (mpq(offset + step * i, denom) for i in range(self.count))


class TaggedPartition:
    """Cuts ``0 = t0 < ... < tK = 1`` with one tag per cell, ``t(i-1) <= xi <= ti``."""

    __slots__ = ("cuts", "tags", "uniform", "blocks", "_mesh")

    def __init__(self, cuts, tags, *, check: bool = True, uniform: Optional[int] = None):
        if check:
            cuts = tuple(to_rational(c) for c in cuts)
            tags = tuple(to_rational(t) for t in tags)
            if len(cuts) < 2 or cuts[0] != 0 or cuts[-1] != 1:
                raise ValueError("cuts must start at 0 and end at 1")
            if len(tags) != len(cuts) - 1:
                raise ValueError(f"need {len(cuts) - 1} tags, got {len(tags)}")
            for left, right, tag in zip(cuts, cuts[1:], tags):
                if not left < right:
                    raise ValueError(f"cuts not strictly increasing at {left}, {right}")
                if not left <= tag <= right:
                    raise ValueError(f"tag {tag} outside cell [{left}, {right}]")
        self.cuts = cuts
        self.tags = tags
        self.uniform = uniform
        self.blocks = None
        self._mesh = None

    @classmethod
    def uniform_midpoint(cls, cells: int) -> "TaggedPartition":
        return cls(_Grid(cells + 1, cells, 0, 1), _Grid(cells, 2 * cells, 1, 2),
                   check=False, uniform=cells)

    def __len__(self) -> int:
        return len(self.tags)

    def cells(self) -> Iterator[tuple[Rational, Rational, Rational]]:
        cuts = iter(self.cuts)
        left = next(cuts)
        for right, tag in zip(cuts, self.tags):
            yield left, right, tag
            left = right

    @property
    def mesh(self) -> Rational:
        if self._mesh is None:
            if self.uniform is not None:
                self._mesh = mpq(1, self.uniform)
            else:
                self._mesh = max(right - left for left, right, _ in self.cells())
        return self._mesh

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaggedPartition):
            return NotImplemented
        if len(self) != len(other):
            return False
        return list(self.cuts) == list(other.cuts) and list(self.tags) == list(other.tags)

    def __hash__(self) -> int:
        return hash((len(self), self.mesh))

    def __repr__(self) -> str:
        if self.uniform is not None:
            return f"TaggedPartition.uniform_midpoint({self.uniform})"
        if len(self) <= 4:
            return f"TaggedPartition(cuts={[str(c) for c in self.cuts]}, tags={[str(t) for t in self.tags]})"
        return f"<TaggedPartition cells={len(self)} mesh={self.mesh}>"

    def materialize(self) -> "TaggedPartition":
        """A copy with plain tuples for cuts and tags."""
        return TaggedPartition(tuple(self.cuts), tuple(self.tags), check=False)


def mesh(W: TaggedPartition) -> Rational:
    return W.mesh


def partition_leq(W: TaggedPartition, W2: TaggedPartition) -> bool:
    return W2.mesh <= W.mesh


def partition_join(W: TaggedPartition, W2: TaggedPartition) -> TaggedPartition:
    return W2 if W2.mesh <= W.mesh else W


PARTITIONS = DirectedSet(partition_leq, partition_join, "partitions by mesh")


@functools.lru_cache(maxsize=64)
def dyadic_cofinal(n: int) -> TaggedPartition:
    """Uniform midpoint-tagged partition into ``2**(n+1)`` cells."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return TaggedPartition.uniform_midpoint(1 << (n + 1))


def dyadic_witness(alpha: TaggedPartition) -> int:
    """Least ``n`` with ``2**-(n+1) <= mesh(alpha)``."""
    n = 0
    while dyadic(n + 1) > alpha.mesh:
        n += 1
    return n


DYADIC = CofinalSequence(dyadic_cofinal, dyadic_witness, monotone=True)


@dataclass(frozen=True)
class Integrand:
    """A function on [0, 1] with a uniform continuity modulus.

    ``omega(eps)`` is a ``delta`` such that ``|x - y| <= delta`` implies
    ``|f(x) - f(y)| <= eps``.  ``exact`` optionally evaluates at a rational
    point to an exact rational; sums then skip the CReal layer.
    """

    name: str
    eval: Callable[[CReal], CReal]
    omega: Callable[[Rational], Rational]
    exact: Optional[Callable[[Rational], Rational]] = None
    integral: Optional[Rational] = None


_HALF = mpq(1, 2)

REGISTRY: dict[str, Integrand] = {
    "const1": Integrand("const1", lambda x: creal_from_rational(1), lambda eps: mpq(1),
                        lambda q: mpq(1), mpq(1)),
    "linear": Integrand("linear", lambda x: x, lambda eps: eps, lambda q: q, mpq(1, 2)),
    "square": Integrand("square", lambda x: x * x, lambda eps: eps / 2, lambda q: q * q,
                        mpq(1, 3)),
    "absdev": Integrand("absdev", lambda x: abs(x - _HALF), lambda eps: eps,
                        lambda q: abs(q - _HALF), mpq(1, 4)),
}


def get_integrand(name: str) -> Integrand:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown function {name!r}; known: {', '.join(REGISTRY)}") from None


def riemann_sum(f: Integrand, W: TaggedPartition) -> CReal:
    """``sum f(xi) * (ti - t(i-1))``.

    With ``f.exact`` the sum is an exact rational.  Otherwise each term is
    read at precision ``n``; the cell lengths add up to 1, so the total error
    stays within ``2**-n``.
    """
    if f.exact is not None:
        if W.uniform is not None:
            return creal_from_rational(sum(map(f.exact, W.tags)) / W.uniform)
        if W.blocks is not None:
            total = mpq(0)
            for left, step, pieces, tag, home in W.blocks:
                values = sum(f.exact(left + step * i) for i in range(pieces) if i != home)
                total += step * (values + f.exact(tag))
            return creal_from_rational(total)
        total = mpq(0)
        for left, right, tag in W.cells():
            total += f.exact(tag) * (right - left)
        return creal_from_rational(total)

    terms = [(f.eval(creal_from_rational(tag)), right - left) for left, right, tag in W.cells()]
    return CReal(lambda n: sum((length * value.approx(n) for value, length in terms), mpq(0)))


def riemann_net(f: Integrand) -> Net:
    return Net(lambda W: riemann_sum(f, W))


def refinement_level(f: Integrand, eps: RationalLike) -> int:
    """Least ``n`` with ``2**-(n+1) <= omega(eps)``: sums over any partition
    finer than ``dyadic_cofinal(n)`` are within ``eps`` of the integral."""
    delta = f.omega(to_rational(eps))
    n = 0
    while dyadic(n + 1) > delta:
        n += 1
    return n


def riemann_modulus(f: Integrand) -> Callable[[Rational], int]:
    """Convergence modulus of ``n -> S(f, dyadic_cofinal(n))``, strict in ``eps``."""
    return lambda eps: refinement_level(f, to_rational(eps) / 2)


@functools.lru_cache(maxsize=None)
def integral(f: Integrand) -> CReal:
    """The integral of ``f`` over [0, 1] as a CReal.

    Precision ``q`` sums over the dyadic partition at level
    ``refinement_level(f, 2**-(q+1))`` and reads the sum at ``q + 1``.
    Precisions above the ceiling raise :class:`ResourceLimitError`.
    """

    def approx(q: int) -> Rational:
        ceiling = precision_ceiling()
        if q > ceiling:
            raise ResourceLimitError(f"precision {q} exceeds ceiling {ceiling}")
        level = refinement_level(f, dyadic(q + 1))
        return riemann_sum(f, dyadic_cofinal(level)).approx(q + 1)

    return CReal(approx)


def integrate(f: Integrand, p: int) -> CReal:
    """The integral of ``f``, checked to be readable at precision ``p``.

    The returned CReal is lazy and shared per integrand; ``approx(p)`` is
    within ``2**-p`` of the integral.
    """
    ceiling = precision_ceiling()
    if p > ceiling:
        raise ResourceLimitError(f"precision {p} exceeds ceiling {ceiling} (set {PRECISION_CEILING_ENV})")
    return integral(f)


def eps_for_mesh(f: Integrand, h: RationalLike, finest: int = 64) -> Rational:
    """Smallest dyadic ``eps`` (down to ``2**-finest``) with ``omega(eps) >= h``."""
    h = to_rational(h)
    j = -64
    while f.omega(dyadic(j)) < h:
        j += 1
        if j > finest:
            raise ValueError(f"omega never reaches mesh {h}")
    while j < finest and f.omega(dyadic(j + 1)) >= h:
        j += 1
    return dyadic(j)


def _random_unit(rng: random.Random, bits: int) -> Rational:
    return mpq(rng.randrange((1 << bits) + 1), 1 << bits)


def random_partition(rng: random.Random, max_mesh: RationalLike, *, strict: bool = True,
                     bits: int = 16) -> TaggedPartition:
    """Random cuts with every cell below ``max_mesh`` (at most, if not strict)
    and random tags, all with power-of-two denominators up to ``2**bits``."""
    h = to_rational(max_mesh)
    cuts = [mpq(0)]
    while (1 - cuts[-1] >= h) if strict else (1 - cuts[-1] > h):
        # step in [h/4, h), strictly below h
        u = mpq(rng.randrange(1 << (bits - 2), 1 << bits), 1 << bits)
        cuts.append(cuts[-1] + h * u)
    cuts.append(mpq(1))
    tags = [left + (right - left) * _random_unit(rng, bits) for left, right in zip(cuts, cuts[1:])]
    return TaggedPartition(cuts, tags, check=False)


def audit_modulus(f: Integrand, rng: random.Random, samples: int,
                  slack: RationalLike = dyadic(20)) -> list[tuple[Rational, Rational, Rational]]:
    """Sampled ``(x, y, eps)`` where ``|x - y| <= omega(eps)`` but
    ``|f(x) - f(y)| > eps + slack``; empty when the modulus holds."""
    slack = to_rational(slack)
    bad = []
    for _ in range(samples):
        eps = dyadic(rng.randrange(0, 21))
        delta = min(f.omega(eps), mpq(1))
        x = _random_unit(rng, 20)
        y = x + delta * (2 * _random_unit(rng, 20) - 1)
        y = min(max(y, mpq(0)), mpq(1))
        p = 24
        diff = abs(f.eval(creal_from_rational(x)) - f.eval(creal_from_rational(y))).approx(p)
        if diff > eps + slack + dyadic(p):
            bad.append((x, y, eps))
    return bad


@dataclass
class WeakProbeReport:
    trials: int
    depth: int
    max_deviation: Rational
    cauchy_violations: list[tuple[int, int, int]]
    integral_violations: list[tuple[int, int]]

    @property
    def consistent(self) -> bool:
        return not self.cauchy_violations and not self.integral_violations


def weak_integrability_probe(f: Integrand, seed: int, trials: int, depth: int,
                             tol: RationalLike) -> WeakProbeReport:
    """Sample sequences ``W_0..W_depth`` with ``mesh(W_n) < 2**-n``.

    Each sum carries the bound ``b_n = eps_for_mesh(f, mesh(W_n))``.  Pairs
    must satisfy ``|S_n - S_m| <= b_n + b_m + tol`` and each sum must lie
    within ``b_n + tol`` of the integral, the latter read at precision
    ``depth + 4``.  ``max_deviation`` is the largest ``|S_depth - I|``.
    """
    if depth < 2:
        raise ValueError("depth must be at least 2")
    tol = to_rational(tol)
    rng = random.Random(seed)
    p = depth + 4
    target = integral(f).approx(p)
    max_dev = mpq(0)
    cauchy, off = [], []
    for trial in range(trials):
        sums, bounds = [], []
        for n in range(depth + 1):
            W = random_partition(rng, dyadic(n))
            assert W.mesh < dyadic(n)
            sums.append(riemann_sum(f, W).approx(p))
            bounds.append(eps_for_mesh(f, W.mesh))
        for n in range(depth + 1):
            # the 2**-p terms cover the approximation error of sums and target
            if abs(sums[n] - target) > bounds[n] + tol + 2 * dyadic(p):
                off.append((trial, n))
            for m in range(n + 1, depth + 1):
                if abs(sums[n] - sums[m]) > bounds[n] + bounds[m] + tol + 2 * dyadic(p):
                    cauchy.append((trial, n, m))
        max_dev = max(max_dev, abs(sums[depth] - target))
    return WeakProbeReport(trials, depth, max_dev, cauchy, off)


# -- enumeration of rational partitions -------------------------------------

_HEX_TO_QUAD = {format(i, "x"): format(i // 4, "d") + format(i % 4, "d") for i in range(16)}


def _base3(t: int) -> str:
    if t == 0:
        return ""
    digits = []
    while t:
        t, r = divmod(t, 3)
        digits.append("012"[r])
    return "".join(reversed(digits))


def _encode_tokens(tokens: list[int]) -> int:
    # base-4 digits: 0-2 spell base-3 tokens, 3 separates, leading 1 is a marker
    return int("1" + "3".join(_base3(t) for t in tokens), 4)


def _decode_tokens(k: int) -> list[int]:
    if k < 0:
        raise ValueError("codes are natural numbers")
    quads = "".join(_HEX_TO_QUAD[c] for c in format(k, "x")).lstrip("0") or "0"
    return [int(tok, 3) if tok else 0 for tok in quads[1:].split("3")]


def _token_rational(p: int, q: int) -> Rational:
    return min(mpq(p, q + 1), mpq(1))


def encode_partition(W: TaggedPartition) -> int:
    """A code ``k`` with ``decode_partition(k) == W``."""
    interior = list(W.cuts)[1:-1]
    tokens = [len(interior)]
    for c in interior:
        tokens += [int(c.numerator), int(c.denominator) - 1]
    for left, right, tag in W.cells():
        lam = (tag - left) / (right - left)
        tokens += [int(lam.numerator), int(lam.denominator) - 1]
    return _encode_tokens(tokens)


def decode_partition(k: int) -> TaggedPartition:
    """Total, surjective reading of naturals as rational tagged partitions."""
    tokens = _decode_tokens(k)

    def tok(i: int) -> int:
        return tokens[i] if i < len(tokens) else 0

    j = min(tokens[0], (len(tokens) - 1) // 2)
    cuts = sorted({c for i in range(j) if 0 < (c := _token_rational(tok(1 + 2 * i), tok(2 + 2 * i))) < 1})
    cuts = [mpq(0)] + cuts + [mpq(1)]
    base = 1 + 2 * j
    tags = []
    for i, (left, right) in enumerate(zip(cuts, cuts[1:])):
        lam = _token_rational(tok(base + 2 * i), tok(base + 2 * i + 1))
        tags.append(left + lam * (right - left))
    return TaggedPartition(cuts, tags, check=False)


class _BlockSeq(Sequence):
    """Lazy cuts (after 0) or tags of a piecewise-uniform partition."""

    __slots__ = ("blocks", "starts", "kind")

    def __init__(self, blocks, kind: str):
        self.blocks = blocks
        self.kind = kind
        self.starts = list(itertools.accumulate((b[2] for b in blocks), initial=0))

    def __len__(self) -> int:
        return self.starts[-1] + (1 if self.kind == "cuts" else 0)

    def _item(self, block, i):
        left, step, pieces, tag, home = block
        if self.kind == "cuts":
            return left + step * (i + 1)
        return tag if i == home else left + step * i

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        if self.kind == "cuts":
            if i == 0:
                return mpq(0)
            i -= 1
        b = bisect.bisect_right(self.starts, i) - 1
        return self._item(self.blocks[b], i - self.starts[b])

    def __iter__(self):
        if self.kind == "cuts":
            yield mpq(0)
        for block in self.blocks:
            for i in range(block[2]):
                yield self._item(block, i)


def _refined(blocks) -> TaggedPartition:
    W = TaggedPartition(_BlockSeq(blocks, "cuts"), _BlockSeq(blocks, "tags"), check=False)
    W.blocks = blocks
    W._mesh = max(b[1] for b in blocks)
    return W


def refine_to_mesh(W: TaggedPartition, h: RationalLike) -> TaggedPartition:
    """Split every cell longer than ``h`` into equal pieces of length ``<= h``.

    The piece containing the old tag keeps it; other pieces are tagged at
    their left ends.  Returns ``W`` itself when it already fits; otherwise
    the result is stored lazily as one block per original cell.
    """
    h = to_rational(h)
    if W.mesh <= h:
        return W
    blocks = []
    for left, right, tag in W.cells():
        length = right - left
        pieces = max(1, math.ceil(length / h))
        step = length / pieces
        home = min(int((tag - left) / step), pieces - 1)
        blocks.append((left, step, pieces, tag, home))
    return _refined(blocks)


def enumerate_dominating(alpha: TaggedPartition, k: int) -> TaggedPartition:
    """The ``k``-th rational partition with mesh at most ``mesh(alpha)``."""
    return refine_to_mesh(decode_partition(k), alpha.mesh)


def riemann_separability(f: Integrand) -> SeparabilityWitness:
    """Separability witness for the Riemann net of ``f``.

    ``beta`` is the identity and ``F_alpha`` is every rational partition of
    mesh at most ``mesh(alpha)``.  For a target ``beta_prime`` fine enough
    that ``mesh(beta_prime) <= omega(eps/2)``, the dyadic partition at that
    mesh is returned (both sums lie within ``eps/2`` of the integral);
    otherwise ``beta_prime``'s own code.
    """

    def density_precision(alpha: TaggedPartition, beta_prime: TaggedPartition,
                          eps: RationalLike) -> int:
        delta = f.omega(to_rational(eps) / 2)
        if beta_prime.mesh <= delta:
            cells = 1
            while mpq(1, cells) > min(delta, alpha.mesh):
                cells *= 2
            canonical = TaggedPartition(
                [mpq(i, cells) for i in range(cells + 1)],
                [mpq(2 * i + 1, 2 * cells) for i in range(cells)],
                check=False,
            )
            return encode_partition(canonical)
        return encode_partition(beta_prime)

    return SeparabilityWitness(lambda alpha: alpha, enumerate_dominating, density_precision)
