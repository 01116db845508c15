"""Nets over directed sets and the machinery for extracting their limits.

Indices are arbitrary Python objects; a :class:`DirectedSet` supplies the
preorder and a join.  A net maps indices to CReals.  Convergence along
sequences that stay above a nondecreasing cofinal sequence ``z`` is turned
into a limit of the whole net, given a :class:`SeparabilityWitness`.

The proof-internal algorithms appear here with explicit budgets:
``search_A`` is the semi-decision "find an index above z(n) whose value is
not a touch point of V2", ``build_B`` the total companion, and
``capture_combinator`` the two-branch sequence ``K(m, n)``.
"""

from __future__ import annotations

import operator
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Optional, Sequence

from .exact import CReal, Rational, RationalLike, dyadic, to_rational
from .topology import (
    Ball,
    Classification,
    ContractViolation,
    classify,
    regular_chain,
)

Index = Any

__all__ = [
    "DirectedSet",
    "NATURALS",
    "FiniteDirectedSet",
    "CofinalSequence",
    "Net",
    "SeparabilityWitness",
    "ProbeResult",
    "CofinalReport",
    "Divergence",
    "BudgetedMap",
    "check_cofinal",
    "check_monotone",
    "is_regular_prefix",
    "build_B",
    "search_A",
    "capture_combinator",
    "net_limit",
    "Falsification",
    "RadiusReport",
    "NetLimitReport",
    "verify_net_limit",
    "EquivalenceReport",
    "classical_equivalence_probe",
]


@dataclass(frozen=True)
class DirectedSet:
    leq: Callable[[Index, Index], bool]
    join: Callable[[Index, Index], Index]
    name: str = "directed set"


NATURALS = DirectedSet(operator.le, max, "naturals")


class FiniteDirectedSet(DirectedSet):
    """A finite preorder given by its elements and a ``leq`` predicate.

    Joins are the first common upper bound in element order; construction
    fails if some pair has none.
    """

    def __init__(self, elements: Sequence[Hashable], leq: Callable[[Index, Index], bool],
                 name: str = "finite directed set"):
        elements = list(elements)
        table = {(a, b): bool(leq(a, b)) for a in elements for b in elements}
        for a in elements:
            if not table[a, a]:
                raise ValueError(f"leq is not reflexive at {a!r}")
        joins = {}
        for a in elements:
            for b in elements:
                upper = next((c for c in elements if table[a, c] and table[b, c]), None)
                if upper is None:
                    raise ValueError(f"no common upper bound for {a!r} and {b!r}")
                joins[a, b] = upper
        super().__init__(lambda a, b: table[a, b], lambda a, b: joins[a, b], name)
        object.__setattr__(self, "elements", tuple(elements))

    def tops(self) -> list[Hashable]:
        """Elements above every element (nonempty for a finite directed set)."""
        return [t for t in self.elements if all(self.leq(a, t) for a in self.elements)]


@dataclass(frozen=True)
class CofinalSequence:
    """``z(n)`` eventually dominates each index: ``alpha <= z(n)`` for all
    ``n >= witness(alpha)``."""

    z: Callable[[int], Index]
    witness: Callable[[Index], int]
    monotone: bool = False

    def __call__(self, n: int) -> Index:
        return self.z(n)


@dataclass(frozen=True)
class Net:
    eval: Callable[[Index], CReal]


@dataclass(frozen=True)
class SeparabilityWitness:
    """Above each ``alpha``: an index ``beta(alpha) >= alpha`` and an
    enumerated set ``F_alpha`` of indices ``>= alpha`` whose net values are
    dense among the values at indices ``>= beta(alpha)``.

    ``density_precision(alpha, beta_prime, eps)`` returns ``k`` with
    ``|f(enumerate(alpha, k)) - f(beta_prime)| <= eps``.
    """

    beta: Callable[[Index], Index]
    enumerate: Callable[[Index, int], Index]
    density_precision: Callable[[Index, Index, Rational], int]


@dataclass(frozen=True)
class ProbeResult:
    probe: Index
    ok: bool
    failed_at: Optional[int] = None


@dataclass
class CofinalReport:
    results: list[ProbeResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def failures(self) -> list[tuple[Index, int]]:
        return [(r.probe, r.failed_at) for r in self.results if not r.ok]


class CofinalityError(AssertionError):
    pass


def check_cofinal(d: DirectedSet, c: CofinalSequence, probes: Iterable[Index],
                  budget: int = 16, strict: bool = False) -> CofinalReport:
    """Check ``alpha <= z(n)`` for ``witness(alpha) <= n <= witness(alpha) + budget``.

    With ``strict`` the first violation raises :class:`CofinalityError`
    naming ``(alpha, n)``.
    """
    results = []
    for alpha in probes:
        start = c.witness(alpha)
        bad = next((n for n in range(start, start + budget + 1) if not d.leq(alpha, c.z(n))), None)
        if bad is not None and strict:
            raise CofinalityError(f"cofinality fails at probe {alpha!r}, n={bad}")
        results.append(ProbeResult(alpha, bad is None, bad))
    return CofinalReport(results)


def check_monotone(d: DirectedSet, c: CofinalSequence, up_to: int) -> Optional[int]:
    """First ``n < up_to`` with ``z(n) </= z(n+1)``, or None."""
    return next((n for n in range(up_to) if not d.leq(c.z(n), c.z(n + 1))), None)


def is_regular_prefix(d: DirectedSet, z: CofinalSequence, x: Callable[[int], Index],
                      up_to: int) -> bool:
    if up_to < 1:
        raise ValueError("up_to must be at least 1")
    return all(d.leq(z(n), x(n)) for n in range(up_to))


def build_B(w: SeparabilityWitness, d: DirectedSet, z: CofinalSequence) -> Callable[[int], Index]:
    """Total map ``n -> join(z(n), beta(z(n)))``."""

    def B(n: int) -> Index:
        alpha = z(n)
        return d.join(alpha, w.beta(alpha))

    return B


def search_A(w: SeparabilityWitness, net: Net, n: int, z: CofinalSequence,
             pair, budget: int, d: Optional[DirectedSet] = None) -> Optional[Index]:
    """First ``gamma`` among ``enumerate(z(n), k)``, ``k < budget``, whose value
    is classified outside ``pair.inner``; None if the budget runs out.

    Passing ``d`` also checks that each enumerated index dominates ``z(n)``.
    """
    alpha = z(n)
    for k in range(budget):
        gamma = w.enumerate(alpha, k)
        if d is not None and not d.leq(alpha, gamma):
            raise ContractViolation(f"enumerate({alpha!r}, {k}) does not dominate its base")
        if not classify(pair, net.eval(gamma)).in_outer:
            return gamma
    return None


class Divergence(Exception):
    """``K(m, n)`` selected ``A(n)`` but ``A`` has no value at ``n``."""

    def __init__(self, m: int, n: int):
        super().__init__(f"K({m}, {n}) diverges: S({m}) = {n} but A({n}) is undefined")
        self.m = m
        self.n = n


class BudgetedMap:
    """A partial map ``N -> N`` evaluated with a step budget.

    ``program(m)`` is an iterator that yields None while still running and
    an int once it halts.  Calling the map runs at most ``budget`` steps and
    returns the value, or None for "no value within budget".
    """

    def __init__(self, program: Callable[[int], Iterator[Optional[int]]], budget: int):
        self.program = program
        self.budget = budget

    def __call__(self, m: int) -> Optional[int]:
        steps = self.program(m)
        for _ in range(self.budget):
            try:
                out = next(steps)
            except StopIteration:
                return None
            if out is not None:
                return out
        return None


def capture_combinator(S: Callable[[int], Optional[int]], A: Callable[[int], Optional[Index]],
                       z: CofinalSequence, k: int) -> Callable[[int, int], Index]:
    """``K(m, n) = A(n)`` if ``S(m)`` evaluates to ``n``, else ``z(n + k)``.

    Raises :class:`Divergence` when the first branch is taken and ``A(n)``
    is None.
    """

    def K(m: int, n: int) -> Index:
        if S(m) == n:
            value = A(n)
            if value is None:
                raise Divergence(m, n)
            return value
        return z(n + k)

    return K


def net_limit(d: DirectedSet, z: CofinalSequence, net: Net,
              seq_modulus: Callable[[Rational], int]) -> CReal:
    """The limit of ``n -> net.eval(z(n))`` as a CReal.

    ``seq_modulus(eps)`` must give ``N`` with ``|f(z(n)) - limit| < eps``
    for ``n >= N``; precision ``p`` reads term ``seq_modulus(2**-(p+1))``
    at precision ``p + 1``.
    """

    def approx(p: int) -> Rational:
        N = seq_modulus(dyadic(p + 1))
        return net.eval(z(N)).approx(p + 1)

    return CReal(approx)


@dataclass(frozen=True)
class Falsification:
    radius: Rational
    n: int
    beta: Index
    classification: Classification
    strategy: str


@dataclass
class RadiusReport:
    radius: Rational
    offset: int
    trials: int
    falsifications: list[Falsification] = field(default_factory=list)
    search_hits: list[tuple[int, Index]] = field(default_factory=list)
    searched: int = 0


@dataclass
class NetLimitReport:
    radii: list[RadiusReport]

    @property
    def falsifications(self) -> list[Falsification]:
        return [f for r in self.radii for f in r.falsifications]

    @property
    def ok(self) -> bool:
        return not self.falsifications


_STRATEGIES = ("z-tail", "enumerated", "mixed")


def verify_net_limit(d: DirectedSet, z: CofinalSequence, net: Net, w: SeparabilityWitness,
                     zeta: CReal, radii: Iterable[RationalLike], seed: int, trials: int,
                     seq_modulus: Callable[[Rational], int], *, spread: int = 2,
                     tail: int = 2, code_bits: int = 256, search_budget: int = 4) -> NetLimitReport:
    """Falsification search for ``zeta`` being the limit of ``net``.

    For each radius ``r`` the chain ``<U,V1>, <V1,V2>, <V2,V3>`` is built
    around ``zeta`` and ``offset = seq_modulus(r/8)`` places ``f(z(n))`` in
    ``V3`` for ``n >= offset``.  Each trial draws ``n`` in
    ``[offset, offset + spread)`` and an index ``beta >= B(n)`` by joining
    ``B(n)`` with a z-tail element, an enumerated element of ``F_{z(n)}``
    (random code of up to ``code_bits`` bits), or both.  A ``beta`` whose
    value is classified outside ``V1`` is a falsification.  ``search_A``
    against ``<V1, V2>`` runs once per radius at ``n = offset`` as a
    diagnostic.
    """
    rng = random.Random(seed)
    B = build_B(w, d, z)
    reports = []
    for r in radii:
        r = to_rational(r)
        outer_pair, middle_pair, last_pair = regular_chain(Ball(zeta, r), 3)
        offset = seq_modulus(last_pair.inner.radius)
        report = RadiusReport(r, offset, trials)
        for _ in range(trials):
            n = offset + rng.randrange(spread)
            strategy = _STRATEGIES[rng.randrange(3)]
            beta = B(n)
            if strategy in ("enumerated", "mixed"):
                code = rng.getrandbits(rng.randrange(1, code_bits + 1))
                beta = d.join(beta, w.enumerate(z(n), code))
            if strategy in ("z-tail", "mixed"):
                beta = d.join(beta, z(n + rng.randrange(tail)))
            verdict = classify(outer_pair, net.eval(beta))
            if not verdict.in_outer:
                report.falsifications.append(Falsification(r, n, beta, verdict, strategy))
        if search_budget > 0:
            report.searched = search_budget
            hit = search_A(w, net, offset, z, middle_pair, search_budget, d)
            if hit is not None:
                report.search_hits.append((offset, hit))
        reports.append(report)
    return NetLimitReport(reports)


@dataclass
class EquivalenceReport:
    net_converges: bool
    net_limit: Optional[Rational]
    sequences: int
    sequence_limits: list[Optional[Rational]]

    @property
    def sequences_agree(self) -> bool:
        limits = set(self.sequence_limits)
        return None not in limits and len(limits) == 1

    @property
    def agree(self) -> bool:
        if self.net_converges != self.sequences_agree:
            return False
        return not self.net_converges or self.sequence_limits[0] == self.net_limit


def _exact_value(net: Net, index: Index) -> Rational:
    value = net.eval(index)
    if value.exact is None:
        raise ValueError("the equivalence probe needs exactly known net values")
    return value.exact


def classical_equivalence_probe(d: FiniteDirectedSet, net: Net, trials: int,
                                seed: int = 0, prefix: int = 6) -> EquivalenceReport:
    """Compare net convergence with convergence along sampled cofinal sequences.

    On a finite directed set the net converges iff it is constant on the
    top class.  Sampled sequences are eventually periodic: a random prefix,
    then a random cycle through top elements.  One extra sequence cycles
    through the whole top class.
    """
    rng = random.Random(seed)
    tops = d.tops()
    if not tops:
        raise ValueError("finite directed set has no top element")
    top_values = {_exact_value(net, t) for t in tops}
    converges = len(top_values) == 1
    limit = next(iter(top_values)) if converges else None

    cycles = [list(tops)]
    prefixes = [[]]
    for _ in range(trials):
        prefixes.append([rng.choice(d.elements) for _ in range(rng.randrange(prefix + 1))])
        cycles.append([rng.choice(tops) for _ in range(rng.randrange(1, len(tops) + 2))])

    limits = []
    for head, cycle in zip(prefixes, cycles):
        seq = CofinalSequence(
            z=lambda n, head=head, cycle=cycle: head[n] if n < len(head) else cycle[(n - len(head)) % len(cycle)],
            witness=lambda alpha, head=head: len(head),
        )
        check_cofinal(d, seq, d.elements, budget=len(cycle), strict=True)
        values = {_exact_value(net, c) for c in cycle}
        limits.append(next(iter(values)) if len(values) == 1 else None)
    return EquivalenceReport(converges, limit, len(limits), limits)
