"""Seeded property checks over every module, plus the random generators
they share with the test suite.

Each check takes a ``random.Random`` and a sample count and returns a
:class:`PropertyResult`; certificates are always verified by exact rational
comparison against values known by construction.
"""

from __future__ import annotations

import inspect
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from gmpy2 import mpq

from .exact import CReal, Rational, BranchTag, arith, compare_within, creal_from_rational, dyadic
from .nets import (
    NATURALS,
    BudgetedMap,
    CofinalSequence,
    FiniteDirectedSet,
    Net,
    capture_combinator,
    check_cofinal,
    check_monotone,
    classical_equivalence_probe,
    is_regular_prefix,
    net_limit,
    verify_net_limit,
)
from .riemann import (
    DYADIC,
    PARTITIONS,
    REGISTRY,
    TaggedPartition,
    audit_modulus,
    decode_partition,
    dyadic_cofinal,
    enumerate_dominating,
    integrate,
    random_partition,
    refine_to_mesh,
    riemann_modulus,
    riemann_net,
    riemann_separability,
    riemann_sum,
    weak_integrability_probe,
)
from .topology import Ball, RegularPair, Side, classify, decide_convergent


@dataclass(frozen=True)
class PropertyResult:
    name: str
    cases: int
    violations: int
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.violations == 0


# -- generators ---------------------------------------------------------------

def random_rational(rng: random.Random, span: int = 4, bits: int = 12) -> Rational:
    den = rng.randrange(1, (1 << bits) + 1)
    return mpq(rng.randrange(-span * den, span * den + 1), den)


def jittered(q: Rational, salt: str) -> CReal:
    """A non-exact CReal for ``q``: ``approx(n)`` is off by up to ``2**-n``."""

    def approx(n: int) -> Rational:
        k = random.Random(f"{salt}:{n}").randrange(-256, 257)
        return q + mpq(k, 1 << (n + 8))

    return CReal(approx)


SQRT2 = CReal(lambda n: mpq(math.isqrt(2 << (2 * n)), 1 << n))


def random_point(rng: random.Random, q: Rational) -> CReal:
    if rng.random() < 0.5:
        return creal_from_rational(q)
    return jittered(q, f"pt{rng.getrandbits(32)}")


_OPS = ("add", "sub", "mul", "neg", "abs", "min", "max")


def _apply_exact(op: str, a: Rational, b: Optional[Rational]) -> Rational:
    return {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "mul": lambda: a * b,
        "neg": lambda: -a,
        "abs": lambda: abs(a),
        "min": lambda: min(a, b),
        "max": lambda: max(a, b),
    }[op]()


def random_composition(rng: random.Random, depth: int = 3) -> tuple[CReal, Optional[Rational]]:
    """A random arithmetic tree and its exact value (None if it uses sqrt 2)."""
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.1:
            return SQRT2, None
        q = random_rational(rng)
        if roll < 0.5:
            return creal_from_rational(q), q
        return jittered(q, f"leaf{rng.getrandbits(32)}"), q
    op = rng.choice(_OPS)
    x, a = random_composition(rng, depth - 1)
    if op in ("neg", "abs"):
        return arith(op, x), None if a is None else _apply_exact(op, a, None)
    y, b = random_composition(rng, depth - 1)
    value = None if a is None or b is None else _apply_exact(op, a, b)
    return arith(op, x, y), value


def random_finite_directed_set(rng: random.Random, size: int, tied_tops: int = 0) -> FiniteDirectedSet:
    """Random DAG closure on the lower elements plus ``tied_tops + 1``
    mutually equivalent top elements."""
    tops = set(range(size - tied_tops - 1, size))
    lower = [i for i in range(size) if i not in tops]
    reach = {i: set() for i in range(size)}
    for i in reversed(lower):
        for j in lower:
            if j > i and rng.random() < 0.2:
                reach[i] |= {j} | reach[j]
    return FiniteDirectedSet(range(size), lambda a, b: a == b or b in tops or b in reach[a])


# -- checks -------------------------------------------------------------------

def _result(name, cases, failures):
    return PropertyResult(name, cases, len(failures), failures[0] if failures else "")


def prop_creal_regularity(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    for case in range(samples):
        x, value = random_composition(rng, rng.randrange(1, 4))
        for _ in range(4):
            m, n = rng.randrange(31), rng.randrange(31)
            if abs(x.approx(m) - x.approx(n)) > dyadic(m) + dyadic(n):
                failures.append(f"case {case}: m={m} n={n}")
            if value is not None and abs(x.approx(n) - value) > dyadic(n):
                failures.append(f"case {case}: n={n} off exact value")
    return _result("creal-regularity", samples, failures)


def prop_comparison_soundness(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    for case in range(samples):
        q = random_rational(rng)
        a = random_rational(rng)
        b = a + abs(random_rational(rng, span=1)) + mpq(1, 1 << 12)
        branch = compare_within(random_point(rng, q), a, b)
        holds = q < b if branch.tag is BranchTag.BELOW_UPPER else q > a
        if not holds:
            failures.append(f"case {case}: q={q} a={a} b={b} -> {branch.tag.value}")
    return _result("comparison-soundness", samples, failures)


def prop_regular_pair_totality(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    for case in range(samples):
        c = random_rational(rng)
        R = abs(random_rational(rng, span=2)) + mpq(1, 1 << 10)
        r = R * mpq(rng.randrange(1, 1024), 1024)
        center = random_point(rng, c)
        pair = RegularPair(Ball(center, R), Ball(center, r))
        q = c + (2 * mpq(rng.randrange(1025), 1024) - 1) * 2 * R
        verdict = classify(pair, random_point(rng, q))
        d = abs(q - c)
        holds = d < R if verdict.side is Side.IN_OUTER else d > r
        if not holds:
            failures.append(f"case {case}: c={c} R={R} r={r} x={q} -> {verdict.side.value}")
    return _result("regular-pair-totality", samples, failures)


def convergent_family(rng: random.Random) -> tuple[Callable[[int], Rational], Callable[[Rational], int], Rational]:
    """A rational sequence, a modulus of convergence for it, and its limit."""
    L = random_rational(rng)
    A = random_rational(rng, span=2)
    kind = rng.randrange(3)
    if kind == 0:
        def seq(n): return L + A * dyadic(n)

        def modulus(eps):
            N = 0
            while abs(A) * dyadic(N) >= eps:
                N += 1
            return N
    elif kind == 1:
        def seq(n): return L + A / (n + 1)

        def modulus(eps):
            return int(abs(A) / eps)  # |A|/(N+1) < eps
    else:
        head = [L + random_rational(rng) for _ in range(rng.randrange(1, 8))]

        def seq(n): return head[n] if n < len(head) else L

        def modulus(eps):
            return len(head)
    return seq, modulus, L


def prop_decide_convergent(rng: random.Random, samples: int, audit: int = 20) -> PropertyResult:
    failures = []
    for case in range(samples):
        seq, modulus, L = convergent_family(rng)
        limit = creal_from_rational(L)
        R = mpq(rng.randrange(1, 64), 16)
        r = R * mpq(rng.randrange(1, 16), 16)
        pair = RegularPair(Ball(limit, R), Ball(limit, r))
        verdict = decide_convergent(lambda n: creal_from_rational(seq(n)), modulus, limit, pair, audit=audit)
        N = modulus(r / 2)
        if verdict.side is Side.IN_OUTER:
            bad = [n for n in range(N + 1 + audit) if not abs(seq(n) - L) < R]
            if bad:
                failures.append(f"case {case}: InOuter but term {bad[0]} outside U")
        else:
            m = verdict.witness
            if m is None or m > N or not abs(seq(m) - L) > r:
                failures.append(f"case {case}: bad NotTouchInner witness {m}")
    return _result("decide-convergent", samples, failures)


def random_coarse_partition(rng: random.Random) -> TaggedPartition:
    if rng.random() < 0.5:
        return decode_partition(rng.getrandbits(rng.randrange(1, 200)))
    return random_partition(rng, mpq(1, rng.randrange(1, 9)), strict=False)


def regular_candidate(rng: random.Random, depth: int) -> list[TaggedPartition]:
    """Partitions ``x(0..depth)`` near the dyadic meshes; some overshoot."""
    xs = []
    for n in range(depth + 1):
        # mostly at or below 2**-(n+1); occasionally up to 1.25 times it
        top = 320 if rng.random() < 0.03 else 256
        scale = mpq(rng.randrange(1, top + 1), 256)
        xs.append(refine_to_mesh(random_coarse_partition(rng), dyadic(n + 1) * scale))
    return xs


def prop_mesh_regularity(rng: random.Random, samples: int, depth: int = 20) -> PropertyResult:
    failures = []
    accepted = attempts = 0
    while accepted < samples and attempts < 50 * samples:
        attempts += 1
        xs = regular_candidate(rng, depth)
        if not is_regular_prefix(PARTITIONS, DYADIC, xs.__getitem__, depth + 1):
            continue
        accepted += 1
        bad = [n for n, W in enumerate(xs) if not W.mesh < dyadic(n)]
        if bad:
            failures.append(f"sequence {accepted}: mesh(x({bad[0]})) >= 2^-{bad[0]}")
    if accepted < samples:
        failures.append(f"only {accepted} regular sequences in {attempts} attempts")
    return _result("mesh-regularity", accepted, failures)


def _halting_program(halt_after: Optional[int], value: int) -> Callable[[int], Iterator[Optional[int]]]:
    def program(m):
        steps = 0
        while halt_after is None or steps < halt_after:
            steps += 1
            yield None
        yield value
    return program


def random_capture_config(rng: random.Random, ambient: str):
    """Toy ``(S, A, z, d, k)`` for the capture combinator."""
    table = {}
    for m in range(20):
        halt = None if rng.random() < 0.3 else rng.randrange(0, 30)
        table[m] = (halt, rng.randrange(0, 60))
    S = BudgetedMap(lambda m: _halting_program(*table.get(m, (None, 0)))(m), budget=rng.randrange(5, 40))
    k = rng.randrange(0, 5)
    if ambient == "naturals":
        step, start = rng.randrange(1, 4), rng.randrange(0, 5)
        z = CofinalSequence(lambda n: start + step * n, lambda a: max(0, -(-(a - start) // step)), monotone=True)
        lifts = [rng.randrange(0, 10) for _ in range(64)]
        return S, (lambda n: z(n) + lifts[n % 64]), z, NATURALS, k
    codes = [rng.getrandbits(rng.randrange(1, 120)) for _ in range(64)]
    return S, (lambda n: enumerate_dominating(dyadic_cofinal(n), codes[n % 64])), DYADIC, PARTITIONS, k


def prop_capture_regularity(rng: random.Random, samples: int, up_to: int = 50) -> PropertyResult:
    failures = []
    for case in range(samples):
        ambient = "naturals" if case % 2 == 0 else "partitions"
        S, A, z, d, k = random_capture_config(rng, ambient)
        K = capture_combinator(S, A, z, k)
        for m in range(10):
            if not is_regular_prefix(d, z, lambda n: K(m, n), up_to):
                failures.append(f"case {case} ({ambient}): K({m}, .) not regular")
    return _result("capture-regularity", samples, failures)


def prop_cofinal_dyadic(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    probes = [random_coarse_partition(rng) for _ in range(samples)]
    report = check_cofinal(PARTITIONS, DYADIC, probes, budget=8)
    failures += [f"probe {p!r} fails at n={n}" for p, n in report.failures]
    bad = check_monotone(PARTITIONS, DYADIC, 40)
    if bad is not None:
        failures.append(f"dyadic sequence not monotone at {bad}")
    return _result("cofinal-dyadic", samples, failures)


def prop_join_contract(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    leq, join = PARTITIONS.leq, PARTITIONS.join
    for case in range(samples):
        a, b, c = (random_coarse_partition(rng) for _ in range(3))
        j = join(a, b)
        if not (leq(a, j) and leq(b, j) and leq(a, a)):
            failures.append(f"case {case}: join does not dominate")
        if leq(a, b) and leq(b, c) and not leq(a, c):
            failures.append(f"case {case}: leq not transitive")
    return _result("join-contract", samples, failures)


def prop_modulus_audit(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    for name, f in REGISTRY.items():
        failures += [f"{name}: x={x} y={y} eps={e}" for x, y, e in audit_modulus(f, rng, samples)]
    return _result("modulus-audit", samples * len(REGISTRY), failures)


def prop_sum_stability(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    fns = list(REGISTRY.values())
    for case in range(samples):
        f = fns[case % len(fns)]
        eps = dyadic(rng.randrange(2, 9))
        h = f.omega(eps)
        W, W2 = random_partition(rng, h, strict=False), random_partition(rng, h, strict=False)
        diff = abs(riemann_sum(f, W).exact - riemann_sum(f, W2).exact)
        if diff > 2 * eps:
            failures.append(f"case {case} {f.name}: |S - S'| = {diff} > 2*{eps}")
    return _result("sum-stability", samples, failures)


def retag(rng: random.Random, W: TaggedPartition) -> TaggedPartition:
    tags = [left + (right - left) * mpq(rng.randrange(257), 256) for left, right, _ in W.cells()]
    return TaggedPartition(tuple(W.cuts), tags, check=False)


def prop_tag_independence(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    fns = list(REGISTRY.values())
    for case in range(samples):
        f = fns[case % len(fns)]
        eps = dyadic(rng.randrange(2, 9))
        W = random_partition(rng, f.omega(eps), strict=False)
        diff = abs(riemann_sum(f, W).exact - riemann_sum(f, retag(rng, W)).exact)
        if diff > eps:
            failures.append(f"case {case} {f.name}: retagging moved the sum by {diff}")
    return _result("tag-independence", samples, failures)


def prop_separability_clauses(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    fns = list(REGISTRY.values())
    for case in range(samples):
        f = fns[case % len(fns)]
        w = riemann_separability(f)
        alpha = dyadic_cofinal(rng.randrange(0, 6)) if rng.random() < 0.5 else random_coarse_partition(rng)
        for _ in range(3):
            gamma = w.enumerate(alpha, rng.getrandbits(rng.randrange(1, 160)))
            if not PARTITIONS.leq(alpha, gamma):
                failures.append(f"case {case}: enumerated index below alpha")
        beta_prime = random_partition(rng, w.beta(alpha).mesh, strict=False)
        eps = dyadic(rng.randrange(1, 12))
        gamma = w.enumerate(alpha, w.density_precision(alpha, beta_prime, eps))
        diff = abs(riemann_sum(f, gamma).exact - riemann_sum(f, beta_prime).exact)
        if diff > eps:
            failures.append(f"case {case} {f.name}: density gap {diff} > {eps}")
    return _result("separability-clauses", samples, failures)


def prop_weak_integrability(rng: random.Random, samples: int, depth: int = 8,
                            tol: Rational = dyadic(16)) -> PropertyResult:
    failures = []
    for name, f in REGISTRY.items():
        report = weak_integrability_probe(f, rng.getrandbits(64), samples, depth=depth, tol=tol)
        if not report.consistent:
            failures.append(f"{name}: {len(report.cauchy_violations)} Cauchy, "
                            f"{len(report.integral_violations)} integral violations")
    return _result("weak-integrability", samples * len(REGISTRY), failures)


def prop_classical_equivalence(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    for case in range(samples):
        size = rng.randrange(1, 21)
        tied = rng.randrange(0, min(3, size))
        d = random_finite_directed_set(rng, size, tied)
        base = random_rational(rng)
        values = {e: (base if e in d.tops() and rng.random() < 0.5 else random_rational(rng))
                  for e in d.elements}
        net = Net(lambda e: creal_from_rational(values[e]))
        report = classical_equivalence_probe(d, net, trials=10, seed=rng.getrandbits(32))
        if not report.agree:
            failures.append(f"case {case}: net converges={report.net_converges}, "
                            f"sequences agree={report.sequences_agree}")
    return _result("classical-equivalence", samples, failures)


def prop_net_limit_regularity(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    for name, f in REGISTRY.items():
        zeta = net_limit(PARTITIONS, DYADIC, riemann_net(f), riemann_modulus(f))
        for _ in range(samples):
            m, n = rng.randrange(13), rng.randrange(13)
            if abs(zeta.approx(m) - zeta.approx(n)) > dyadic(m) + dyadic(n):
                failures.append(f"{name}: m={m} n={n}")
            if abs(zeta.approx(n) - f.integral) > dyadic(n):
                failures.append(f"{name}: approx({n}) off the integral")
    return _result("net-limit-regularity", samples * len(REGISTRY), failures)


def prop_verify_net(rng: random.Random, samples: int) -> PropertyResult:
    failures = []
    radii = [mpq(1, 4), mpq(1, 32)]
    for name, f in REGISTRY.items():
        args = (PARTITIONS, DYADIC, riemann_net(f), riemann_separability(f))
        seed = rng.getrandbits(32)
        report = verify_net_limit(*args, integrate(f, 20), radii, seed, samples, riemann_modulus(f))
        if not report.ok:
            failures.append(f"{name}: {len(report.falsifications)} falsifications at the true limit")
        control = verify_net_limit(*args, creal_from_rational(f.integral + 1), radii[:1], seed,
                                   samples, riemann_modulus(f))
        if control.ok:
            failures.append(f"{name}: wrong limit not falsified")
    return _result("verify-net", samples * len(REGISTRY), failures)


PROPERTIES: dict[str, tuple[Callable[[random.Random, int], PropertyResult], int]] = {
    "creal-regularity": (prop_creal_regularity, 1000),
    "comparison-soundness": (prop_comparison_soundness, 2000),
    "regular-pair-totality": (prop_regular_pair_totality, 2000),
    "decide-convergent": (prop_decide_convergent, 100),
    "mesh-regularity": (prop_mesh_regularity, 200),
    "capture-regularity": (prop_capture_regularity, 20),
    "cofinal-dyadic": (prop_cofinal_dyadic, 50),
    "join-contract": (prop_join_contract, 200),
    "modulus-audit": (prop_modulus_audit, 200),
    "sum-stability": (prop_sum_stability, 40),
    "tag-independence": (prop_tag_independence, 40),
    "separability-clauses": (prop_separability_clauses, 20),
    "weak-integrability": (prop_weak_integrability, 2),
    "classical-equivalence": (prop_classical_equivalence, 50),
    "net-limit-regularity": (prop_net_limit_regularity, 20),
    "verify-net": (prop_verify_net, 10),
}


def run_property(name: str, seed: int, samples: Optional[int] = None, **options) -> PropertyResult:
    """Run one check with its own seeded generator.

    ``options`` (``depth``, ``tol``) reach only the checks that take them.
    """
    check, default = PROPERTIES[name]
    accepted = inspect.signature(check).parameters
    rng = random.Random(f"{seed}:{name}")
    kwargs = {k: v for k, v in options.items() if k in accepted}
    return check(rng, default if samples is None else samples, **kwargs)
