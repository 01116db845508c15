"""Acceptance criteria at their stated sizes and tolerances.

Each test records one pass/fail line, printed in the pytest terminal summary.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction

from sepnets.cli import main
from sepnets.exact import creal_from_rational, dyadic
from sepnets.nets import capture_combinator, is_regular_prefix, verify_net_limit
from sepnets.properties import (
    convergent_family,
    random_capture_config,
    random_composition,
    random_point,
    random_rational,
    regular_candidate,
)
from sepnets.riemann import (
    DYADIC,
    PARTITIONS,
    REGISTRY,
    integral,
    integrate,
    riemann_modulus,
    riemann_net,
    riemann_separability,
)
from sepnets.topology import Ball, RegularPair, Side, classify, decide_convergent

ORACLES = {"const1": Fraction(1), "linear": Fraction(1, 2), "square": Fraction(1, 3), "absdev": Fraction(1, 4)}


def test_integrator_accuracy(criterion):
    integral.cache_clear()  # time a cold start, not values warmed by earlier tests
    start = time.perf_counter()
    worst = []
    for name, oracle in ORACLES.items():
        for p in (4, 8, 12, 16, 20):
            err = abs(integrate(REGISTRY[name], p).approx(p) - oracle)
            if err > Fraction(2, 2 ** p):
                worst.append((name, p, err))
    elapsed = time.perf_counter() - start
    criterion("1 integrator accuracy", not worst and elapsed < 60,
              f"{len(worst)} rows over 2^-p+1, {elapsed:.1f}s")


def test_mesh_regularity_bridge(criterion):
    rng = random.Random(2)
    accepted = violations = 0
    while accepted < 1000:
        xs = regular_candidate(rng, 20)
        if not is_regular_prefix(PARTITIONS, DYADIC, xs.__getitem__, 21):
            continue
        accepted += 1
        violations += any(not W.mesh < dyadic(n) for n, W in enumerate(xs))
    criterion("2 mesh-regularity bridge", violations == 0, f"{accepted} sequences, {violations} violations")


def test_regular_pair_totality(criterion):
    rng = random.Random(3)
    violations = 0
    for _ in range(10_000):
        c = random_rational(rng)
        R = abs(random_rational(rng, span=2)) + Fraction(1, 1024)
        r = R * Fraction(rng.randrange(1, 1024), 1024)
        center = random_point(rng, c)
        q = c + (2 * Fraction(rng.randrange(1025), 1024) - 1) * 2 * R
        verdict = classify(RegularPair(Ball(center, R), Ball(center, r)), random_point(rng, q))
        d = abs(q - c)
        violations += not (d < R if verdict.side is Side.IN_OUTER else d > r)
    criterion("3 regular-pair totality and soundness", violations == 0, f"10000 cases, {violations} violations")


def test_decide_convergent(criterion):
    rng = random.Random(4)
    violations = 0
    for _ in range(100):
        seq, modulus, L = convergent_family(rng)
        limit = creal_from_rational(L)
        R = Fraction(rng.randrange(1, 64), 16)
        r = R * Fraction(rng.randrange(1, 16), 16)
        verdict = decide_convergent(lambda n: creal_from_rational(seq(n)), modulus, limit,
                                    RegularPair(Ball(limit, R), Ball(limit, r)))
        N = modulus(r / 2)
        if verdict.side is Side.IN_OUTER:
            violations += any(not abs(seq(n) - L) < R for n in range(N + 1))
        else:
            m = verdict.witness
            violations += not (m is not None and m <= N and abs(seq(m) - L) > r)
    criterion("4 decide_convergent certificates", violations == 0, f"100 sequences, {violations} violations")


def test_net_limit_end_to_end(criterion):
    radii = [Fraction(1, 4), Fraction(1, 32), Fraction(1, 256)]
    found = 0
    for f in REGISTRY.values():
        zeta = integrate(f, 20)
        for seed in (1, 2, 3):
            report = verify_net_limit(PARTITIONS, DYADIC, riemann_net(f), riemann_separability(f), zeta,
                                      radii, seed, 100, riemann_modulus(f))
            found += len(report.falsifications)
    control = main(["verify-net", "--fn", "linear", "--seed", "1", "--zeta-override", "5/8", "--trials", "10"])
    criterion("5 net limit end to end", found == 0 and control == 4,
              f"{found} falsifications at the integral, wrong-zeta control exit {control}")


def test_capture_combinator(criterion):
    rng = random.Random(6)
    bad = 0
    for case in range(100):
        S, A, z, d, k = random_capture_config(rng, "naturals" if case % 2 == 0 else "partitions")
        K = capture_combinator(S, A, z, k)
        bad += any(not is_regular_prefix(d, z, lambda n: K(m, n), 50) for m in range(10))
    criterion("6 capture_combinator regularity", bad == 0, f"100 configurations, {bad} irregular")


def test_creal_regularity_audit(criterion):
    rng = random.Random(7)
    violations = 0
    for _ in range(10_000):
        x, _value = random_composition(rng, rng.randrange(1, 4))
        for _ in range(4):
            m, n = rng.randrange(31), rng.randrange(31)
            violations += abs(x.approx(m) - x.approx(n)) > dyadic(m) + dyadic(n)
    criterion("7 CReal regularity audit", violations == 0, f"10000 compositions, {violations} violations")


def test_property_suite_reproducible(criterion):
    cmd = [sys.executable, "-m", "sepnets", "property-suite", "--seed", "1"]
    first = subprocess.run(cmd, capture_output=True)
    second = subprocess.run(cmd, capture_output=True)
    same = first.stdout == second.stdout and first.stdout != b""
    criterion("8 property-suite reproducibility", same and first.returncode == 0,
              f"byte-identical={same}, exit {first.returncode}")
