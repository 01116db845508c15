"""Command line entry point: ``sepnets <command> [flags]``.

Exit codes: 0 success, 1 an integration row failed its bound, 2 usage
error or unknown function, 3 precision above the resource ceiling,
4 falsification found by ``verify-net``, 5 failing property.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import Optional

from gmpy2 import mpq

from .exact import creal_from_rational, dyadic, to_rational
from .nets import verify_net_limit
from .properties import PROPERTIES, run_property
from .report import ReportRow, digits_for_precision, format_rows, render_decimal, run_id
from .riemann import (
    DYADIC,
    PARTITIONS,
    ResourceLimitError,
    get_integrand,
    integrate,
    riemann_modulus,
    riemann_net,
    riemann_separability,
)
from .topology import Ball, Side, classify, shrink_to_regular

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE, EXIT_FALSIFIED, EXIT_PROPERTY = 0, 1, 2, 3, 4, 5

DEFAULTS = {
    "fn": None,
    "p": "20",
    "radii": None,
    "trials": None,
    "depth": None,
    "seed": None,
    "tol": None,
    "out": None,
    "format": "table",
    "zeta_override": None,
    "only": None,
    "samples": None,
    "center": "0",
}
SEEDED = {"verify-net", "property-suite", "demo-regular-pair"}


class UsageError(Exception):
    pass


def read_config(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment, dashes in keys map to underscores."""
    config = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        config[key] = value
    return config


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fn", help="registry function: const1, linear, square, absdev")
    common.add_argument("--p", help="precision, or comma-separated precisions for integrate")
    common.add_argument("--radii", help="comma-separated rational radii, e.g. 1/4,1/16")
    common.add_argument("--trials")
    common.add_argument("--depth")
    common.add_argument("--seed", help="64-bit integer seed for all sampling")
    common.add_argument("--tol")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("table", "csv"))
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--zeta-override", dest="zeta_override", help="rational limit to test instead of the integral")
    common.add_argument("--only", help="comma-separated property names")
    common.add_argument("--samples", help="sample count for each selected property")
    common.add_argument("--center", help="center of the demo regular pair")

    parser = argparse.ArgumentParser(prog="sepnets", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("integrate", parents=[common], help="exact Riemann integration of a registry function")
    sub.add_parser("verify-net", parents=[common], help="falsification search for the Riemann net limit")
    sub.add_parser("property-suite", parents=[common], help="run the seeded property checks")
    sub.add_parser("demo-regular-pair", parents=[common], help="classification table of a regular pair")
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Optional[str]]:
    config = dict(DEFAULTS)
    if args.config:
        config.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if args.command in SEEDED and config["seed"] is None:
        raise UsageError(f"{args.command} needs --seed")
    return config


def _int(config, key: str) -> int:
    try:
        return int(config[key])
    except (TypeError, ValueError):
        raise UsageError(f"--{key} must be an integer, got {config[key]!r}") from None


def _rational(text: str, what: str):
    try:
        return to_rational(text.strip())
    except (TypeError, ValueError, ZeroDivisionError):
        raise UsageError(f"{what}: {text!r} is not a rational") from None


def _radii(config, default: str) -> list:
    radii = [_rational(r, "--radii") for r in (config["radii"] or default).split(",")]
    if any(r <= 0 for r in radii):
        raise UsageError("radii must be positive")
    return radii


def _function(config):
    if not config["fn"]:
        raise UsageError("--fn is required")
    try:
        return get_integrand(config["fn"])
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def cmd_integrate(config) -> tuple[int, list[ReportRow]]:
    f = _function(config)
    rows, code = [], EXIT_OK
    for p in (_int({"p": x}, "p") for x in config["p"].split(",")):
        value = integrate(f, p).approx(p)
        bound = dyadic(p)
        digits = digits_for_precision(p)
        error = abs(value - f.integral)
        ok = error <= bound
        code = code if ok else EXIT_FAIL
        param = f"p={p};oracle={f.integral};err={render_decimal(error, digits)}"
        rows.append(ReportRow(run_id("integrate", f.name, p), "integrate", f.name, param,
                              render_decimal(value, digits), render_decimal(bound, digits),
                              "pass" if ok else "fail"))
    return code, rows


def cmd_verify_net(config) -> tuple[int, list[ReportRow]]:
    f = _function(config)
    p = _int(config, "p")
    seed = _int(config, "seed")
    trials = _int({"trials": config["trials"] or "100"}, "trials")
    radii = _radii(config, "1/4,1/32,1/256")
    if config["zeta_override"] is not None:
        zeta = creal_from_rational(_rational(config["zeta_override"], "--zeta-override"))
    else:
        zeta = integrate(f, p)
    report = verify_net_limit(PARTITIONS, DYADIC, riemann_net(f), riemann_separability(f), zeta,
                              radii, seed, trials, riemann_modulus(f))
    rows = []
    for r in report.radii:
        found = len(r.falsifications)
        param = f"r={r.radius};trials={r.trials};offset={r.offset};search_hits={len(r.search_hits)}"
        rows.append(ReportRow(run_id("verify-net", f.name, seed, r.radius, trials, config["zeta_override"]),
                              "verify-net", f.name, param, str(found), "0",
                              "pass" if found == 0 else "fail"))
    for fal in report.falsifications[:10]:
        print(f"falsification: r={fal.radius} n={fal.n} strategy={fal.strategy} "
              f"beta=<{len(fal.beta)} cells, mesh {fal.beta.mesh}> "
              f"classification={fal.classification.side.value}", file=sys.stderr)
    return (EXIT_OK if report.ok else EXIT_FALSIFIED), rows


def cmd_property_suite(config) -> tuple[int, list[ReportRow]]:
    seed = _int(config, "seed")
    samples = None if config["samples"] is None else _int(config, "samples")
    names = list(PROPERTIES) if not config["only"] else [n.strip() for n in config["only"].split(",")]
    unknown = [n for n in names if n not in PROPERTIES]
    if unknown:
        raise UsageError(f"unknown properties {unknown}; known: {', '.join(PROPERTIES)}")
    options = {}
    if config["depth"] is not None:
        options["depth"] = _int(config, "depth")
    if config["tol"] is not None:
        options["tol"] = _rational(config["tol"], "--tol")
    rows, failing = [], []
    for name in names:
        result = run_property(name, seed, samples, **options)
        if not result.ok:
            failing.append(result)
        echo = "".join(f";{k}={v}" for k, v in sorted(options.items()))
        rows.append(ReportRow(run_id("property-suite", name, seed, samples, echo), "property-suite", "-",
                              f"{name};cases={result.cases}{echo}", str(result.violations), "0",
                              "pass" if result.ok else "fail"))
    for result in failing:
        print(f"property {result.name} failed: {result.detail}", file=sys.stderr)
    return (EXIT_PROPERTY if failing else EXIT_OK), rows


def cmd_demo_regular_pair(config) -> tuple[int, list[ReportRow]]:
    seed = _int(config, "seed")
    trials = _int({"trials": config["trials"] or "12"}, "trials")
    center = _rational(config["center"], "--center")
    radius = _radii(config, "1")[0]
    pair = shrink_to_regular(Ball(creal_from_rational(center), radius))
    rng = random.Random(seed)
    # fixed probes at the boundary cases, then seeded samples in [c - 2R, c + 2R]
    points = [center, center + radius / 2, center + radius * 3 / 4, center - radius, center + 2 * radius]
    points += [center + radius * (mpq(rng.randrange(-512, 513), 256)) for _ in range(trials)]
    rows = []
    for x in points:
        side = classify(pair, creal_from_rational(x)).side
        certificate = f"d<{radius}" if side is Side.IN_OUTER else f"d>{pair.inner.radius}"
        rows.append(ReportRow(run_id("demo-regular-pair", seed, center, radius, x), "demo-regular-pair", "-",
                              f"x={x}", render_decimal(abs(x - center), 6), certificate, side.value))
    return EXIT_OK, rows


COMMANDS = {
    "integrate": cmd_integrate,
    "verify-net": cmd_verify_net,
    "property-suite": cmd_property_suite,
    "demo-regular-pair": cmd_demo_regular_pair,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve(args)
        code, rows = COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    text = format_rows(rows, config["format"])
    if config["out"]:
        Path(config["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
