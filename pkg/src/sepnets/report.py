"""Report rows and exact decimal rendering."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass

from .exact import RationalLike, to_rational

HEADER = ("run_id", "command", "fn", "param", "value", "bound", "status")


def digits_for_precision(p: int) -> int:
    """``ceil(p * log10(2)) + 2``, computed without floating point."""
    d = 0
    while 10 ** d < 2 ** p:
        d += 1
    return d + 2


def render_decimal(value: RationalLike, digits: int) -> str:
    """Exact decimal expansion truncated toward zero after ``digits`` places.

    A trailing ``~`` marks a truncated expansion.
    """
    q = to_rational(value)
    sign = "-" if q < 0 else ""
    num, den = abs(int(q.numerator)), int(q.denominator)
    whole, rem = divmod(num, den)
    if digits <= 0:
        return f"{sign}{whole}" + ("~" if rem else "")
    frac, rest = divmod(rem * 10 ** digits, den)
    text = f"{sign}{whole}.{frac:0{digits}d}"
    return text + "~" if rest else text


@dataclass(frozen=True)
class ReportRow:
    run_id: str
    command: str
    fn: str
    param: str
    value: str
    bound: str
    status: str

    def as_tuple(self) -> tuple[str, ...]:
        return (self.run_id, self.command, self.fn, self.param, self.value, self.bound, self.status)


def run_id(*parts: object) -> str:
    """Deterministic short id from the echoed configuration."""
    digest = hashlib.sha256("|".join(map(str, parts)).encode()).hexdigest()
    return digest[:12]


def format_rows(rows: list[ReportRow], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow(row.as_tuple())
        return buf.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    table = [HEADER] + [row.as_tuple() for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(HEADER))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
