import math
import subprocess
import sys
from decimal import ROUND_DOWN, Decimal, localcontext
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sepnets.cli import main
from sepnets.report import HEADER, ReportRow, digits_for_precision, format_rows, render_decimal, run_id


def decimal_oracle(q: Fraction, digits: int) -> str:
    with localcontext() as ctx:
        ctx.prec = 200
        exact = Decimal(abs(q).numerator) / Decimal(abs(q).denominator)
        text = format(exact.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_DOWN), "f")
    truncated = Fraction(Decimal(text)) != abs(q)
    return ("-" if q < 0 else "") + text + ("~" if truncated else "")


@pytest.mark.parametrize("p", [0, 1, 4, 8, 10, 20, 64])
def test_digits_for_precision(p):
    assert digits_for_precision(p) == math.ceil(p * math.log10(2)) + 2


@given(st.fractions(-1000, 1000, max_denominator=10**6), st.integers(1, 30))
def test_render_decimal_matches_decimal_module(q, digits):
    assert render_decimal(q, digits) == decimal_oracle(q, digits)


def test_render_decimal_examples():
    assert render_decimal(Fraction(1, 2), 4) == "0.5000"
    assert render_decimal(Fraction(1, 3), 3) == "0.333~"
    assert render_decimal(Fraction(-7, 4), 1) == "-1.7~"
    assert render_decimal(5, 0) == "5"


def test_run_id_is_stable():
    assert run_id("a", 1) == run_id("a", 1) != run_id("a", 2)
    assert len(run_id()) == 12


def test_csv_and_table_formats():
    rows = [ReportRow("id", "integrate", "linear", "p=4", "0.5", "0.06", "pass")]
    csv_text = format_rows(rows, "csv")
    assert csv_text.splitlines()[0] == ",".join(HEADER)
    table = format_rows(rows, "table").splitlines()
    assert table[0].split() == list(HEADER) and set(table[1]) <= {"-", " "}
    with pytest.raises(ValueError):
        format_rows(rows, "json")


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_integrate_rows(capsys):
    code, out, _ = run(["integrate", "--fn", "square", "--p", "4,8", "--format", "csv"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(HEADER) and len(lines) == 3
    assert all(line.endswith(",pass") for line in lines[1:])
    assert "oracle=1/3" in lines[1]


def test_usage_errors(capsys):
    assert run(["integrate", "--fn", "cube"], capsys)[0] == 2
    assert run(["integrate"], capsys)[0] == 2
    assert run(["integrate", "--fn", "linear", "--p", "x"], capsys)[0] == 2
    assert run(["verify-net", "--fn", "linear"], capsys)[0] == 2
    assert run(["verify-net", "--fn", "linear", "--seed", "1", "--radii", "0"], capsys)[0] == 2
    code, _, err = run(["property-suite", "--seed", "1", "--only", "nope"], capsys)
    assert code == 2 and "unknown properties" in err


def test_resource_ceiling(capsys, monkeypatch):
    assert run(["integrate", "--fn", "linear", "--p", "30"], capsys)[0] == 3
    monkeypatch.setenv("SEPNETS_PRECISION_CEILING", "6")
    code, _, err = run(["integrate", "--fn", "linear", "--p", "7"], capsys)
    assert code == 3 and "ceiling 6" in err


def test_verify_net_wrong_zeta_exits_4(capsys):
    code, out, err = run(["verify-net", "--fn", "linear", "--seed", "2", "--trials", "5",
                          "--radii", "1/64", "--zeta-override", "3/5"], capsys)
    assert code == 4 and "falsification:" in err


def test_verify_net_true_zeta(capsys):
    code, out, _ = run(["verify-net", "--fn", "absdev", "--seed", "2", "--trials", "5", "--format", "csv"], capsys)
    assert code == 0 and out.count(",pass") == 3


def test_property_failure_exit_5(capsys, monkeypatch):
    from sepnets import cli
    from sepnets.properties import PropertyResult

    monkeypatch.setattr(cli, "run_property", lambda name, seed, samples, **kw: PropertyResult(name, 1, 1, "forced"))
    code, _, err = run(["property-suite", "--seed", "1", "--only", "join-contract"], capsys)
    assert code == 5 and "forced" in err


def test_config_file_and_flag_override(tmp_path, capsys):
    config = tmp_path / "run.cfg"
    config.write_text("# integrate settings\nfn = linear\np = 6\nformat = csv\n")
    code, out, _ = run(["integrate", "--config", str(config)], capsys)
    assert code == 0 and "p=6;" in out
    code, out, _ = run(["integrate", "--config", str(config), "--p", "5"], capsys)
    assert "p=5;" in out and "p=6;" not in out
    config.write_text("colour = blue\n")
    assert run(["integrate", "--config", str(config)], capsys)[0] == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.csv"
    assert run(["demo-regular-pair", "--seed", "3", "--out", str(target), "--format", "csv"], capsys)[0] == 0
    lines = target.read_text().splitlines()
    assert lines[0] == ",".join(HEADER) and len(lines) == 1 + 5 + 12
    assert capsys.readouterr().out == ""


def test_demo_regular_pair_fixed_probes(capsys):
    code, out, _ = run(["demo-regular-pair", "--seed", "1", "--trials", "0", "--format", "csv",
                        "--center", "1/2", "--radii", "1/4"], capsys)
    sides = [line.rsplit(",", 1)[1] for line in out.splitlines()[1:]]
    # x = c, c + R/2, c + 3R/4, c - R, c + 2R
    assert sides[0] == sides[1] == sides[2] == "in_outer"
    assert sides[3] == sides[4] == "not_touch_inner"


def test_property_suite_reproducible_subprocess():
    cmd = [sys.executable, "-m", "sepnets", "property-suite", "--seed", "1",
           "--only", "creal-regularity,join-contract", "--samples", "50"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first
