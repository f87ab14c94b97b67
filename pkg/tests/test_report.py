import csv
import io
import json

import mpmath

from qaskey.report import SCHEMA, TABLE_COLUMNS, build_report, format_value, render_json, write_json, write_table
from qaskey.suites import CaseResult, Row


def make_results():
    ctx = mpmath.MPContext()
    ctx.prec = 53
    ok = CaseResult("ortho.theta.cqh", "smoke:00:000", {"q": 0.5}, [
        Row({"i": 0, "j": 0}, ctx.mpf(2), ctx.mpf(2), 0.0),
        Row({"i": 0, "j": 1}, ctx.mpc(1e-17, 0), 0, 1e-17),
    ], 1e-17, True, 1e-6, duration=0.25)
    bad = CaseResult("ortho.theta.cqh", "smoke:case:000", {"q": "0.4+0.3i", "a": 0.3}, [], None, False, 1e-6,
                     error="DomainError: needs a real base", duration=0.5)
    return [ok, bad]


def test_format_value_handles_backend_numbers():
    ctx = mpmath.MPContext()
    ctx.prec = 53

    assert format_value(ctx.mpf("2.5")) == "2.5"
    assert format_value(ctx.mpc(1, -2)) == "1.0-2.0i"
    assert format_value(ctx.mpc(3, 0)) == "3.0"
    assert format_value(complex(0.5, 0.25)) == "0.5+0.25i"
    assert format_value({"sel": (1, 2, 3)}) == {"sel": [1, 2, 3]}


def test_build_report_summary_counts_passes_failures_and_worst_residual():
    report = build_report("ortho.all", make_results(), {"grid": "smoke", "seed": 0})

    assert report.schema == SCHEMA
    assert report.summary == {"cases": 2, "passed": 1, "failed": 1, "errors": 1, "worst_residual": 1e-17}
    assert report.passed is False
    assert report.cases[1]["error"] == "DomainError: needs a real base"


def test_report_body_is_deterministic_without_timing():
    first = build_report("ortho.all", make_results(), {"grid": "smoke"}, started=0.0)
    second = build_report("ortho.all", make_results(), {"grid": "smoke"}, started=1.0)

    assert render_json(first, timing=False) == render_json(second, timing=False)
    assert "timing" in json.loads(render_json(first))


def test_write_json_round_trips_schema_and_rows(tmp_path):
    path = tmp_path / "report.json"

    write_json(build_report("ortho.theta.cqh", make_results(), {}), path)

    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["schema"] == "qaskey-report/1"
    assert data["cases"][0]["rows"][0] == {"index": {"i": 0, "j": 0}, "lhs": "2.0", "rhs": "2.0", "residual": 0.0}


def test_csv_and_tsv_tables_carry_identical_values():
    as_csv, as_tsv = io.StringIO(), io.StringIO()

    write_table(make_results(), "csv", as_csv)
    write_table(make_results(), "tsv", as_tsv)

    rows_csv = list(csv.reader(io.StringIO(as_csv.getvalue())))
    rows_tsv = list(csv.reader(io.StringIO(as_tsv.getvalue()), delimiter="\t"))
    assert rows_csv == rows_tsv
    assert tuple(rows_csv[0]) == TABLE_COLUMNS
    assert len(rows_csv) == 1 + 2 + 1
    assert rows_csv[1][:4] == ["ortho.theta.cqh", "smoke:00:000", "q=0.5", "i=0 j=0"]
    assert rows_csv[3][2] == "a=0.3 q=0.4+0.3i"
