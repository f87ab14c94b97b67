"""
qaskey report.py
Report assembly for verification runs, the JSON writer and the CSV/TSV tables.
Bodies are deterministic for a given (config, seed, precision); timing lives
in its own block so it can be left out when reports are compared.
"""

import csv
import json
import sys
import time
from dataclasses import dataclass, field

import mpmath

__all__ = ["SCHEMA", "TABLE_COLUMNS", "Report", "build_report", "format_value", "render_json", "write_json",
           "write_table"]

SCHEMA = "qaskey-report/1"
TABLE_COLUMNS = ("suite", "key", "inputs", "index", "lhs", "rhs", "residual", "passed")
DELIMITERS = {"csv": ",", "tsv": "\t"}


def format_value(value):
    """Plain JSON value for a number of any backend; complex numbers as 're+imi'."""
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, (list, tuple)):
        return [format_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): format_value(v) for k, v in value.items()}
    if isinstance(value, complex) or hasattr(value, "_mpc_"):
        re, im = value.real, value.imag
        if im == 0:
            return format_value(re)
        sign = "-" if im < 0 else "+"
        return f"{_real_text(re)}{sign}{_real_text(abs(im))}i"
    if hasattr(value, "_mpf_"):
        return _real_text(value)
    return str(value)


def _real_text(x):
    if hasattr(x, "_mpf_"):
        return mpmath.nstr(x, 15)
    return repr(float(x))


@dataclass
class Report:
    suite: str
    config: dict
    cases: list
    summary: dict
    schema: str = SCHEMA
    timing: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.summary["failed"] == 0

    def to_dict(self, timing=True):
        body = {
            "schema": self.schema,
            "suite": self.suite,
            "config": self.config,
            "summary": self.summary,
            "cases": self.cases,
        }
        if timing:
            body["timing"] = self.timing
        return body


def _case_entry(result):
    return {
        "suite": result.suite,
        "key": result.key,
        "inputs": format_value(result.inputs),
        "passed": result.passed,
        "tol": result.tol,
        "residual": result.residual,
        "error": result.error,
        "diagnostics": format_value(result.diagnostics),
        "rows": [{"index": format_value(r.index), "lhs": format_value(r.lhs), "rhs": format_value(r.rhs),
                  "residual": r.residual} for r in result.rows],
    }


def build_report(suite, results, config, started=None):
    """Report over case results already ordered by (suite, key)."""
    failed = [r for r in results if not r.passed]
    residuals = [r.residual for r in results if r.residual is not None]
    summary = {
        "cases": len(results),
        "passed": len(results) - len(failed),
        "failed": len(failed),
        "errors": sum(1 for r in results if r.error),
        "worst_residual": max(residuals, default=None),
    }
    timing = {"case_seconds": {f"{r.suite}|{r.key}": round(r.duration, 3) for r in results}}
    if started is not None:
        timing["wall_time"] = round(time.monotonic() - started, 3)
    return Report(suite=suite, config=format_value(config), cases=[_case_entry(r) for r in results],
                  summary=summary, timing=timing)


def render_json(report, timing=True):
    return json.dumps(report.to_dict(timing=timing), sort_keys=True, indent=2) + "\n"


def write_json(report, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_json(report))


def _inputs_text(inputs):
    return " ".join(f"{k}={format_value(v)}" for k, v in sorted(inputs.items()))


def _index_text(index):
    return " ".join(f"{k}={format_value(v)}" for k, v in index.items())


def _cell(value):
    value = format_value(value)
    return "" if value is None else value


def write_table(results, fmt="csv", stream=None):
    """One line per row of every case; cases without rows get a single line."""
    if fmt not in DELIMITERS:
        raise ValueError(f"unknown table format {fmt!r} (csv or tsv)")
    stream = stream or sys.stdout
    writer = csv.writer(stream, delimiter=DELIMITERS[fmt], lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for result in results:
        inputs = _inputs_text(result.inputs)
        if not result.rows:
            writer.writerow([result.suite, result.key, inputs, "", "", "", _cell(result.residual),
                             result.error or result.passed])
            continue
        for row in result.rows:
            writer.writerow([result.suite, result.key, inputs, _index_text(row.index),
                             _cell(row.lhs), _cell(row.rhs), row.residual, result.passed])
