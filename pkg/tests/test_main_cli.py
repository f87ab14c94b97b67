import json
import os
import subprocess
import sys
from pathlib import Path


PROJECT_ROOT = Path(__file__).resolve().parents[1]


def run_cli(*args, cwd=None, timeout=60, env_extra=None):
    env = os.environ.copy()
    env["PYTHONPATH"] = str(PROJECT_ROOT)
    env.pop("QASKEY_PRECISION", None)
    env.update(env_extra or {})

    return subprocess.run(
        [sys.executable, "-m", "qaskey.main", *args],
        cwd=cwd or PROJECT_ROOT,
        env=env,
        text=True,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        timeout=timeout,
    )


def test_cli_help_exits_successfully_and_lists_subcommands(tmp_path):
    result = run_cli("--help", cwd=tmp_path)

    assert result.returncode == 0
    assert "usage:" in result.stdout.lower()
    for command in ("eval", "verify", "table", "list"):
        assert command in result.stdout


def test_cli_version_exits_successfully(tmp_path):
    result = run_cli("--version", cwd=tmp_path)

    assert result.returncode == 0
    assert "Qaskey v" in result.stdout


def test_eval_continuous_q_hermite_degree_one(tmp_path):
    result = run_cli("eval", "--family", "cqh", "--n", "1", "--z", "2", "--q", "0.5", cwd=tmp_path)

    assert result.returncode == 0, result.stderr
    assert result.stdout.splitlines()[0] == "2.5"
    assert "representation 1" in result.stdout


def test_eval_at_wide_precision_from_environment(tmp_path):
    result = run_cli("eval", "--family", "cqh", "--n", "0", "--z", "2", "--q", "0.5", cwd=tmp_path,
                     env_extra={"QASKEY_PRECISION": "wide"})

    assert result.returncode == 0, result.stderr
    assert result.stdout.splitlines()[0] == "1.0"


def test_eval_missing_parameter_exits_2_and_names_it(tmp_path):
    result = run_cli("eval", "--family", "cdqh", "--n", "1", "--z", "2", "--q", "0.5", "--params", "a=0.3",
                     cwd=tmp_path)

    assert result.returncode == 2
    assert "[QASKEY ERROR]:" in result.stderr
    assert "missing parameter" in result.stderr
    assert "'b'" in result.stderr


def test_eval_unknown_family_exits_2(tmp_path):
    result = run_cli("eval", "--family", "nope", "--n", "1", "--z", "2", "--q", "0.5", cwd=tmp_path)

    assert result.returncode == 2
    assert "unknown family" in result.stderr


def test_eval_malformed_params_exits_2(tmp_path):
    result = run_cli("eval", "--family", "asc", "--n", "1", "--z", "2", "--q", "0.5", "--params", "a0.3",
                     cwd=tmp_path)

    assert result.returncode == 2
    assert "malformed parameter" in result.stderr


def test_verify_unknown_suite_exits_2(tmp_path):
    result = run_cli("verify", "--suite", "ortho.theta.nope", cwd=tmp_path)

    assert result.returncode == 2
    assert "unknown suite" in result.stderr


def test_verify_empty_grid_exits_2(tmp_path):
    result = run_cli("verify", "--suite", "ortho.theta.cqh", "--grid", "", cwd=tmp_path)

    assert result.returncode == 2
    assert "empty grid" in result.stderr


def test_verify_continuous_q_hermite_orthogonality_passes(tmp_path):
    out = tmp_path / "report.json"

    result = run_cli("verify", "--suite", "ortho.theta.cqh", "--q", "0.5", "--nmax", "4", "--tol", "1e-7",
                     "--out", str(out), cwd=tmp_path, timeout=300)

    assert result.returncode == 0, result.stderr
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["schema"] == "qaskey-report/1"
    assert report["summary"]["failed"] == 0
    assert report["config"]["nmax"] == 4


def test_verify_failing_case_exits_1(tmp_path):
    result = run_cli("verify", "--suite", "families.limit.cbqh_cqh", "--grid", "q=0.5,z=1.5", "--tol", "1e-300",
                     cwd=tmp_path)

    assert result.returncode == 1
    report = json.loads(result.stdout)
    assert report["summary"]["failed"] == 1
    assert "failed" in result.stderr


def test_table_lists_one_row_per_index(tmp_path):
    result = run_cli("table", "--suite", "asym.lem416", "--grid", "smoke", "--format", "tsv", cwd=tmp_path,
                     timeout=300)

    assert result.returncode == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0].split("\t")[:3] == ["suite", "key", "inputs"]
    assert len(lines) == 1 + 21


def test_table_unknown_id_exits_2(tmp_path):
    result = run_cli("table", "--suite", "asym.nope", cwd=tmp_path)

    assert result.returncode == 2


def test_list_suites(tmp_path):
    result = run_cli("list", "suites", cwd=tmp_path)

    assert result.returncode == 0
    names = result.stdout.split()
    assert "duality.thm311" in names
    assert "asym.lem413.critical" in names
    assert "ortho.discrete.akporth" in names


def test_cli_invalid_toml_exits_with_config_error(tmp_path):
    (tmp_path / "qaskey.toml").write_text(
        """
[main
seed = 1
""",
        encoding="utf-8",
    )

    result = run_cli("list", cwd=tmp_path)

    assert result.returncode == 2
    assert "[CONFIG ERROR]" in result.stderr
    assert "Invalid TOML" in result.stderr
