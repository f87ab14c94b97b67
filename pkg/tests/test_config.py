import pytest
from types import SimpleNamespace

from qaskey.config import Config


def make_args(config_file, **overrides):
    values = {
        "config_file": str(config_file),
        "command": "verify",
        "suite": "ortho.all",
        "grid": None,
        "tol": None,
        "nmax": None,
        "seed": None,
        "precision": None,
        "log_level": None,
        "logfile_path": None,
        "verbose": None,
        "out": None,
        "q": None,
        "params": None,
    }
    values.update(overrides)
    return SimpleNamespace(**values)


def write_config(tmp_path, text):
    path = tmp_path / "qaskey.toml"
    path.write_text(text, encoding="utf-8")
    return path


def test_missing_config_file_uses_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("QASKEY_PRECISION", raising=False)
    args = make_args(tmp_path / "missing.toml")

    cfg = Config.from_args_and_file(args)

    assert cfg.main.precision == "standard"
    assert cfg.main.grid == "default"
    assert cfg.main.seed == 0
    assert cfg.main.tol is None
    assert cfg.series.max_terms == 5000
    assert cfg.ortho.quad_degree == 5
    assert cfg.asym.slope_tol == 0.3
    assert cfg.runner.max_workers == 4
    assert [g.name for g in cfg.grids] == ["default", "smoke"]


def test_toml_overlays_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("QASKEY_PRECISION", raising=False)
    config_path = write_config(
        tmp_path,
        """
[main]
precision = "wide"
seed = 7
grid = "mine"
logfile_path = ""

[series]
max_terms = 900

[asym]
slope_tol = 0.1

[runner]
max_workers = 1

[grids.mine]
qs = [0.3, "0.2+0.4i"]
points = 3
nmax = 2
""",
    )

    cfg = Config.from_args_and_file(make_args(config_path))

    assert cfg.main.precision == "wide"
    assert cfg.main.seed == 7
    assert cfg.main.logfile_path is None
    assert cfg.series.max_terms == 900
    assert cfg.asym.slope_tol == 0.1
    assert cfg.runner.max_workers == 1
    mine = [g for g in cfg.grids if g.name == "mine"][0]
    assert mine.qs == [0.3, "0.2+0.4i"]
    assert mine.nmax == 2


def test_cli_args_override_file(tmp_path, monkeypatch):
    monkeypatch.delenv("QASKEY_PRECISION", raising=False)
    config_path = write_config(tmp_path, '[main]\nseed = 7\nprecision = "wide"\n')

    cfg = Config.from_args_and_file(make_args(config_path, seed=3, tol=1e-9, precision="standard"))

    assert cfg.main.seed == 3
    assert cfg.main.tol == 1e-9
    assert cfg.main.precision == "standard"


def test_environment_precision_beats_file_but_not_flag(tmp_path, monkeypatch):
    config_path = write_config(tmp_path, '[main]\nprecision = "standard"\n')
    monkeypatch.setenv("QASKEY_PRECISION", "wide")

    assert Config.from_args_and_file(make_args(config_path)).main.precision == "wide"
    assert Config.from_args_and_file(make_args(config_path, precision="standard")).main.precision == "standard"


def test_invalid_toml_exits_with_config_error(tmp_path, capsys):
    config_path = write_config(tmp_path, "[main\nseed = 1\n")

    with pytest.raises(SystemExit) as exc:
        Config.from_args_and_file(make_args(config_path))

    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "[CONFIG ERROR] Invalid TOML FILE" in err
    assert "delete it and use defaults" in err


def test_invalid_grid_exits_with_config_error(tmp_path, capsys):
    config_path = write_config(tmp_path, "[grids.bad]\nqs = [1.0]\n")

    with pytest.raises(SystemExit) as exc:
        Config.from_args_and_file(make_args(config_path))

    assert exc.value.code == 2
    assert "Invalid grid configuration" in capsys.readouterr().err


def test_unknown_grid_field_exits_with_config_error(tmp_path, capsys):
    config_path = write_config(tmp_path, "[grids.bad]\nqs = [0.5]\npoint = 3\n")

    with pytest.raises(SystemExit):
        Config.from_args_and_file(make_args(config_path))

    assert "unknown field(s) point" in capsys.readouterr().err


@pytest.mark.parametrize("override", [{"tol": -1.0}, {"nmax": -2}])
def test_out_of_range_cli_values_exit_with_config_error(tmp_path, override):
    with pytest.raises(SystemExit) as exc:
        Config.from_args_and_file(make_args(tmp_path / "missing.toml", **override))

    assert exc.value.code == 2


def test_shipped_config_file_loads(monkeypatch):
    monkeypatch.delenv("QASKEY_PRECISION", raising=False)
    from pathlib import Path
    path = Path(__file__).resolve().parents[1] / "qaskey.toml"

    cfg = Config.from_args_and_file(make_args(path))

    assert {"default", "smoke", "wideq", "onepar"} <= {g.name for g in cfg.grids}
    assert cfg.main.log_level == "WARNING"
