"""
qaskey config.py
Central configuration loader that uses per-module config classes
"""

import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from typing import Optional

from qaskey.asym import AsymConfig
from qaskey.errors import DomainError
from qaskey.genfun import GFConfig
from qaskey.grids import Grid, DEFAULT_GRIDS, normalize_grids
from qaskey.ortho import OrthoConfig
from qaskey.qcore import QCoreConfig, resolve_precision
from qaskey.runner import RunnerConfig
from qaskey.series import SeriesConfig

@dataclass
class MainConfig:
    """Default configuration"""
    config_file: str = "qaskey.toml"
    log_level: str = "WARNING"
    logfile_path: Optional[str] = None
    verbose: bool = False
    precision: Optional[str] = None          # standard | wide; None: QASKEY_PRECISION, then standard
    tol: Optional[float] = None              # None: each suite's own tolerance
    nmax: Optional[int] = None               # None: the grid's cap, then each suite's own
    seed: int = 0
    grid: str = "default"
    out: Optional[str] = None                # verify: JSON report path
    format: str = "csv"                      # table: csv | tsv

class Config:
    """ Read dataclasses from modules and provide cfg"""
    SECTIONS = ("main", "qcore", "series", "ortho", "asym", "gf", "runner")

    def __init__(self,
                 main=None,
                 qcore=None,
                 series=None,
                 ortho=None,
                 asym=None,
                 gf=None,
                 runner=None):
        self.main = main or MainConfig()
        self.qcore = qcore or QCoreConfig()
        self.series = series or SeriesConfig()
        self.ortho = ortho or OrthoConfig()
        self.asym = asym or AsymConfig()
        self.gf = gf or GFConfig()
        self.runner = runner or RunnerConfig()
        self.grids = list(DEFAULT_GRIDS)

    @staticmethod
    def _config_error(message, exc=None):
        print(f"[CONFIG ERROR] {message}", file=sys.stderr)
        print(
            "[CONFIG ERROR] You may want to repair that file or delete it and use defaults.",
            file=sys.stderr,
        )
        if exc is not None:
            raise SystemExit(2) from exc
        raise SystemExit(2)

    @classmethod
    def _load_grids(cls, data):
        tbl = data.get("grids") or {}
        if not isinstance(tbl, dict):
            cls._config_error("[grids] must be a TOML table of named grids")
        custom = {}
        for name, entry in tbl.items():
            if not isinstance(entry, dict):
                cls._config_error(f"Invalid grid {name!r}: expected table/object")
            unknown = set(entry) - {"qs", "points", "nmax", "cases"}
            if unknown:
                cls._config_error(f"Invalid grid {name!r}: unknown field(s) {', '.join(sorted(unknown))}")
            custom[name] = Grid(name=name,
                                qs=entry.get("qs", []),
                                points=entry.get("points", 8),
                                nmax=entry.get("nmax"),
                                cases=entry.get("cases", []))
        merged = {g.name: g for g in DEFAULT_GRIDS}                                     # file grids replace defaults
        merged.update(custom)
        try:
            return normalize_grids(list(merged.values()))
        except ValueError as e:
            cls._config_error(f"Invalid grid configuration: {e}", e)

    @classmethod
    def _check_main(cls, main):
        if main.precision is not None and main.precision not in ("standard", "wide"):
            cls._config_error(f"precision must be 'standard' or 'wide', got {main.precision!r}")
        if main.tol is not None and (isinstance(main.tol, bool) or not isinstance(main.tol, (int, float))
                                     or main.tol <= 0):
            cls._config_error(f"tol must be a number > 0, got {main.tol!r}")
        if main.nmax is not None and (isinstance(main.nmax, bool) or not isinstance(main.nmax, int)
                                      or main.nmax < 0):
            cls._config_error(f"nmax must be an integer >= 0, got {main.nmax!r}")
        if main.format not in ("csv", "tsv"):
            cls._config_error(f"format must be 'csv' or 'tsv', got {main.format!r}")

    @classmethod
    def from_args_and_file(cls, args):
                                                                                        # instantiate defaults
        cfg = cls()
                                                                                        # load toml file
        path = getattr(args, "config_file", None) or "qaskey.toml"
        try:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        except FileNotFoundError:
            data = {}                                                                   # config is missing, use defaults
        except tomllib.TOMLDecodeError as e:
            cls._config_error(f"Invalid TOML FILE {path}: {e}", e)                      # config is invalid, exit with error

                                                                                        # overlay file data
        for section_name in cls.SECTIONS:
            section_data = data.get(section_name, {})
            if not isinstance(section_data, dict):
                cls._config_error(f"[{section_name}] must be a TOML table")
            section_obj = getattr(cfg, section_name)
            for key, val in section_data.items():
                if hasattr(section_obj, key):
                    setattr(section_obj, key, val)
        if cfg.main.logfile_path == "":
            cfg.main.logfile_path = None

        cfg.grids = cls._load_grids(data)                                               # Read grids
        file_precision = cfg.main.precision or "standard"
                                                                                        # overlay CLI args
        for key, val in vars(args).items():
            if val is None:
                continue
            if hasattr(cfg.main, key):
                setattr(cfg.main, key, val)

        cls._check_main(cfg.main)
        try:                                                                            # flag > env > file > standard
            cfg.main.precision = resolve_precision(getattr(args, "precision", None), default=file_precision)
        except DomainError as e:
            cls._config_error(str(e), e)
        return cfg
