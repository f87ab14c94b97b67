"""
qaskey main.py
Command-line front end: evaluate a family at one point, run verification suites
over parameter grids, print residual tables and list what is registered.
"""

import sys
import time
import argparse
from argparse import RawTextHelpFormatter

from qaskey import VERSION
from qaskey.asym import LEMMAS
from qaskey.config import Config
from qaskey.errors import DomainError, QaskeyError
from qaskey.families import FAMILIES, FamilyId, ParamSet, PointX, PointZ, evaluate, representation_spread
from qaskey.genfun import GF_IDS
from qaskey.grids import Grid, normalize_grids, resolve_grid
from qaskey.logger import Logger
from qaskey.ortho import RELATIONS
from qaskey.qcore import BaseQ
from qaskey.report import build_report, format_value, render_json, write_json, write_table
from qaskey.suites import SUITES, run_suites, select_suites

PARAM_NAMES = ("a", "b", "c", "d")
LISTS = ("suites", "families", "gf", "relations", "lemmas", "grids")


def parse_number(text):
    """Float when it reads as one, otherwise the 're+imi' literal as given."""
    text = str(text).strip()
    try:
        return float(text)
    except ValueError:
        return text


def parse_params(text):
    """'a=0.3,b=0.2+0.1i' -> {'a': 0.3, 'b': '0.2+0.1i'}."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not value.strip():
            raise DomainError(f"malformed parameter {item.strip()!r} (expected name=value)")
        if name not in PARAM_NAMES:
            raise DomainError(f"unknown parameter {name!r} (expected one of {', '.join(PARAM_NAMES)})")
        out[name] = parse_number(value)
    return out


def parse_degree(text):
    text = str(text).strip()
    try:
        return int(text)
    except ValueError:
        return text


class Qaskey:
    """ Qaskey Application Class"""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.logger = Logger(name="qaskey",
                             level=self.cfg.main.log_level,
                             logfile_path=self.cfg.main.logfile_path,
                             verbose=self.cfg.main.verbose)

    def base(self, q):
        return BaseQ.from_config(parse_number(q), self.cfg)

    def cmd_eval(self, args):                                                           ##### eval
        """Value of one family at one point, the representation used and the spread of the others."""
        if args.family not in FAMILIES:
            raise DomainError(f"unknown family {args.family!r} (see 'qaskey list families')")
        info = FAMILIES[args.family]
        if args.q is None:
            raise DomainError("missing base --q")
        q = self.base(args.q)
        P = ParamSet.build(q, **parse_params(args.params))
        if info.point == "z":
            if args.z is None:
                raise DomainError(f"{info.name} needs --z")
            pt = PointZ.from_z(parse_number(args.z), q)
        else:
            if args.x is None:
                raise DomainError(f"{info.name} needs --x")
            pt = PointX.from_value(parse_number(args.x), q)
        if args.n is None:
            raise DomainError("missing degree --n")
        degree = parse_degree(args.n)

        result = evaluate(FamilyId(args.family, args.rep), degree, pt, P)
        spread, count = representation_spread(args.family, result.degree, pt, P)
        print(format_value(result.value))
        print(f"representation {result.rep}, spread {spread:.3g} over {count} representation(s)")
        self.logger.log(f"eval {args.family} rep {result.rep} n={degree} at q={args.q}", "DEBUG")
        return 0

    def _grid(self, args):
        """Named or inline grid; --q (with --params) narrows the run to that base."""
        if args.q is None:
            return resolve_grid(self.cfg.main.grid, self.cfg.grids)
        q = parse_number(args.q)
        params = parse_params(args.params)
        try:
            if params:
                (grid,) = normalize_grids([Grid("cli", points=0, cases=[{"q": q, **params}])])
            else:
                named = resolve_grid(self.cfg.main.grid, self.cfg.grids)
                (grid,) = normalize_grids([Grid("cli", qs=[q], points=max(1, named.points), nmax=named.nmax)])
        except ValueError as e:
            raise DomainError(str(e)) from e
        return grid

    def _run(self, args):
        ids = select_suites(args.suite)
        grid = self._grid(args)
        main = self.cfg.main
        echo = {"suite": args.suite, "suites": ids, "grid": grid.name, "tol": main.tol, "nmax": main.nmax,
                "seed": main.seed, "precision": main.precision}
        self.logger.log(f"Running {len(ids)} suite(s) over grid {grid.name}", "INFO")
        results = run_suites(ids, grid, self.cfg, self.logger, tol=main.tol, nmax=main.nmax, seed=main.seed)
        return results, echo

    def cmd_verify(self, args):                                                         ##### verify
        """Run the suites and write the JSON report; 1 when any case fails."""
        started = time.monotonic()
        results, echo = self._run(args)
        report = build_report(args.suite, results, echo, started)
        if self.cfg.main.out:
            write_json(report, self.cfg.main.out)
        else:
            sys.stdout.write(render_json(report))
        s = report.summary
        worst = "n/a" if s["worst_residual"] is None else f"{s['worst_residual']:.3g}"
        print(f"qaskey: {s['passed']}/{s['cases']} case(s) passed, worst residual {worst}", file=sys.stderr)
        return 0 if report.passed else 1

    def cmd_table(self, args):                                                          ##### table
        """Residual rows of the suites as CSV or TSV on stdout."""
        results, _ = self._run(args)
        write_table(results, self.cfg.main.format, sys.stdout)
        return 0

    def cmd_list(self, args):                                                           ##### list
        sections = {
            "suites": sorted(SUITES),
            "families": [f"{fid:<10} {info.name} ({info.point}, reps {', '.join(map(str, sorted(info.reps)))})"
                         for fid, info in FAMILIES.items()],
            "gf": list(GF_IDS),
            "relations": [f"{rid:<16} {rel.kind:<9} {rel.family:<9} {rel.support}" for rid, rel in RELATIONS.items()],
            "lemmas": list(LEMMAS),
            "grids": [f"{g.name:<10} qs={g.qs} points={g.points} nmax={g.nmax} cases={len(g.cases)}"
                      for g in self.cfg.grids],
        }
        wanted = [args.what] if args.what else list(LISTS)
        for name in wanted:
            if len(wanted) > 1:
                print(f"[{name}]")
            for line in sections[name]:
                print(line)
        return 0

    def cleanup(self):
        logger = getattr(self, "logger", None)
        if logger:
            try:
                logger.close()
            except Exception:
                pass

    @staticmethod
    def parse_args(argv=None):
        """Parse and return the application’s command‐line arguments."""
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('-c', '--config-file',
            default='qaskey.toml',
            help='Path to TOML config file (default: qaskey.toml)')
        common.add_argument("--precision", choices=["standard", "wide"],
            help="53- or 106-bit mantissa (default: QASKEY_PRECISION, then standard)")
        common.add_argument("--log-level", dest="log_level",
            help="DEBUG, INFO, WARNING or ERROR (default: WARNING)")
        common.add_argument("--logfile", dest="logfile_path",
            help="Append log records to this file")
        common.add_argument("--verbose", action="store_true", default=None,
            help="Write every log record to stderr, not only warnings")
        common.add_argument("--q",
            help="Base q, a real number or a 're+imi' literal")
        common.add_argument("--params",
            help="Family parameters, e.g. a=0.3,b=0.2+0.1i")

        runs = argparse.ArgumentParser(add_help=False)
        runs.add_argument("--suite", required=True,
            help=("Suite id, a prefix followed by .all, or all\n"
                  "e.g. ortho.theta.cqh, duality.all (see 'qaskey list suites')"))
        runs.add_argument("--grid",
            help="Named grid from the config file, or inline: q=0.5,a=0.3;q=0.4,a=0.2")
        runs.add_argument("--tol", type=float,
            help="Tolerance for every case (default: each suite's own)")
        runs.add_argument("--nmax", type=int,
            help="Degree cap (default: the grid's, then each suite's own)")
        runs.add_argument("--seed", type=int,
            help="Sampling seed (default: 0)")

        parser = argparse.ArgumentParser(
            prog="qaskey",
            formatter_class=RawTextHelpFormatter,
            description=f"Qaskey {VERSION} – evaluate and verify q- and q^-1-symmetric Askey-Wilson subfamilies.")
        parser.add_argument("-v", "--version", action="version", version=f"Qaskey v{VERSION}",
            help="Show program version and exit")
        sub = parser.add_subparsers(dest="command", required=True)

        p_eval = sub.add_parser("eval", parents=[common], formatter_class=RawTextHelpFormatter,
            help="Evaluate a family at one point")
        p_eval.add_argument("--family", required=True, help="Family id (see 'qaskey list families')")
        p_eval.add_argument("--rep", type=int, default=1, help="Representation number (default: 1)")
        p_eval.add_argument("--n", help="Degree n, or mu for the function families")
        p_eval.add_argument("--z", help="Point z for families in z")
        p_eval.add_argument("--x", help="Point x for families in x")

        p_verify = sub.add_parser("verify", parents=[common, runs], formatter_class=RawTextHelpFormatter,
            help="Run verification suites and write a JSON report")
        p_verify.add_argument("--out", help="Report path (default: stdout)")

        p_table = sub.add_parser("table", parents=[common, runs], formatter_class=RawTextHelpFormatter,
            help="Print the residual rows of suites as a table")
        p_table.add_argument("--format", choices=["csv", "tsv"], help="Table format (default: csv)")

        p_list = sub.add_parser("list", parents=[common], formatter_class=RawTextHelpFormatter,
            help="List suites, families, generating functions, relations, lemmas and grids")
        p_list.add_argument("what", nargs="?", choices=LISTS, help="Only this section")
        return parser.parse_args(argv)


COMMANDS = {"eval": Qaskey.cmd_eval, "verify": Qaskey.cmd_verify, "table": Qaskey.cmd_table,
            "list": Qaskey.cmd_list}


def main(argv=None):
    """Qaskey lifecycle"""
    args = Qaskey.parse_args(argv)
    cfg = Config.from_args_and_file(args)
    app = None
    try:
        app = Qaskey(cfg)
        return COMMANDS[args.command](app, args)
    except QaskeyError as e:
        print(f"[QASKEY ERROR]: {e}", file=sys.stderr)
        return 2
    finally:
        if app is not None:
            app.cleanup()

if __name__ == "__main__":
    sys.exit(main())
