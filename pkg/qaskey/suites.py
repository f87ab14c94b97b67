"""
qaskey suites.py
Registry of named verification suites. A suite knows the parameter region it
samples, its default degree cap and tolerance, and turns one grid case into
residual rows. run_suites fans the cases of the selected suites out to the runner.
"""

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from qaskey import asym, duality, families, genfun, ortho, series
from qaskey.errors import DomainError
from qaskey.families import FAMILIES, ParamSet, PointX, PointZ
from qaskey.grids import Case, Span, sample_cases
from qaskey.qcore import BaseQ, qpoch_identity_residuals, rel_residual
from qaskey.runner import SuiteRunner

__all__ = ["Row", "Outcome", "Suite", "CaseResult", "SUITES", "select_suites", "case_params",
           "run_case", "run_suites"]


@dataclass
class Row:
    index: dict
    lhs: object
    rhs: object
    residual: float


@dataclass
class Outcome:
    rows: list
    diagnostics: dict = field(default_factory=dict)
    judged: Optional[float] = None        # residual held against tol; None means the worst row
    ok: bool = True                       # condition on top of the tolerance (fitted order, residues)

    @property
    def residual(self):
        if self.judged is not None:
            return self.judged
        return max((r.residual for r in self.rows), default=0.0)


@dataclass(frozen=True)
class Suite:
    id: str
    run: Callable                         # (P, inputs, nmax, cfg) -> Outcome
    tol: float
    nmax: int = 4
    spans: dict = field(default_factory=dict)
    accept: Optional[Callable] = None     # (q, values) -> bool, resampled when False
    derive: Optional[Callable] = None     # values -> values, for tied parameters
    sampled: bool = True                  # False: the suite draws its own points from the seed

    def cases(self, grid, seed):
        if not self.sampled:
            return [Case(key=f"{grid.name}:all", q=None,
                         values={"count": max(1, 25 * grid.points or len(grid.cases)), "seed": seed})]
        rng = random.Random(f"{self.id}:{grid.name}:{seed}")
        return sample_cases(grid, self.spans, rng, self.accept, self.derive)


@dataclass
class CaseResult:
    suite: str
    key: str
    inputs: dict
    rows: list
    residual: Optional[float]
    passed: bool
    tol: float
    diagnostics: dict = field(default_factory=dict)
    error: str = ""
    duration: float = 0.0


SUITES = {}


def _register(suite):
    if suite.id in SUITES:
        raise ValueError(f"suite {suite.id!r} registered twice")
    SUITES[suite.id] = suite


def select_suites(pattern):
    """'all', an exact id, or '<prefix>.all'."""
    pattern = (pattern or "").strip()
    if not pattern:
        raise DomainError("no suite given")
    if pattern == "all":
        return sorted(SUITES)
    if pattern in SUITES:
        return [pattern]
    if pattern.endswith(".all"):
        prefix = pattern[:-3]
        found = sorted(s for s in SUITES if s.startswith(prefix))
        if found:
            return found
    raise DomainError(f"unknown suite {pattern!r} (try 'qaskey list')")


##### Inputs

R = Span(0.2, 0.9)
SMALL = Span(0.2, 0.6)
MID = Span(0.3, 0.8)
OUTER = Span(1.5, 2.5)
LARGE = Span(4.0, 8.0)
Z = Span(1.2, 2.0, (0.3, 1.2))
X = Span(0.1, 0.9)


def _spans(names, span):
    return {n: span for n in names}


def case_params(case, cfg):
    if case.q is None:
        return None
    q = BaseQ.from_config(case.q, cfg)
    return ParamSet.build(q, **{k: case.values[k] for k in "abcd" if k in case.values})


def _scalar(inputs, name, P, required=True):
    value = inputs.get(name)
    if value is None:
        if required:
            raise DomainError(f"missing input {name!r}")
        return None
    return P.q.convert(value)


def _point(fid, inputs, P):
    if FAMILIES[fid].point == "z":
        return PointZ.from_z(_scalar(inputs, "z", P), P.q)
    return PointX.from_value(_scalar(inputs, "x", P), P.q)


def _degrees(fid, inputs, nmax, P):
    if FAMILIES[fid].degree == "mu" and inputs.get("mu") is not None:
        return [_scalar(inputs, "mu", P)]
    return list(range(nmax + 1))


def _gram(report):
    rows = []
    for i, line in enumerate(report.normalized_residuals):
        for j, r in enumerate(line):
            rows.append(Row({"i": i, "j": j}, report.gram[i][j], report.expected[i] if i == j else 0, r))
    return Outcome(rows, dict(report.diagnostics))


##### qcore and series

def _run_identities(P, inputs, nmax, cfg):
    a, b = _scalar(inputs, "a", P), _scalar(inputs, "b", P)
    rows = []
    for n in range(nmax + 1):
        for k in range(n + 1):
            for name, r in sorted(qpoch_identity_residuals(a, b, P.q, n, k).items()):
                rows.append(Row({"identity": name, "n": n, "k": k}, None, None, r))
    return Outcome(rows)


_register(Suite("qcore.identities", _run_identities, 1e-10, nmax=6,
                spans={"a": Span(0.2, 1.5, (-1.0, 1.0)), "b": Span(0.2, 1.5, (-1.0, 1.0))}))


def _summation(sid):
    def run(P, inputs, nmax, cfg):
        rows = []
        samples = series.summation_samples(sid, inputs["count"], inputs["seed"], cfg.main.precision, cfg.series)
        for i, (base, params, lhs, rhs) in enumerate(samples):
            rows.append(Row({"sample": i, "q": base.q}, lhs, rhs, rel_residual(lhs, rhs)))
        return Outcome(rows)
    return run


for _sid in series.SUMMATIONS:
    _register(Suite(f"series.{_sid}", _summation(_sid), 1e-10, sampled=False))


##### families

def _family_spans(fid):
    info = FAMILIES[fid]
    spans = _spans(info.params, R)
    spans["z" if info.point == "z" else "x"] = Z if info.point == "z" else X
    return spans


def _spread(fid):
    def run(P, inputs, nmax, cfg):
        pt = _point(fid, inputs, P)
        rows = []
        for n in _degrees(fid, inputs, nmax, P):
            worst, used = families.representation_spread(fid, n, pt, P)
            rows.append(Row({"n": n, "representations": used}, None, None, worst))
        return Outcome(rows)
    return run


def _inversion(fid):
    def run(P, inputs, nmax, cfg):
        pt = _point(fid, inputs, P)
        return Outcome([Row({"n": n}, None, None, families.verify_q_inversion(fid, n, pt, P))
                        for n in range(nmax + 1)])
    return run


def _symmetry(fid):
    def run(P, inputs, nmax, cfg):
        pt = _point(fid, inputs, P)
        return Outcome([Row({"n": n}, None, None, families.verify_symmetries(fid, n, pt, P))
                        for n in _degrees(fid, inputs, nmax, P)])
    return run


def _limit(edge):
    child = families.LIMIT_EDGES[edge].child

    def run(P, inputs, nmax, cfg):
        pt = _point(child, inputs, P)
        rows = []
        for n in range(nmax + 1):
            residuals = families.verify_limit_chain(edge, n, pt, P)
            rows.append(Row({"n": n}, None, None, residuals[-1]))
        return Outcome(rows)
    return run


def _run_connection(P, inputs, nmax, cfg):
    z = _scalar(inputs, "z", P)
    return Outcome([Row({"direction": d, "n": n}, None, None, families.connection_cqH(d, n, z, P.q))
                    for d in ("q_to_qi", "qi_to_q") for n in range(nmax + 1)])


for _fid in FAMILIES:
    _register(Suite(f"families.{_fid}", _spread(_fid), 1e-10, nmax=8, spans=_family_spans(_fid)))
    if FAMILIES[_fid].point == "z" or _fid in ("bqj", "bqjf"):
        _register(Suite(f"families.symmetry.{_fid}", _symmetry(_fid), 1e-10, nmax=6, spans=_family_spans(_fid)))
    if _fid in ("aw", "bqj", "lqj") or FAMILIES[_fid].partner is not None:
        _register(Suite(f"families.inversion.{_fid}", _inversion(_fid), 1e-10, nmax=6,
                        spans=_family_spans(_fid)))
for _edge, _e in families.LIMIT_EDGES.items():
    _register(Suite(f"families.limit.{_edge}", _limit(_edge), 1e-4, nmax=4, spans=_family_spans(_e.child)))
_register(Suite("families.connection", _run_connection, 1e-10, nmax=8, spans={"z": Z}))


##### duality

_DUALITY_SUITES = {
    "thm311": "cdqh_bqj", "thm311i": "cdqih_bqj", "dualA": "bqj_cdqih_a", "dualC": "bqj_cdqih_c",
    "thm333": "cdqh_bqjf", "thm333i": "bqjf_cdqh", "thm312": "asc_lqj", "thm335": "asc_lqjf",
    "thm335i": "lqjf_asc", "thm336": "cbqh_qibesself", "thm336i": "qibesself_cbqh",
    "dhqinym": "cbqih_qbessel", "dhqinym2": "qbessel_cbqih",
}


def _selectors(did):
    kind = duality.DUALITIES[did][1]
    if kind == "selection":
        return list(duality.SELECTIONS)
    if kind == "variant":
        return [1, 2, 3, 4]
    return [None]


def _duality_first(did, inputs, nmax, P):
    if duality.DUALITIES[did][2] == "mu" and inputs.get("mu") is not None:
        return [_scalar(inputs, "mu", P)]
    return list(range(nmax + 1))


def _duality(did):
    def run(P, inputs, nmax, cfg):
        rows = []
        for sel in _selectors(did):
            dual_id = duality.DualityId(did, sel)
            for m in _duality_first(did, inputs, nmax, P):
                for n in range(nmax + 1):
                    lhs, rhs = duality.duality_sides(dual_id, m, n, P)
                    rows.append(Row({"selector": sel, "m": m, "n": n}, lhs, rhs, rel_residual(lhs, rhs)))
        return Outcome(rows)
    return run


def _dual_points(did):
    def run(P, inputs, nmax, cfg):
        rows = []
        for sel in _selectors(did):
            dual_id = duality.DualityId(did, sel)
            for m in range(nmax + 1):
                for n in range(nmax + 1):
                    r = duality.dual_point_equivalence(dual_id, m, n, P)
                    rows.append(Row({"selector": sel, "m": m, "n": n}, None, None, r))
        return Outcome(rows)
    return run


for _name, _did in _DUALITY_SUITES.items():
    _register(Suite(f"duality.{_name}", _duality(_did), 1e-8, nmax=6, spans=_spans("abc", R)))
    if _did in duality.LATTICE_PAIRS:
        _register(Suite(f"duality.points.{_name}", _dual_points(_did), 1e-10, nmax=4, spans=_spans("abc", R)))


##### ortho

def _alpha_above_q(q, values):
    return isinstance(q, str) or abs(values["alpha"]) > abs(q)


def _abcd_small(q, values):
    prod = values["a"] * values["b"] * values["c"] * values["d"]
    return isinstance(q, str) or abs(prod) < abs(q) ** 3


def _thm314_region(q, values):
    return isinstance(q, str) or (abs(values["a"] * values["b"]) > 1 and abs(q * values["b"]) < abs(values["a"]))


def _qa_large(q, values):
    """|q a| >= 2, where the lattice sums in 1/(q a)^m settle in a few dozen terms."""
    return isinstance(q, str) or abs(q * values["a"]) >= 2


def _thm314_fast(q, values):
    return _thm314_region(q, values) and _qa_large(q, values)


def _big_q_jacobi_duals(q, values):
    """Dual q-Hahn parameters sqrt(qab), sqrt(qa/b), c sqrt(q/(ab)) inside the unit circle."""
    if isinstance(q, str):
        return True
    a, b, c = values["a"], values["b"], values["c"]
    return max(abs(q * a * b), abs(q * a / b), c * c * abs(q / (a * b))) < 1


def _little_q_jacobi_duals(q, values):
    """Al-Salam-Chihara parameters sqrt(qab), sqrt(qb/a) inside the unit circle."""
    return isinstance(q, str) or max(abs(q * values["a"] * values["b"]), abs(q * values["b"] / values["a"])) < 1


_ALPHA = Span(0.5, 0.9)
_ALPHA_Q = Span(0.65, 0.95)

ORTHO_SPANS = {
    "AWO": _spans("abcd", SMALL),
    "cdqHO": _spans("abc", Span(0.2, 0.7)),
    "ASCO": _spans("ab", Span(0.2, 0.7)),
    "cbqHO": _spans("a", Span(0.2, 0.7)),
    "cqHO": {},
    "theo33": _spans("abc", Span(0.4, 0.8)),
    "corr311": _spans("ab", Span(0.4, 0.8)),
    "corr318": _spans("a", Span(0.4, 0.8)),
    "corr326": {},
    "w2": {},
    "w3": {"alpha": Span(0.3, 0.7, (0.4, 1.2))},
    "AKporth": {"a": OUTER, "b": Span(0.3, 0.7), "c": Span(0.3, 0.7)},
    "ASCorthi": {"a": OUTER, "b": Span(0.3, 0.7)},
    "cbqHorthi": {"a": OUTER},
    "DcdqiHO": {"a": OUTER, "b": Span(0.3, 0.7), "c": Span(0.3, 0.7)},
    "idqiASCO": {"a": OUTER, "b": Span(0.3, 0.7)},
    "qBesselcbqiHO": {"a": OUTER},
    "lqJO": {"a": Span(0.3, 0.8), "b": Span(0.2, 0.7)},
    "thm314": {"a": LARGE, "b": OUTER},
    "thm316": {"a": LARGE, "b": OUTER, "c": Span(0.2, 0.7)},
    "thm368": {"a": LARGE},
    "thm248": {"a": LARGE},
    "eq189": {**_spans("abc", SMALL), "alpha": _ALPHA},
    "thm420": {**_spans("ab", SMALL), "alpha": _ALPHA},
    "cbqiH-bilateral": {"a": SMALL, "alpha": _ALPHA},
    "ismail-masson": {"alpha": _ALPHA_Q},
    "bqJO": {"a": Span(0.5, 1.2), "b": Span(0.2, 0.8), "c": Span(-0.8, -0.2)},
    "cobqJ": _spans("abc", Span(0.3, 0.7)),
    "colqJ": _spans("ab", Span(0.3, 0.7)),
    "COqiBf": {"a": Span(-0.8, -0.3)},
}

_ORTHO_ACCEPT = {"thm314": _thm314_fast, "thm316": _thm314_fast, "thm248": _qa_large, "thm368": _qa_large,
                 "cobqJ": _big_q_jacobi_duals, "colqJ": _little_q_jacobi_duals, "ismail-masson": _alpha_above_q}


def _ortho_suite_id(rel):
    name = rel.family if rel.kind == "theta" else rel.id.lower()
    return f"ortho.{rel.kind}.{name}"


def _relation(rid):
    def run(P, inputs, nmax, cfg):
        out = _gram(ortho.verify_relation(rid, nmax, P, inputs.get("alpha"), cfg.ortho))
        if out.diagnostics.get("inside_stated_region") is False:
            out.diagnostics["note"] = "parameters outside the stated region"
        return out
    return run


def _closure(rid):
    def run(P, inputs, nmax, cfg):
        return _gram(ortho.verify_discrete_closure(rid, nmax, P, cfg.ortho))
    return run


def _mass(mid):
    def run(P, inputs, nmax, cfg):
        r = ortho.verify_total_mass(mid, P, inputs.get("alpha"), inputs.get("f"), inputs.get("g"), cfg.ortho)
        return Outcome([Row({"mass": mid}, None, None, r)])
    return run


def _run_swap(P, inputs, nmax, cfg):
    return Outcome([Row({"m": m, "m2": m2}, None, None, ortho.dcdqiho_swap_residual(m, m2, P, cfg.ortho))
                    for m in range(nmax + 1) for m2 in range(m, nmax + 1)])


def _slope(rid):
    def run(P, inputs, nmax, cfg):
        rows = [Row({"n": n, "m": m}, measured, predicted, rel)
                for n in range(nmax + 1)
                for m, measured, predicted, rel in ortho.summand_slope_check(rid, n, P)]
        last = [r for r in rows if r.index["m"] == rows[-1].index["m"]]
        return Outcome(rows, judged=max(r.residual for r in last))
    return run


def _decay(rid):
    def run(P, inputs, nmax, cfg):
        decay = ortho.weight_decay(rid, P)
        rows = [Row({"k": k}, c, decay.target, abs(c / decay.target - 1))
                for k, c in zip(decay.ks[1:-1], decay.curvature)]
        return Outcome(rows, {"ratios": decay.ratios}, judged=rows[-1].residual)
    return run


def _ttrr(fid, rid):
    def run(P, inputs, nmax, cfg):
        return Outcome([Row({"n": n}, None, None, r)
                        for n, r in enumerate(ortho.extract_ttrr_and_verify_norm(fid, rid, nmax, P))])
    return run


for _rel in ortho.RELATIONS.values():
    _register(Suite(_ortho_suite_id(_rel), _relation(_rel.id), 1e-6, nmax=4, spans=ORTHO_SPANS[_rel.id],
                    accept=_ORTHO_ACCEPT.get(_rel.id)))
for _rid in ortho.CLOSURE_PAIRS:
    _register(Suite(f"ortho.closure.{_rid.lower()}", _closure(_rid), 1e-6, nmax=3, spans=ORTHO_SPANS[_rid],
                    accept=_ORTHO_ACCEPT.get(_rid)))
_register(Suite("ortho.swap.dcdqiho", _run_swap, 1e-7, nmax=3, spans=ORTHO_SPANS["DcdqiHO"]))
for _rid in ortho.SUMMAND_RATES:
    _register(Suite(f"ortho.slope.{_rid.lower()}", _slope(_rid), 1e-2, nmax=2, spans=ORTHO_SPANS[_rid]))
for _rid in ("theo33", "corr311", "corr318", "corr326"):
    _register(Suite(f"ortho.decay.{_rid}", _decay(_rid), 1e-3, spans=ORTHO_SPANS[_rid]))
for _fid, _rid in (("cqh", "cqHO"), ("asc", "ASCO"), ("cdqh", "cdqHO")):
    _register(Suite(f"ortho.ttrr.{_fid}", _ttrr(_fid, _rid), 1e-7, nmax=6, spans=ORTHO_SPANS[_rid]))

_register(Suite("ortho.mass.askey_qbeta", _mass("askey_qbeta"), 1e-7,
                spans=_spans("abcd", Span(0.1, 0.4)), accept=_abcd_small))
_register(Suite("ortho.mass.ismail_masson_qbeta", _mass("ismail_masson_qbeta"), 1e-7,
                spans={**_spans("abcd", Span(0.1, 0.4)),
                       "f": Span(0.5, 1.5, (0.3, 1.2)), "g": Span(0.5, 1.5, (-1.2, -0.3))}))
_register(Suite("ortho.mass.bilateral_6psi6", _mass("bilateral_6psi6"), 1e-7,
                spans={**_spans("abcd", Span(0.1, 0.5)), "alpha": _ALPHA_Q}, accept=_alpha_above_q))


##### generating functions

GF_SPANS = {
    "cdqih_G": _spans("abc", MID),
    "master": {**_spans("ab", MID), "gamma": Span(0.2, 0.6), "delta": Span(0.2, 0.6)},
    "cor_gamma0": {**_spans("ab", MID), "delta": Span(0.2, 0.6)},
    "cor_delta0": {**_spans("ab", MID), "gamma": Span(0.2, 0.6)},
    "cor_delta_ab": _spans("ab", MID),
    "cor_delta_gamma": _spans("ab", MID),
    "cbqih_I": _spans("a", MID),
    "ismail_corrected_V": _spans("abc", Span(0.5, 1.2)),
}


def _gf(gid):
    def run(P, inputs, nmax, cfg):
        z = _scalar(inputs, "z", P)
        gamma, delta = _scalar(inputs, "gamma", P, False), _scalar(inputs, "delta", P, False)
        residuals = genfun.verify_gf_coefficients(gid, nmax, z, P, gamma, delta, cfg.gf)
        return Outcome([Row({"n": n}, None, None, r) for n, r in enumerate(residuals)])
    return run


def _run_master_limits(P, inputs, nmax, cfg):
    z = _scalar(inputs, "z", P)
    out = genfun.verify_master_limits(nmax, z, P, _scalar(inputs, "gamma", P), _scalar(inputs, "delta", P), cfg.gf)
    return Outcome([Row({"corollary": name}, None, None, r) for name, r in sorted(out.items())])


for _gid in genfun.GF_IDS:
    _register(Suite(f"genfun.{_gid}", _gf(_gid), 1e-7, nmax=6, spans={**GF_SPANS[_gid], "z": Span(1.1, 1.6, (0.2, 1.2))}))
_register(Suite("genfun.master_limits", _run_master_limits, 1e-6, nmax=4,
                spans={**GF_SPANS["master"], "z": Span(1.1, 1.6, (0.2, 1.2))}))


##### asymptotics

@dataclass(frozen=True)
class _AsymSpec:
    grid: tuple
    spans: dict
    fixed: int = 0
    derive: Optional[Callable] = None


def _tie(**pairs):
    def derive(values):
        out = dict(values)
        for name, (source, sign) in pairs.items():
            out[name] = sign * out[source]
        return out
    return derive


_GROW = tuple(range(10, 31))

ASYM_SPECS = {
    "lem346": _AsymSpec(_GROW, _spans("abc", MID), fixed=2),
    "lem46": _AsymSpec(_GROW, {**_spans("abc", MID), "z": Z}),
    "lem47a": _AsymSpec(_GROW, _spans("abc", MID), fixed=2),
    "lem47b": _AsymSpec(_GROW, _spans("abc", MID), fixed=2),
    "lem410": _AsymSpec(_GROW, _spans("ab", MID), fixed=2),
    "lem413.lt": _AsymSpec(tuple(range(10, 41)), {"a": Span(0.2, 0.4), "b": Span(0.6, 0.9), "z": Z}),
    "lem413.gt": _AsymSpec(tuple(range(10, 41)), {"a": Span(0.6, 0.9), "b": Span(0.2, 0.4), "z": Z}),
    "lem413.equal": _AsymSpec(tuple(range(10, 41)), {"a": Span(0.3, 0.7), "z": Z}, derive=_tie(b=("a", -1))),
    "lem413.critical": _AsymSpec(tuple(range(10, 41)), {"a": Span(0.3, 0.7), "z": Z}, derive=_tie(b=("a", 1))),
    "lem414": _AsymSpec(_GROW, _spans("ab", MID), fixed=2),
    "lem416": _AsymSpec(_GROW, _spans("a", MID), fixed=2),
    "lem418": _AsymSpec(_GROW, {"a": MID, "z": Z}),
    "lem420": _AsymSpec(_GROW, _spans("a", MID), fixed=2),
    "lem4.10": _AsymSpec(tuple(range(5, 26)), {**_spans("abc", Span(0.3, 0.7)), "alpha": _ALPHA}, fixed=2),
}


def _asym_outcome(report, cfg, extra_ok=True):
    rows = [Row({"index": i}, e, p, d)
            for i, e, p, d in zip(report.index_grid, report.exact, report.predicted, report.deviations)]
    diag = dict(report.diagnostics)
    diag["fitted_error_order"] = report.fitted_error_order
    ok = report.consistent(tol=cfg.asym.slope_tol) and extra_ok
    return Outcome(rows, diag, judged=report.deviations[-1], ok=ok)


def _asym(name, spec):
    lemma, _, case = name.partition(".")
    if lemma == "lem4":
        lemma, case = name, ""

    def run(P, inputs, nmax, cfg):
        report = asym.verify_asym(lemma, spec.grid, P, pt=inputs.get("z"), fixed=spec.fixed,
                                  alpha=inputs.get("alpha"), case=case or None, cfg=cfg.asym)
        return _asym_outcome(report, cfg)
    return run


_DARBOUX = {
    "cbqih_I": (lambda P: -1 / P.a, {"a": MID}, None),
    "cor_delta_ab": (lambda P: -1 / P.b, {"a": Span(0.2, 0.4), "b": Span(0.6, 0.9)}, None),
    "cor_delta_gamma": (lambda P: -1 / P.a, {"a": Span(0.3, 0.7)}, _tie(b=("a", 1))),
    "cdqih_G": (lambda P: 1 / (P.a * P.b * P.c), {"a": Span(0.3, 0.6), "b": Span(1.2, 1.8), "c": Span(1.2, 1.8)},
                None),
}


def _darboux(gid, pole):
    def run(P, inputs, nmax, cfg):
        report = asym.darboux_from_gf(gid, pole(P), _GROW, inputs.get("z"), P, cfg=cfg.asym)
        residue = report.diagnostics.get("residue_residuals", {})
        settled = report.diagnostics["residue_tols"]
        ok = all(r <= settled[k] for k, r in residue.items())
        return _asym_outcome(report, cfg, ok)
    return run


for _name, _spec in ASYM_SPECS.items():
    _register(Suite(f"asym.{_name}", _asym(_name, _spec), 5e-2, spans=_spec.spans, derive=_spec.derive))
for _gid, (_pole, _sp, _derive) in _DARBOUX.items():
    _register(Suite(f"asym.darboux.{_gid}", _darboux(_gid, _pole), 5e-2, spans={**_sp, "z": Z}, derive=_derive))


##### Running

def run_case(suite, case, nmax, cfg):
    return suite.run(case_params(case, cfg), case.values, nmax, cfg)


def _inputs(case):
    out = {} if case.q is None else {"q": case.q}
    out.update(case.values)
    return out


def run_suites(suite_ids, grid, cfg, logger, tol=None, nmax=None, seed=0):
    """Every case of every suite over one grid, in (suite, case key) order."""
    jobs = []
    meta = {}
    for sid in suite_ids:
        suite = SUITES[sid]
        cases = suite.cases(grid, seed)
        if not cases:
            raise DomainError(f"grid {grid.name!r} gives no cases for {sid}")
        limit = nmax if nmax is not None else (grid.nmax if grid.nmax is not None else suite.nmax)
        for case in cases:
            key = f"{sid}|{case.key}"
            meta[key] = (suite, case, tol if tol is not None else suite.tol)
            jobs.append((key, lambda s=suite, c=case, n=limit: run_case(s, c, n, cfg), sid))
        logger.log(f"Suite {sid}: {len(cases)} case(s), nmax {limit}", "INFO")

    runner = SuiteRunner(cfg, logger)
    try:
        records = runner.run(jobs)
    finally:
        runner.shutdown()

    results = []
    for rec in records:
        suite, case, case_tol = meta[rec.key]
        if rec.success:
            out = rec.result
            residual = out.residual
            passed = residual <= case_tol and out.ok
            result = CaseResult(suite.id, case.key, _inputs(case), out.rows, residual, passed, case_tol,
                                out.diagnostics, duration=rec.duration)
        else:
            result = CaseResult(suite.id, case.key, _inputs(case), [], None, False, case_tol,
                                error=rec.error, duration=rec.duration)
        if not result.passed:
            if result.error:
                reason = result.error
            elif result.residual > case_tol:
                reason = f"residual {result.residual:.3g} > tol {case_tol:g}"
            else:
                reason = "error order or residue check failed"
            logger.log(f"{suite.id} {case.key} failed: {reason}", "WARNING")
        results.append(result)
    for sid in suite_ids:
        mine = [r for r in results if r.suite == sid]
        logger.log(f"Suite {sid}: {sum(r.passed for r in mine)}/{len(mine)} passed", "INFO")
    return results
