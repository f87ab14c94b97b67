"""
qaskey asym.py
Large-degree and large-lattice asymptotics of the q^-1-families, checked against
exact values, and Darboux extraction of the dominant singularities of the
generating functions.
"""

import math
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional

from qaskey.errors import DomainError, PoleOrderError, PrecisionError
from qaskey.families import ParamSet, PointZ, eval_family
from qaskey.genfun import eval_gf, gf_coefficient
from qaskey.qcore import LatticePoint, binom2, qbinom, qpoch, qpoch_inf, rel_residual
from qaskey.series import eprime_q, phi, relative_noise, track_condition

__all__ = [
    "AsymConfig", "AsymLemma", "AsymReport", "LEMMAS", "LEM413_CASES",
    "eval_asym", "verify_asym", "darboux_from_gf", "lambda_correction",
    "lem420_exact", "lem413_case_gain",
]


@dataclass
class AsymConfig:
    """Default configuration"""
    slope_tol: float     = 0.3
    fit_fraction: float  = 0.5          # share of the grid (from the end) used by the slope fit
    exact_tol: float     = 1e-8         # allowed drift of an exact value against the guard precision
    guard_bits: int      = 53
    noise_floor: float   = 1e-13        # deviations below this are left out of the fit
    pole_eps: float      = 1e-3         # first distance (relative) from the pole
    pole_points: int     = 7
    pole_tol: float      = 1e-6


DEFAULT_ASYM = AsymConfig()

LEM413_CASES = ("lt", "gt", "equal", "critical")     # |a|<|b|, |a|>|b|, |a|=|b| with a != b, a = b


@dataclass(frozen=True)
class AsymLemma:
    id: str
    case: Optional[str] = None

    def __post_init__(self):
        if self.id not in LEMMAS:
            raise DomainError(f"unknown asymptotic lemma {self.id!r}")
        if self.id == "lem413":
            if self.case not in LEM413_CASES:
                raise DomainError(f"lem413 needs a case from {', '.join(LEM413_CASES)}")
        elif self.case is not None:
            raise DomainError(f"{self.id} has no cases")


@dataclass
class AsymReport:
    lemma: str
    index_grid: list
    exact: list
    predicted: list
    ratios: list                  # |exact / predicted|
    deviations: list              # |exact / predicted - 1|
    fitted_error_order: Optional[float]
    diagnostics: dict = field(default_factory=dict)

    def consistent(self, expected=-1.0, tol=DEFAULT_ASYM.slope_tol):
        """The fitted order is the expected one or faster."""
        return self.fitted_error_order is None or self.fitted_error_order <= expected + tol

    def eventually_decreasing(self, fraction=DEFAULT_ASYM.fit_fraction):
        tail = self.deviations[-max(2, math.ceil(len(self.deviations) * fraction)):]
        return all(b <= a for a, b in zip(tail, tail[1:]))


##### Points on the lattice and the canonical z

def _zlat(m, P):
    """z = q^-m a."""
    return PointZ.from_lattice(LatticePoint(-m, P.a), P.q)


def _zpoint(z, P):
    if isinstance(z, PointZ):
        if z.lattice is not None:
            return PointZ.from_lattice(z.lattice, P.q)
        z = z.z
    return PointZ.from_z(P.q.convert(z), P.q)


def _on_cbq_lattice(pt, a, q, cap=200):
    """z or 1/z equals q^-m a for some m >= 0."""
    for z in (pt.z, 1 / pt.z):
        r = z / a
        if abs(r) < 1:
            continue
        m = int(q.ctx.nint(q.ctx.log(abs(r)) / -q.ctx.log(abs(q.q))))
        if 0 <= m <= cap and abs(r - q.q ** (-m)) <= 1e-10 * abs(r):
            return True
    return False


##### Predictions

def lambda_correction(pt, a, q):
    """Second-order term of the a = b Al-Salam-Chihara asymptotics."""
    z = pt.z
    qq = q.q
    d1 = qpoch_inf(z / a, q)
    d2 = qpoch_inf(1 / (a * z), q)
    if d1 == 0 or d2 == 0:
        raise DomainError("the critical-case correction is undefined where (z^+-1/a;q)_inf vanishes")
    return (z * eprime_q(-z / a, q) / (a * d1) + eprime_q(-1 / (a * z), q) / (z * a * d2)
            - 2 * qq * eprime_q(-qq, q) / qpoch_inf(qq, q))


def _single_term(n, pt, lead, other, q):
    """q^-C(n) (-lead)^n (z^+-/lead;q)_inf / (other/lead;q)_inf."""
    qq = q.q
    return (qq ** (-binom2(n)) * (-lead) ** n * qpoch_inf(pt.times(1 / lead), q)
            * qpoch_inf(pt.over(1 / lead), q) / qpoch_inf(other / lead, q))


def _check_case(case, a, b, tol=1e-12):
    ma, mb = abs(a), abs(b)
    same_mod = abs(ma - mb) <= tol * max(ma, mb)
    ok = {
        "lt": ma < mb and not same_mod,
        "gt": ma > mb and not same_mod,
        "equal": same_mod and abs(a - b) > tol * ma,
        "critical": abs(a - b) <= tol * ma,
    }[case]
    if not ok:
        raise DomainError(f"lem413 case {case!r} does not match a={a}, b={b}")


def _p_lem346(m, n, pt, alpha, P, case):
    return P.q.q ** (-n * m) * P.a ** n


def _p_lem46(n, m, pt, alpha, P, case):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    return (q.q ** (-2 * binom2(n)) * (a * b * c) ** n * qpoch_inf(1 / (a * b), q) * qpoch_inf(1 / (a * c), q)
            * phi([pt.times(1 / a), pt.over(1 / a)], [1 / (a * b), 1 / (a * c)], q, 1 / (b * c)))


def _lattice_22(m, a, d1, d2, arg, q):
    return phi([q.q ** (-m), q.q ** m / (a * a)], [d1, d2], q, arg)


def _p_lem47a(n, m, pt, alpha, P, case):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    return (q.q ** (-2 * binom2(n)) * (a * b * c) ** n * qpoch_inf(1 / (a * b), q) * qpoch_inf(1 / (a * c), q)
            * _lattice_22(m, a, 1 / (a * b), 1 / (a * c), 1 / (b * c), q))


def _p_lem47b(n, m, pt, alpha, P, case):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (-2 * binom2(n)) * (a / (qq * qq * b * c)) ** n
            * qpoch_inf(qq * b / a, q) * qpoch_inf(qq * c / a, q)
            * _lattice_22(m, a, qq * b / a, qq * c / a, qq * qq * b * c, q))


def _p_lem410(m, n, pt, alpha, P, case):
    q = P.q
    return q.q ** (-binom2(n)) * (-P.a) ** n * qpoch(q.q ** (-m), q, n)


def _p_lem413(n, m, pt, alpha, P, case):
    a, b = P.need("a", "b")
    q = P.q
    _check_case(case, a, b)
    if case == "lt":
        return _single_term(n, pt, b, a, q)
    if case == "gt":
        return _single_term(n, pt, a, b, q)
    if case == "equal":
        return _single_term(n, pt, a, b, q) + _single_term(n, pt, b, a, q)
    qq = q.q
    return ((n + 1 + lambda_correction(pt, a, q)) * qq ** (-binom2(n)) * (-a) ** n
            * qpoch_inf(pt.times(1 / a), q) * qpoch_inf(pt.over(1 / a), q) / qpoch_inf(qq, q))


def _p_lem414(n, m, pt, alpha, P, case):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qq ** (-binom2(m)) * (-a / (qq * b)) ** m * qpoch_inf(1 / (a * b), q)
            * qpoch(qq * b / a, q, m) / qpoch(1 / (a * b), q, m) * qq ** (-binom2(n)) * (-b) ** n)


def _p_lem418(n, m, pt, alpha, P, case):
    (a,) = P.need("a")
    q = P.q
    if _on_cbq_lattice(pt, a, q):
        raise DomainError("z = q^-m a is a lattice point; use lem420 there")
    return q.q ** (-binom2(n)) * (-a) ** n * qpoch_inf(pt.times(1 / a), q) * qpoch_inf(pt.over(1 / a), q)


def _p_lem420(n, m, pt, alpha, P, case):
    (a,) = P.need("a")
    qq = P.q.q
    return qq ** (-2 * binom2(m)) * (a * a / qq) ** m * a ** (-n)


def _p_lem410_bilateral(k, n, pt, alpha, P, case):
    qq = P.q.q
    if k >= 0:
        return alpha ** (-n) * qq ** (-n * k)
    return alpha ** n * qq ** (n * k)


##### Exact values

def _e_cdqih_lattice(m, n, pt, alpha, P):
    return eval_family("cdqih", n, _zlat(m, P), P)


def _e_cdqih_n(n, m, pt, alpha, P):
    return eval_family("cdqih", n, pt, P)


def _e_lem47a(n, m, pt, alpha, P):
    return eval_family("cdqih", n, _zlat(m, P), P)


def _e_lem47b(n, m, pt, alpha, P):
    b, c = P.need("b", "c")
    qq = P.q.q
    return eval_family("cdqih", n, _zlat(m, P), P.with_params(b=1 / (qq * b), c=1 / (qq * c)))


def _e_qiasc_lattice(m, n, pt, alpha, P):
    return eval_family("qiasc", n, _zlat(m, P), P)


def _e_qiasc_n(n, m, pt, alpha, P):
    return eval_family("qiasc", n, pt, P)


def _e_qiasc_lattice_n(n, m, pt, alpha, P):
    return eval_family("qiasc", n, _zlat(m, P), P)


def _e_cbqih_lattice(m, n, pt, alpha, P):
    return eval_family("cbqih", n, _zlat(m, P), P)


def _e_cbqih_n(n, m, pt, alpha, P):
    return eval_family("cbqih", n, pt, P)


def _e_cbqih_lattice_n(n, m, pt, alpha, P):
    return eval_family("cbqih", n, _zlat(m, P), P)


def _e_bilateral(k, n, pt, alpha, P):
    return eval_family("cdqih", n, PointZ.from_lattice(LatticePoint(-k, 1 / alpha), P.q), P)


@dataclass(frozen=True)
class LemmaInfo:
    family: str
    index: str          # the index that grows: 'm' (lattice), 'n' (degree) or 'k' (bilateral)
    needs: str          # 'fixed' (the other integer), 'pt' (a point z) or 'alpha'
    predict: Callable
    exact: Callable
    order: float = -1.0


LEMMAS = {
    "lem346": LemmaInfo("cdqih", "m", "fixed", _p_lem346, _e_cdqih_lattice),
    "lem46": LemmaInfo("cdqih", "n", "pt", _p_lem46, _e_cdqih_n),
    "lem47a": LemmaInfo("cdqih", "n", "fixed", _p_lem47a, _e_lem47a),
    "lem47b": LemmaInfo("cdqih", "n", "fixed", _p_lem47b, _e_lem47b),
    "lem410": LemmaInfo("qiasc", "m", "fixed", _p_lem410, _e_qiasc_lattice),
    "lem413": LemmaInfo("qiasc", "n", "pt", _p_lem413, _e_qiasc_n),
    "lem414": LemmaInfo("qiasc", "n", "fixed", _p_lem414, _e_qiasc_lattice_n),
    "lem416": LemmaInfo("cbqih", "m", "fixed", _p_lem346, _e_cbqih_lattice),
    "lem418": LemmaInfo("cbqih", "n", "pt", _p_lem418, _e_cbqih_n),
    "lem420": LemmaInfo("cbqih", "n", "fixed", _p_lem420, _e_cbqih_lattice_n),
    "lem4.10": LemmaInfo("cdqih", "k", "alpha", _p_lem410_bilateral, _e_bilateral),
}


def _lemma(lemma, case=None):
    if isinstance(lemma, AsymLemma):
        return lemma
    return AsymLemma(lemma, case)


def _inputs(info, P, pt, alpha):
    if info.needs == "pt":
        if pt is None:
            raise DomainError("this lemma needs a point z")
        return _zpoint(pt, P), None
    if info.needs == "alpha":
        if alpha is None or alpha == 0:
            raise DomainError("this lemma needs a nonzero alpha")
        return None, P.q.convert(alpha)
    return None, None


def eval_asym(lemma, index, params, pt=None, fixed=0, alpha=None, case=None):
    """Predicted value of the lemma at the growing index (m, n or k)."""
    lem = _lemma(lemma, case)
    info = LEMMAS[lem.id]
    P = params
    P.q.require_disk("asymptotics")
    if info.index != "k" and index < 0:
        raise DomainError("the growing index must be >= 0")
    z, al = _inputs(info, P, pt, alpha)
    return info.predict(index, fixed, z, al, P, lem.case)


##### Exact values under a precision guard

def _guarded(fn, P, cfg):
    """fn(P) at the working precision, with its drift against a run with guard bits.

    Sums may cancel to at most exact_tol/100 of their value. A working value past
    that budget is replaced by the guard value; PrecisionError when the guard run
    is past it as well, or when the two values drift apart.
    """
    budget = cfg.exact_tol / 100
    with track_condition(propagate=False) as log:
        value = fn(P)
    guard = P.on(P.q.promoted(cfg.guard_bits))
    with track_condition(propagate=False) as guard_log:
        ref = fn(guard)
    if relative_noise(guard_log.worst, guard.q) > budget:
        raise PrecisionError(f"exact value cancels to {relative_noise(guard_log.worst, guard.q):.3g} "
                             f"even with {cfg.guard_bits} guard bits")
    if relative_noise(log.worst, P.q) > budget:
        value = P.q.narrow(ref)
    drift = rel_residual(value, ref)
    if drift > cfg.exact_tol:
        raise PrecisionError(f"exact value drifted by {drift:.3g} against {cfg.guard_bits} guard bits")
    return value, drift


def _fit_order(indices, deviations, cfg):
    count = max(2, math.ceil(len(indices) * cfg.fit_fraction))
    pts = [(math.log(abs(i)), math.log(d)) for i, d in zip(indices[-count:], deviations[-count:])
           if i != 0 and d > cfg.noise_floor]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    xs, ys = zip(*pts)
    return statistics.linear_regression(xs, ys).slope


def _report(name, grid, exact, predicted, cfg, diagnostics, fit_grid=None):
    ratios, devs = [], []
    for e, p in zip(exact, predicted):
        if p == 0:
            raise DomainError("the prediction vanishes at this point")
        ratios.append(float(abs(e / p)))
        devs.append(float(abs(e / p - 1)))
    return AsymReport(lemma=name, index_grid=list(grid), exact=exact, predicted=predicted, ratios=ratios,
                      deviations=devs, fitted_error_order=_fit_order(list(fit_grid or grid), devs, cfg),
                      diagnostics=diagnostics)


def verify_asym(lemma, grid, params, pt=None, fixed=0, alpha=None, case=None, cfg=None):
    """Exact values against the lemma over an index grid, with the fitted error order."""
    cfg = cfg or DEFAULT_ASYM
    lem = _lemma(lemma, case)
    info = LEMMAS[lem.id]
    grid = list(grid)
    if not grid:
        raise DomainError("empty index grid")
    P = params
    exact, predicted, drifts = [], [], []
    for idx in grid:
        predicted.append(eval_asym(lem, idx, P, pt, fixed, alpha))

        def fn(Q, idx=idx):
            z, al = _inputs(info, Q, pt, alpha)
            return info.exact(idx, fixed, z, al, Q)

        value, drift = _guarded(fn, P, cfg)
        exact.append(value)
        drifts.append(drift)
    name = lem.id if lem.case is None else f"{lem.id}:{lem.case}"
    fit_grid = [abs(i) for i in grid] if info.index == "k" else grid
    return _report(name, grid, exact, predicted, cfg, {"max_drift": max(drifts)}, fit_grid)


def lem420_exact(n, m, params):
    """H_n at z = q^-m a from the finite q-binomial sum (n >= m)."""
    if n < m:
        raise DomainError("the lattice sum needs n >= m")
    P = params
    q = P.q
    qq = q.q
    z = P.a * qq ** (-m)
    qn = qpoch(qq, q, n)
    total = q.ctx.zero
    for k in range(m + 1):
        total += qbinom(m, k, q) * qn * qq ** (k * k - k * n) * z ** (2 * k - n) / qpoch(qq, q, n - k)
    return total


def lem413_case_gain(n, pt, params):
    """(two-term deviation, best single-term deviation) in the |a| = |b|, a != b case."""
    a, b = params.need("a", "b")
    q = params.q
    _check_case("equal", a, b)
    z = _zpoint(pt, params)
    exact = eval_family("qiasc", n, z, params)
    only_a = _single_term(n, z, a, b, q)
    only_b = _single_term(n, z, b, a, q)
    return float(abs(exact / (only_a + only_b) - 1)), float(min(abs(exact / only_a - 1), abs(exact / only_b - 1)))


##### Darboux extraction from the generating functions

def _extrapolate(xs, ys):
    """Value at 0 of the polynomial through (xs, ys) by Neville's scheme."""
    p = list(ys)
    n = len(xs)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i])
    return p[0]


def _limit(xs, ys, tol):
    full = _extrapolate(xs, ys)
    part = _extrapolate(xs[:-1], ys[:-1])
    scale = max(abs(y) for y in ys)
    stable = abs(full - part) <= tol * max(abs(full), tol * scale)
    nonzero = abs(full) > tol * scale
    return full, stable and nonzero


def _near(t0, cand, tol=1e-12):
    return abs(t0 - cand) <= tol * abs(cand)


def _expected_residues(gid, t0, pt, P):
    """Closed forms of the principal-part coefficients at the known poles."""
    q = P.q
    qq = q.q

    def zpm(c):
        return qpoch_inf(pt.times(1 / c), q) * qpoch_inf(pt.over(1 / c), q)

    if gid == "cbqih_I":
        (a,) = P.need("a")
        if _near(t0, -1 / a):
            return {"G1": zpm(a) / qpoch_inf(qq, q)}
    elif gid == "cor_delta_gamma":
        a, b = P.need("a", "b")
        if _near(a, b) and _near(t0, -1 / a):
            g2 = zpm(a) / qpoch_inf(qq, q) ** 2
            return {"G2": g2, "G1": g2 * lambda_correction(pt, a, q)}
        for lead, other in ((b, a), (a, b)):
            if _near(t0, -1 / lead):
                return {"G1": zpm(lead) / (qpoch_inf(qq, q) * qpoch_inf(other / lead, q))}
    elif gid == "cor_delta_ab":
        a, b = P.need("a", "b")
        if _near(t0, -1 / b):
            return {"G1": zpm(b) / (qpoch_inf(qq, q) * qpoch_inf(1 / (a * b), q) * qpoch_inf(a / b, q))}
    elif gid == "cdqih_G":
        a, b, c = P.need("a", "b", "c")
        if _near(t0, 1 / (a * b * c)):
            return {"G1": qpoch_inf(1 / (a * c), q) / qpoch_inf(qq, q)
                    * phi([pt.times(1 / a), pt.over(1 / a)], [1 / (a * b), 1 / (a * c)], q, 1 / (b * c))}
    return None


def darboux_from_gf(gid, pole, ns, pt, params, gamma=None, delta=None, cfg=None):
    """Principal part of the generating function at `pole` and the coefficients it predicts."""
    cfg = cfg or DEFAULT_ASYM
    P = params
    q = P.q
    ctx = q.ctx
    t0 = q.convert(pole)
    if t0 == 0:
        raise PoleOrderError("t = 0 is a point of analyticity")
    z = _zpoint(pt, P)
    eps = [ctx.mpf(cfg.pole_eps) / 2 ** j for j in range(cfg.pole_points)]
    values = [eval_gf(gid, t0 * (1 - e), z, P, gamma, delta, continued=True) for e in eps]

    g1, simple = _limit(eps, [e * v for e, v in zip(eps, values)], cfg.pole_tol)
    if simple:
        residues = {"G1": g1}
        settled = {"G1": cfg.pole_tol}
        order = 1
    else:
        s2 = [e * e * v for e, v in zip(eps, values)]
        g2, double = _limit(eps, s2, cfg.pole_tol)
        if not double:
            raise PoleOrderError(f"no simple or double pole at t = {t0}")
        g1, ok = _limit(eps, [(s - g2) / e for e, s in zip(eps, s2)], math.sqrt(cfg.pole_tol))
        if not ok:
            raise PoleOrderError(f"the second coefficient of the double pole at t = {t0} did not settle")
        residues = {"G2": g2, "G1": g1}
        settled = {"G2": cfg.pole_tol, "G1": math.sqrt(cfg.pole_tol)}
        order = 2

    diagnostics = {"pole": t0, "order": order, "residues": residues, "residue_tols": settled}
    expected = _expected_residues(gid, t0, z, P)
    if expected is not None:
        diagnostics["expected"] = expected
        diagnostics["residue_residuals"] = {k: rel_residual(residues[k], v) for k, v in expected.items()
                                            if k in residues}

    ns = list(ns)
    if not ns:
        raise DomainError("empty degree grid")
    exact, predicted, drifts = [], [], []
    for n in ns:
        scale = t0 ** (-n)
        predicted.append(scale * ((n + 1) * residues["G2"] + residues["G1"]) if order == 2
                         else scale * residues["G1"])
        value, drift = _guarded(lambda Q, n=n: gf_coefficient(gid, n, _zpoint(z, Q), Q, gamma, delta), P, cfg)
        exact.append(value)
        drifts.append(drift)
    diagnostics["max_drift"] = max(drifts)
    return _report(f"darboux:{gid}", ns, exact, predicted, cfg, diagnostics)
