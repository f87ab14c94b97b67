"""
qaskey series.py
Basic hypergeometric series r_phi_s^m (zero-padded forms included), closed-form summations,
transformations and limit transitions.
"""

import math
import random
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace
from typing import Optional

from qaskey.errors import (ConvergenceError, DivergenceError, DomainError, PrecisionError, ShapeError,
                           SingularRepresentationError)
from qaskey.qcore import BaseQ, _factor, binom2, qpoch, qpoch_inf, rel_residual

__all__ = [
    "SeriesConfig", "SeriesSpec", "SeriesValue", "Transformed",
    "eval_phi", "phi", "eval_summation", "apply_transform", "verify_limit_transition",
    "verify_summation_grid", "summation_samples", "eprime_q", "SUMMATIONS", "TRANSFORMS",
    "ConditionLog", "track_condition", "relative_noise", "is_accurate", "promotion_bits", "config_for",
    "Gated", "gated", "note_condition",
]


@dataclass
class SeriesConfig:
    """Default configuration"""
    max_terms: int   = 5000
    stop_run: int    = 3
    sing_tol: float  = 1e-9
    accuracy: float  = 1e-12          # relative error allowed from cancellation before promoting
    extra_bits: int  = 20             # bits added on top of log2(condition) when promoting
    max_promotions: int = 2           # promoted re-runs before giving up with PrecisionError


DEFAULT_SERIES = SeriesConfig()


def config_for(base):
    """Series limits carried by the base, or the defaults."""
    return base.series_cfg or DEFAULT_SERIES


##### Condition tracking

class ConditionLog:
    """Worst condition estimate of the series summed while the log is active."""

    def __init__(self):
        self.worst = 1.0
        self.count = 0

    def record(self, condition):
        self.count += 1
        if condition > self.worst:
            self.worst = condition


_ACTIVE_LOG = ContextVar("qaskey_condition_log", default=None)


@contextmanager
def track_condition(propagate=True):
    """Collect condition estimates inside the block; with propagate an enclosing log sees them too."""
    log = ConditionLog()
    token = _ACTIVE_LOG.set(log)
    try:
        yield log
    finally:
        _ACTIVE_LOG.reset(token)
        if propagate and log.count:
            note_condition(log.worst)


def note_condition(condition):
    log = _ACTIVE_LOG.get()
    if log is not None:
        log.record(condition)


def _record(value):
    note_condition(value.condition)
    return value


def relative_noise(condition, base):
    """Cancellation error estimate condition * 2^-prec of a sum on this base."""
    if condition == math.inf:
        return math.inf
    return condition * 2.0 ** (-base.prec)


def is_accurate(condition, base):
    return relative_noise(condition, base) <= config_for(base).accuracy


def promotion_bits(condition, base):
    """Extra mantissa bits that bring a sum of this condition back within the accuracy target."""
    cfg = config_for(base)
    if condition == math.inf:
        return base.prec + cfg.extra_bits
    return max(0, math.ceil(math.log2(condition / cfg.accuracy)) + cfg.extra_bits - base.prec)


@dataclass(frozen=True)
class Gated:
    value: object
    condition: float
    prec: int


def _narrow(base, value):
    if isinstance(value, (tuple, list)):
        return type(value)(_narrow(base, v) for v in value)
    if isinstance(value, int):
        return value
    return base.narrow(value)


def gated(compute, base, value=None, condition=None):
    """compute(b) for b = base, re-run on promoted bases while its sums cancel past the accuracy target.

    value and condition, when given, come from a run on base the caller already did.
    The caller's log receives the condition the accepted value carries at the
    precision of base. A value that cancels down to rounding at every precision
    is a zero of the sum and comes back as computed; anything else still short
    of the target raises PrecisionError.
    """
    cfg = config_for(base)
    run_on = base
    if condition is None:
        with track_condition(propagate=False) as log:
            value = compute(base)
        condition = log.worst
    promotions = 0
    while not is_accurate(condition, run_on):
        if run_on is not base and relative_noise(condition, run_on) >= 1 / 16:
            break                                                                  # zero of the sum
        if promotions == cfg.max_promotions:
            raise PrecisionError(f"sum still cancels to {relative_noise(condition, run_on):.3g} "
                                 f"at {run_on.prec} bits after {promotions} promotion(s)")
        run_on = run_on.promoted(promotion_bits(condition, run_on))
        with track_condition(propagate=False) as log:
            value = compute(run_on)
        condition = log.worst
        promotions += 1
    effective = condition * 2.0 ** (base.prec - run_on.prec) if condition != math.inf else condition
    note_condition(effective)
    return Gated(value=_narrow(base, value) if run_on is not base else value,
                 condition=condition, prec=run_on.prec)


@dataclass(frozen=True)
class SeriesSpec:
    numer: tuple
    denom: tuple
    base: BaseQ
    arg: object
    vdbr_offset: int = 0
    termination: Optional[int] = None

    @classmethod
    def build(cls, numer, denom, base, arg, offset=0, termination=None):
        numer = tuple(base.convert(a) for a in numer)
        denom = tuple(base.convert(b) for b in denom)
        arg = base.convert(arg)
        if termination is None:
            termination = _detect_termination(numer, base)
        elif termination < 0:
            raise DomainError("termination degree must be >= 0")
        return cls(numer=numer, denom=denom, base=base, arg=arg,
                   vdbr_offset=int(offset), termination=termination)

    @property
    def exponent(self):
        """Power of (-1)^k q^{C(k,2)} in the k-th term: 1 + s - r + m."""
        return 1 + len(self.denom) - len(self.numer) + self.vdbr_offset

    @property
    def convergence_class(self):
        if self.termination is not None:
            return "terminating"
        e = self.exponent
        if e > 0:
            return "entire"
        if e == 0:
            return "disk"
        return "divergent"

    def normalized(self):
        """Fold zero parameters into the padding offset."""
        numer = tuple(a for a in self.numer if a != 0)
        denom = tuple(b for b in self.denom if b != 0)
        offset = self.vdbr_offset - (len(self.numer) - len(numer)) + (len(self.denom) - len(denom))
        return replace(self, numer=numer, denom=denom, vdbr_offset=offset)

    def is_balanced(self, tol=1e-12):
        if len(self.numer) != len(self.denom) + 1:
            return False
        top = self.base.q * _prod(self.numer, self.base)
        bottom = _prod(self.denom, self.base)
        return rel_residual(top, bottom) <= tol

    def is_well_poised(self, tol=1e-12):
        if len(self.numer) != len(self.denom) + 1 or not self.numer:
            return False
        target = self.base.q * self.numer[0]
        return all(rel_residual(a * b, target) <= tol for a, b in zip(self.numer[1:], self.denom))


@dataclass(frozen=True)
class SeriesValue:
    value: object
    terms_used: int
    tail_bound: float
    klass: str
    condition: float


@dataclass(frozen=True)
class Transformed:
    spec: SeriesSpec
    prefactor: object

    def value(self, cfg=None):
        return self.prefactor * eval_phi(self.spec, cfg).value


def _prod(values, base):
    out = base.ctx.one
    for v in values:
        out *= v
    return out


def _detect_termination(numer, base):
    ctx = base.ctx
    logq = ctx.log(base.q)
    found = None
    for a in numer:
        if a == 0:
            continue
        n = -ctx.log(a) / logq
        k = int(ctx.nint(n.real))
        if k < 0 or abs(n - k) > 1e-8:
            continue
        if abs(a * base.q ** k - 1) < base.snap:
            found = k if found is None else min(found, k)
    return found


def phi(numer, denom, base, arg, offset=0, termination=None, cfg=None):
    """Shorthand: build a SeriesSpec and return its value."""
    return eval_phi(SeriesSpec.build(numer, denom, base, arg, offset, termination), cfg).value


def _ratio(spec, k, qk, sing_tol):
    """t_{k+1}/t_k given qk = q^k; raises on a denominator factor in the lattice."""
    num = spec.base.ctx.one
    for a in spec.numer:
        f = _factor(1 - a * qk, spec.base)
        if f == 0:
            return spec.base.ctx.zero
        num *= f
    den = 1 - qk * spec.base.q
    for b in spec.denom:
        f = 1 - b * qk
        if abs(f) < sing_tol:
            raise SingularRepresentationError(
                f"denominator parameter {b} hits the q-lattice at k={k}")
        den *= f
    return num / den * spec.arg * (-qk) ** spec.exponent


def direct_term(spec, k):
    """k-th term from the q-shifted factorials, without the recurrence."""
    q = spec.base
    num = _prod([qpoch(a, q, k) for a in spec.numer], q)
    den = _prod([qpoch(b, q, k) for b in spec.denom], q) * qpoch(q.q, q, k)
    return num / den * ((-1) ** k * q.q ** binom2(k)) ** spec.exponent * spec.arg ** k


def _finish(ctx, terms, klass, tail):
    total = ctx.fsum(terms)
    mass = ctx.fsum(abs(t) for t in terms)
    condition = float(mass / abs(total)) if total != 0 else float("inf")
    return SeriesValue(value=total, terms_used=len(terms), tail_bound=float(tail),
                       klass=klass, condition=condition)


def eval_phi(spec, cfg=None, descending=False):
    """Partial sum of the r_phi_s^m series; terminating sums are exact, others tail-certified.

    The condition estimate lands in the active ConditionLog, if any.
    """
    return _record(_sum_series(spec, cfg or config_for(spec.base), descending))


def _sum_series(spec, cfg, descending):
    q = spec.base
    ctx = q.ctx
    if spec.arg == 0:
        return SeriesValue(ctx.one, 1, 0.0,
                           "terminating" if spec.termination is not None else "convergent", 1.0)
    if spec.termination is not None:
        n = spec.termination
        if descending:
            terms = [direct_term(spec, k) for k in range(n, -1, -1)]
            total = ctx.zero
            for t in terms:
                total += t
            mass = ctx.fsum(abs(t) for t in terms)
            condition = float(mass / abs(total)) if total != 0 else float("inf")
            return SeriesValue(total, n + 1, 0.0, "terminating", condition)
        terms = [ctx.one]
        t = ctx.one
        qk = ctx.one
        for k in range(n):
            t *= _ratio(spec, k, qk, cfg.sing_tol)
            if t == 0:
                break
            terms.append(t)
            qk *= q.q
        return _finish(ctx, terms, "terminating", 0)

    if not q.is_disk:
        raise DomainError("nonterminating series needs 0 < |q| < 1")
    e = spec.exponent
    if e < 0:
        raise DivergenceError(f"{len(spec.numer)}phi{len(spec.denom)} with offset "
                              f"{spec.vdbr_offset} diverges unless terminating")
    if e == 0 and abs(spec.arg) >= 1:
        raise ConvergenceError(f"series needs |z| < 1, got |z| = {float(abs(spec.arg)):.6g}")

    eps = q.eps
    terms = [ctx.one]
    t = ctx.one
    total = ctx.one
    peak = ctx.one
    qk = ctx.one
    small = 0
    for k in range(cfg.max_terms):
        ratio = _ratio(spec, k, qk, cfg.sing_tol)
        t *= ratio
        if t == 0:
            return _finish(ctx, terms, "convergent", 0)
        terms.append(t)
        total += t
        qk *= q.q
        mag = abs(t)
        peak = max(peak, mag)
        rho = abs(ratio)
        if mag < eps * max(abs(total), eps * peak) and rho < 1:
            small += 1
            if small >= cfg.stop_run:
                return _finish(ctx, terms, "convergent", mag * rho / (1 - rho))
        else:
            small = 0
    raise ConvergenceError(f"series did not converge within {cfg.max_terms} terms")


##### Summations

def _sum_qbinom(p, q):
    a, z = p["a"], p["z"]
    if abs(z) >= 1:
        raise DomainError("q-binomial theorem needs |z| < 1")
    return phi([a], [], q, z), qpoch_inf(a * z, q) / qpoch_inf(z, q)


def _sum_euler_e(p, q):
    z = p["z"]
    if abs(z) >= 1:
        raise DomainError("e_q(z) needs |z| < 1")
    return phi([], [], q, z, offset=-1), 1 / qpoch_inf(z, q)


def _sum_euler_E(p, q):
    z = p["z"]
    return phi([], [], q, -z), qpoch_inf(-z, q)


def _sum_qgauss(p, q):
    a, b, c = p["a"], p["b"], p["c"]
    if not abs(c) < abs(a * b):
        raise DomainError("q-Gauss summation needs |c| < |ab|")
    lhs = phi([a, b], [c], q, c / (a * b))
    rhs = qpoch_inf(c / a, q) * qpoch_inf(c / b, q) / (qpoch_inf(c, q) * qpoch_inf(c / (a * b), q))
    return lhs, rhs


def _sum_termqbinom(p, q):
    n, z = p["n"], p["z"]
    qq = q.q
    lhs = phi([qq ** (-n)], [], q, z, termination=n)
    return lhs, qpoch(qq ** (-n) * z, q, n)


def _sum_qchu(p, q):
    n, a, b = p["n"], p["a"], p["b"]
    lhs = phi([q.q ** (-n), a], [b], q, q.q, termination=n)
    return lhs, a ** n * qpoch(b / a, q, n) / qpoch(b, q, n)


def _sum_qchu_reversed(p, q):
    n, a, b = p["n"], p["a"], p["b"]
    qq = q.q
    lhs = phi([qq ** (-n), a], [b], q, qq ** n * b / a, termination=n)
    return lhs, qpoch(b / a, q, n) / qpoch(b, q, n)


def _sum_limqchu(p, q):
    n, a = p["n"], p["a"]
    qq = q.q
    lhs = phi([qq ** (-n), 0], [a], q, qq, termination=n)
    return lhs, qq ** binom2(n) * (-a) ** n / qpoch(a, q, n)


SUMMATIONS = {
    "qbinom": _sum_qbinom,
    "euler_e": _sum_euler_e,
    "euler_E": _sum_euler_E,
    "qgauss": _sum_qgauss,
    "termqbinom": _sum_termqbinom,
    "qchu": _sum_qchu,
    "qchu_reversed": _sum_qchu_reversed,
    "limqchu": _sum_limqchu,
}


def eval_summation(sid, params, q):
    """(series side, product side) of a closed-form summation; a cancelling series side is summed wider."""
    try:
        fn = SUMMATIONS[sid]
    except KeyError:
        raise DomainError(f"unknown summation {sid!r}") from None

    def compute(base):
        conv = {k: (v if isinstance(v, int) else base.convert(v)) for k, v in params.items()}
        try:
            return fn(conv, base)
        except KeyError as e:
            raise DomainError(f"summation {sid!r}: missing parameter {e}") from None

    return gated(compute, q).value


def _sample(rng, ctx, lo, hi, phase=0.6):
    r = rng.uniform(lo, hi)
    return ctx.mpc(r, 0) * ctx.expj(rng.uniform(-phase, phase))


def _summation_point(sid, rng, ctx):
    if sid in ("qbinom",):
        return {"a": _sample(rng, ctx, 0.1, 2.0), "z": _sample(rng, ctx, 0.05, 0.8)}
    if sid in ("euler_e", "euler_E"):
        return {"z": _sample(rng, ctx, 0.0, 0.9)}
    if sid == "qgauss":
        a = _sample(rng, ctx, 0.5, 0.95)
        b = _sample(rng, ctx, 0.5, 0.95)
        return {"a": a, "b": b, "c": a * b * _sample(rng, ctx, 0.1, 0.8)}
    if sid == "termqbinom":
        return {"n": rng.randint(0, 8), "z": _sample(rng, ctx, 0.2, 3.0)}
    if sid in ("qchu", "qchu_reversed"):
        return {"n": rng.randint(0, 8), "a": _sample(rng, ctx, 0.2, 2.0), "b": _sample(rng, ctx, 0.2, 0.9)}
    return {"n": rng.randint(0, 8), "a": _sample(rng, ctx, 0.2, 0.9)}


def summation_samples(sid, count=200, seed=0, precision="standard", cfg=None):
    """(base, parameters, series side, product side) at pseudo-random points."""
    rng = random.Random(f"{sid}:{seed}")
    for _ in range(count):
        base = BaseQ.from_value(complex(rng.uniform(0.3, 0.8) * (1 if rng.random() < 0.8 else -1)),
                                precision=precision, series_cfg=cfg)
        params = _summation_point(sid, rng, base.ctx)
        lhs, rhs = eval_summation(sid, params, base)
        yield base, params, lhs, rhs


def verify_summation_grid(sid, count=200, seed=0, precision="standard", cfg=None):
    """Residuals of one summation over pseudo-random parameter points."""
    return [rel_residual(lhs, rhs) for _, _, lhs, rhs in summation_samples(sid, count, seed, precision, cfg)]


##### Transformations

def _split_terminating(spec):
    if spec.termination is None:
        raise ShapeError("transform needs a terminating series")
    n = spec.termination
    target = spec.base.q ** (-n)
    for i, a in enumerate(spec.numer):
        if abs(a * spec.base.q ** n - 1) < spec.base.snap:
            return n, spec.numer[i], spec.numer[:i] + spec.numer[i + 1:]
    raise ShapeError(f"no numerator equals q^-{n} (expected {target})")


def _close(x, y, tol=1e-10):
    return rel_residual(x, y) <= tol


def _ivg3(spec, require_plain=False, require_square=False):
    spec = spec.normalized()
    n, lead, others = _split_terminating(spec)
    q = spec.base
    qq = q.q
    p = spec.vdbr_offset
    r, s = len(others), len(spec.denom)
    if require_plain and p != 0:
        raise ShapeError("inversion formula needs a series without zero padding")
    if require_square and (p != 0 or r != s):
        raise ShapeError("this inversion needs an (r+1)phi_r series without padding")
    z = spec.arg
    if z == 0:
        raise ShapeError("inversion needs a nonzero argument")
    pa = _prod(others, q)
    pb = _prod(spec.denom, q)
    pref = (_prod([qpoch(a, q, n) for a in others], q) / _prod([qpoch(b, q, n) for b in spec.denom], q)
            * (z / qq) ** n * ((-1) ** n * qq ** binom2(n)) ** (s - r + p - 1))
    new = SeriesSpec(
        numer=(lead,) + tuple(qq ** (1 - n) / b for b in spec.denom),
        denom=tuple(qq ** (1 - n) / a for a in others),
        base=q,
        arg=pb / pa * qq ** ((1 - p) * n + p + 1) / z,
        vdbr_offset=s - r + p,
        termination=n,
    )
    return Transformed(new, pref)


def _t_none(spec):
    return Transformed(spec, spec.base.ctx.one)


def _t_inversion(spec):
    return _ivg3(spec, require_plain=True)


def _t_ivg3(spec):
    return _ivg3(spec)


def _t_cor15(spec):
    return _ivg3(spec, require_square=True)


def _t_qtopiden(spec):
    spec = spec.normalized()
    n, lead, others = _split_terminating(spec)
    if spec.vdbr_offset != 0 or len(others) != len(spec.denom):
        raise ShapeError("base inversion needs an (r+1)phi_r series without padding")
    q = spec.base
    qq = q.q
    qi = q.inverse()
    new = SeriesSpec(
        numer=(qq ** n,) + tuple(1 / a for a in others),
        denom=tuple(1 / b for b in spec.denom),
        base=qi,
        arg=_prod(others, q) / _prod(spec.denom, q) * spec.arg / qq ** (n + 1),
        vdbr_offset=0,
        termination=n,
    )
    return Transformed(new, q.ctx.one)


def _three_two(spec):
    spec = spec.normalized()
    n, _, others = _split_terminating(spec)
    if spec.vdbr_offset != 0 or len(others) != 2 or len(spec.denom) != 2:
        raise ShapeError("transform needs a terminating 3phi2")
    (a, b), (c, d) = others, spec.denom
    return spec, n, a, b, c, d


def _t_3phi2term(spec):
    spec, n, a, b, c, d = _three_two(spec)
    q = spec.base
    qq = q.q
    if not _close(spec.arg, qq):
        raise ShapeError("transform needs argument q")
    pref = (a * b / c) ** n * qpoch(c * d / (a * b), q, n) / qpoch(d, q, n)
    new = SeriesSpec((qq ** (-n), c / a, c / b), (c, c * d / (a * b)), q, qq, 0, n)
    return Transformed(new, pref)


def _t_3phi2sec(spec):
    spec, n, a, b, c, d = _three_two(spec)
    q = spec.base
    qq = q.q
    if not _close(spec.arg, qq ** n * c * d / (a * b)):
        raise ShapeError("transform needs argument q^n cd/(ab)")
    pref = qpoch(d / b, q, n) / qpoch(d, q, n)
    new = SeriesSpec((qq ** (-n), b, c / a), (c, qq ** (1 - n) * b / d), q, qq, 0, n)
    return Transformed(new, pref)


def _one_phi_zero_padded(spec):
    spec = spec.normalized()
    if len(spec.numer) != 1 or spec.denom or spec.vdbr_offset != 1:
        raise ShapeError("transform needs 1phi0^1(a;-;q,z)")
    spec.base.require_disk("this transform")
    return spec, spec.numer[0], spec.arg


def _t_trans10101a(spec):
    spec, a, z = _one_phi_zero_padded(spec)
    q = spec.base
    new = SeriesSpec((), (z,), q, a, -2, None)
    return Transformed(new, qpoch_inf(a, q) * qpoch_inf(z, q))


def _t_trans10101b(spec):
    spec, a, z = _one_phi_zero_padded(spec)
    q = spec.base
    new = SeriesSpec((), (z,), q, a * z, 0, None)
    return Transformed(new, qpoch_inf(z, q))


def _t_nt1112(spec):
    spec = spec.normalized()
    if len(spec.numer) != 1 or len(spec.denom) != 1 or spec.vdbr_offset != 0:
        raise ShapeError("transform needs 1phi1(a;b;q,z)")
    q = spec.base
    q.require_disk("this transform")
    (a,), (b,), z = spec.numer, spec.denom, spec.arg
    new = SeriesSpec((b / a,), (b, z), q, a * z, 0, None)
    return Transformed(new, qpoch_inf(z, q))


def _t_rel2122(spec):
    spec = spec.normalized()
    if len(spec.numer) != 2 or len(spec.denom) != 2 or spec.vdbr_offset != 0:
        raise ShapeError("transform needs 2phi2(a,b;c,abz/c;q,z)")
    q = spec.base
    q.require_disk("this transform")
    (a, b), (c, d), z = spec.numer, spec.denom, spec.arg
    if not _close(d, a * b * z / c):
        raise ShapeError("second denominator must equal abz/c")
    new = SeriesSpec((a, c / b), (c,), q, b * z / c, 0, None)
    return Transformed(new, qpoch_inf(b * z / c, q) / qpoch_inf(a * b * z / c, q))


TRANSFORMS = {
    "none": _t_none,
    "inversion": _t_inversion,
    "ivg3": _t_ivg3,
    "cor15": _t_cor15,
    "qtopiden": _t_qtopiden,
    "3phi2term": _t_3phi2term,
    "3phi2sec": _t_3phi2sec,
    "trans10101a": _t_trans10101a,
    "trans10101b": _t_trans10101b,
    "nt1112": _t_nt1112,
    "rel2122": _t_rel2122,
}


def apply_transform(tid, spec):
    """New spec and prefactor with prefactor * eval(new) = eval(spec)."""
    try:
        fn = TRANSFORMS[tid]
    except KeyError:
        raise ShapeError(f"unknown transform {tid!r}") from None
    return fn(spec)


##### Limit transitions

def verify_limit_transition(kind, spec, lambdas=(1e2, 1e4, 1e6), cfg=None):
    """Residuals between the lambda-scaled series and its limit, one per lambda."""
    q = spec.base
    numer, denom, z = list(spec.numer), list(spec.denom), spec.arg
    if kind in (1, 3) and (not numer or numer[-1] == 0):
        raise ShapeError("limit transition needs a nonzero last numerator parameter")
    if kind in (2, 3) and (not denom or denom[-1] == 0):
        raise ShapeError("limit transition needs a nonzero last denominator parameter")
    if kind == 1:
        limit = SeriesSpec(tuple(numer[:-1]), tuple(denom), q, numer[-1] * z, spec.vdbr_offset)
    elif kind == 2:
        limit = SeriesSpec(tuple(numer), tuple(denom[:-1]), q, z / denom[-1], spec.vdbr_offset)
    elif kind == 3:
        limit = SeriesSpec(tuple(numer[:-1]), tuple(denom[:-1]), q, numer[-1] * z / denom[-1],
                           spec.vdbr_offset)
    else:
        raise ShapeError(f"unknown limit transition {kind!r}")
    target = eval_phi(limit, cfg).value
    out = []
    for lam in lambdas:
        lam = q.ctx.mpf(lam)
        if kind == 1:
            scaled = SeriesSpec(tuple(numer[:-1]) + (lam * numer[-1],), tuple(denom), q, z / lam,
                                spec.vdbr_offset)
        elif kind == 2:
            scaled = SeriesSpec(tuple(numer), tuple(denom[:-1]) + (lam * denom[-1],), q, lam * z,
                                spec.vdbr_offset)
        else:
            scaled = SeriesSpec(tuple(numer[:-1]) + (lam * numer[-1],),
                                tuple(denom[:-1]) + (lam * denom[-1],), q, z, spec.vdbr_offset)
        out.append(rel_residual(eval_phi(scaled, cfg).value, target))
    return out


def eprime_q(t, q, cfg=None):
    """E'_q(t) = sum_{k>=1} q^{C(k,2)} k t^{k-1}/(q;q)_k."""
    cfg = cfg or config_for(q)
    q.require_disk("E'_q")
    ctx = q.ctx
    t = q.convert(t)
    qq = q.q
    term = 1 / (1 - qq)
    terms = [term]
    qk = qq
    small = 0
    for k in range(1, cfg.max_terms):
        term = term * qk * (k + 1) / k * t / (1 - qk * qq)
        terms.append(term)
        qk *= qq
        total = ctx.fsum(terms)
        if abs(term) <= q.eps * max(abs(total), abs(terms[0])):
            small += 1
            if small >= cfg.stop_run:
                return total
        else:
            small = 0
    raise ConvergenceError("E'_q series did not converge")
