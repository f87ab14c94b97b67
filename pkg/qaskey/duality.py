"""
qaskey duality.py
Duality relations between the q and q^-1-symmetric families and the big/little
q-Jacobi and q-Bessel families, in both directions.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

from qaskey.errors import DomainError
from qaskey.families import ParamSet, PointX, PointZ, eval_family
from qaskey.qcore import LatticePoint, binom2, qpoch, qpoch_inf, rel_residual

__all__ = ["DualityId", "DUALITIES", "SELECTIONS", "verify_duality", "dual_point_equivalence",
           "verify_all_dualities", "duality_sides", "LATTICE_PAIRS"]

SELECTIONS = tuple(itertools.permutations((1, 2, 3)))


@dataclass(frozen=True)
class DualityId:
    """A duality relation; selector is a (p, r, t) permutation or a variant number where the relation has several."""
    id: str
    selector: Optional[object] = None

    def __post_init__(self):
        info = DUALITIES.get(self.id)
        if info is None:
            raise DomainError(f"unknown duality {self.id!r}")
        kind = info[1]
        if kind == "selection":
            if self.selector is None:
                object.__setattr__(self, "selector", (1, 2, 3))
            elif tuple(self.selector) not in SELECTIONS:
                raise DomainError(f"selector must be a permutation of (1, 2, 3), got {self.selector!r}")
            else:
                object.__setattr__(self, "selector", tuple(self.selector))
        elif kind == "variant":
            if self.selector is None:
                object.__setattr__(self, "selector", 1)
            elif self.selector not in (1, 2, 3, 4):
                raise DomainError(f"variant must be 1..4, got {self.selector!r}")
        elif self.selector is not None:
            raise DomainError(f"duality {self.id!r} takes no selector")


def _pow(q, base, mu):
    """base**mu, principal branch for non-integer mu."""
    if isinstance(mu, int):
        return base ** mu
    return q.ctx.power(base, mu)


def _qbinom2(q, mu, k=1):
    """q^(k*C(mu,2)) for integer or complex mu."""
    if isinstance(mu, int):
        return q.q ** (k * binom2(mu))
    return q.ctx.exp(k * binom2(mu) * q.ctx.log(q.q))


def _selected(params, sel):
    vals = params.need("a", "b", "c")
    p, r, t = sel
    return vals[p - 1], vals[r - 1], vals[t - 1]


##### Continuous dual q / q^-1-Hahn and big q-Jacobi

def _cdqh_bqj(m, n, P, sel):
    q = P.q
    ap, ar, at = _selected(P, sel)
    lhs = eval_family("cdqh", n, PointZ.from_lattice(LatticePoint(m, ap), q), P)
    rhs = (qpoch(ap * ar, q, n) * qpoch(ap * at, q, n) / ap ** n
           * eval_family("bqj", m, PointX(x=q.q ** (-n)),
                         ParamSet.build(q, a=ap * ar / q.q, b=ap / ar, c=ap * at / q.q)))
    return lhs, rhs


def _cdqih_bqj(m, n, P, sel):
    q = P.q
    qq = q.q
    ap, ar, at = _selected(P, sel)
    a1, a2, a3 = P.need("a", "b", "c")
    lhs = eval_family("cdqih", n, PointZ.from_lattice(LatticePoint(m, 1 / ap), q), P)
    pre = (qq ** (-2 * binom2(n) - binom2(m)) * (a1 * a2 * a3) ** n * (-ap / (qq * at)) ** m
           * qpoch(1 / (ap * ar), q, n) * qpoch(1 / (ap * at), q, n) * qpoch(qq * at / ap, q, m)
           / qpoch(1 / (ap * at), q, m))
    rhs = pre * eval_family("bqj", m, PointX(x=qq ** n / (ap * ar)),
                            ParamSet.build(q, a=1 / (qq * ap * ar), b=ar / ap, c=at / ap))
    return lhs, rhs


def _bqj_cdqih_a(m, n, P, sel):
    q = P.q
    ctx = q.ctx
    qq = q.q
    a, b, c = P.need("a", "b", "c")
    sab = ctx.sqrt(a * b)
    lhs = eval_family("bqj", m, PointX(x=qq ** (n + 1) * a), P)
    pre = (qq ** (2 * binom2(n) + binom2(m)) * (ctx.sqrt(qq ** 3 * a ** 3 * b) / c) ** n * (-qq * c) ** m
           * qpoch(qq * a * b / c, q, m)
           / (qpoch(qq * a, q, n) * qpoch(qq * a * b / c, q, n) * qpoch(qq * c, q, m)))
    sq = ctx.sqrt(qq)
    dual = ParamSet.build(q, a=1 / (sq * sab), b=ctx.sqrt(b / (qq * a)), c=c / (sq * sab))
    rhs = pre * eval_family("cdqih", n, PointZ.from_z(qq ** m * sq * sab, q), dual)
    return lhs, rhs


def _bqj_cdqih_c(m, n, P, sel):
    q = P.q
    ctx = q.ctx
    qq = q.q
    a, b, c = P.need("a", "b", "c")
    sab = ctx.sqrt(a * b)
    lhs = eval_family("bqj", m, PointX(x=qq ** (n + 1) * c), P)
    pre = (qq ** (2 * binom2(n) + binom2(m)) * (c * ctx.sqrt(qq ** 3 * b) / ctx.sqrt(a)) ** n * (-qq * a) ** m
           * qpoch(qq * b, q, m) / (qpoch(qq * b, q, n) * qpoch(qq * c, q, n) * qpoch(qq * a, q, m)))
    sq = ctx.sqrt(qq)
    dual = ParamSet.build(q, a=1 / (sq * sab), b=ctx.sqrt(a / (qq * b)), c=ctx.sqrt(a * b / qq) / c)
    rhs = pre * eval_family("cdqih", n, PointZ.from_z(qq ** m * sq * sab, q), dual)
    return lhs, rhs


def _cdqh_bqjf(mu, n, P, sel):
    q = P.q
    a, b, c = P.need("a", "b", "c")
    lhs = eval_family("cdqh", n, PointZ.from_z(q.power(-mu) / a, q), P)
    rhs = (qpoch(a * b, q, n) * qpoch(a * c, q, n) / a ** n
           * eval_family("bqjf", mu, PointX(x=q.q ** (-n)),
                         ParamSet.build(q, a=a * b / q.q, b=a / b, c=a * c / q.q)))
    return lhs, rhs


def _bqjf_cdqh(mu, n, P, sel):
    q = P.q
    ctx = q.ctx
    qq = q.q
    a, b, c = P.need("a", "b", "c")
    sq = ctx.sqrt(qq)
    sab = ctx.sqrt(a * b)
    lhs = eval_family("bqjf", mu, PointX(x=qq ** (-n)), P)
    dual = ParamSet.build(q, a=sq * sab, b=ctx.sqrt(qq * a / b), c=sq * c / sab)
    rhs = (ctx.sqrt(qq * a * b) ** n / (qpoch(qq * a, q, n) * qpoch(qq * c, q, n))
           * eval_family("cdqh", n, PointZ.from_z(q.power(mu) * sq * sab, q), dual))
    return lhs, rhs


##### Al-Salam-Chihara (q and q^-1) and little q-Jacobi

def _asc_lqj(m, n, P, variant):
    q = P.q
    qq = q.q
    a, b = P.need("a", "b")
    if variant == 2:
        a, b = b, a
    if variant in (1, 2):
        lhs = eval_family("asc", n, PointZ.from_lattice(LatticePoint(m, a), q), P)
        pre = (qq ** binom2(m) * (-a * b) ** m / a ** n * qpoch(a * b, q, n) * qpoch(qq * a / b, q, m)
               / qpoch(a * b, q, m))
        rhs = pre * eval_family("lqj", m, PointX(x=qq ** (-n) / (a * b)),
                                ParamSet.build(q, a=a / b, b=a * b / qq))
        return lhs, rhs
    if variant == 4:
        a, b = b, a
    lhs = eval_family("qiasc", n, PointZ.from_lattice(LatticePoint(m, 1 / a), q), P)
    pre = (qq ** (-binom2(n) - binom2(m)) * (-b) ** n * (-a / (qq * b)) ** m
           * qpoch(1 / (a * b), q, n) * qpoch(qq * b / a, q, m) / qpoch(1 / (a * b), q, m))
    rhs = pre * eval_family("lqj", m, PointX(x=qq ** n), ParamSet.build(q, a=b / a, b=1 / (qq * a * b)))
    return lhs, rhs


def _asc_lqjf(mu, n, P, sel):
    q = P.q
    qq = q.q
    a, b = P.need("a", "b")
    lhs = eval_family("asc", n, PointZ.from_z(q.power(-mu) / a, q), P)
    ratio = (qpoch_inf(qq * a / b, q) * qpoch_inf(qq / (a * b), q)
             / (qpoch_inf(q.power(mu + 1) * a / b, q) * qpoch_inf(q.power(1 - mu) / (a * b), q)))
    rhs = (qpoch(a * b, q, n) / a ** n * ratio
           * eval_family("lqjf", mu, PointX(x=qq ** (-n) / (a * b)), ParamSet.build(q, a=a / b, b=a * b / qq)))
    return lhs, rhs


def _lqjf_asc(mu, n, P, sel):
    q = P.q
    ctx = q.ctx
    qq = q.q
    a, b = P.need("a", "b")
    lhs = eval_family("lqjf", mu, PointX(x=qq ** (-1 - n) / b), P)
    ratio = (qpoch_inf(q.power(mu + 1) * a, q) * qpoch_inf(q.power(-mu) / b, q)
             / (qpoch_inf(qq * a, q) * qpoch_inf(1 / b, q)))
    dual = ParamSet.build(q, a=ctx.sqrt(qq * a * b), b=ctx.sqrt(qq * b / a))
    rhs = (ctx.sqrt(qq * a * b) ** n / qpoch(qq * b, q, n) * ratio
           * eval_family("asc", n, PointZ.from_z(q.power(mu) * ctx.sqrt(qq) * ctx.sqrt(a * b), q), dual))
    return lhs, rhs


##### Continuous big q / q^-1-Hermite and q / q^-1-Bessel

def _cbqh_qibesself(mu, n, P, sel):
    q = P.q
    (a,) = P.need("a")
    lhs = eval_family("cbqh", n, PointZ.from_z(q.power(mu) * a, q), P)
    rhs = (_qbinom2(q, mu, 2) * a ** (-n) * _pow(q, q.q * a * a, mu)
           * eval_family("qibesself", mu, PointX(x=q.q ** (-n)), ParamSet.build(q, a=-1 / (a * a))))
    return lhs, rhs


def _qibesself_cbqh(mu, n, P, sel):
    q = P.q
    ctx = q.ctx
    (a,) = P.need("a")
    root = ctx.sqrt(-a)
    lhs = eval_family("qibesself", mu, PointX(x=q.q ** (-n)), P)
    rhs = (_qbinom2(q, mu, -2) * root ** (-n) * _pow(q, -a / q.q, mu)
           * eval_family("cbqh", n, PointZ.from_z(q.power(mu) / root, q), ParamSet.build(q, a=1 / root)))
    return lhs, rhs


def _cbqih_qbessel(m, n, P, sel):
    q = P.q
    qq = q.q
    (a,) = P.need("a")
    lhs = eval_family("cbqih", n, PointZ.from_lattice(LatticePoint(-m, a), q), P)
    rhs = (qq ** (-2 * binom2(m)) * a ** (-n) * (a * a / qq) ** m
           * eval_family("qbessel", m, PointX(x=qq ** n), ParamSet.build(q, a=-1 / (a * a))))
    return lhs, rhs


def _qbessel_cbqih(m, n, P, sel):
    q = P.q
    ctx = q.ctx
    qq = q.q
    (a,) = P.need("a")
    root = ctx.sqrt(-a)
    lhs = eval_family("qbessel", m, PointX(x=qq ** n), P)
    rhs = (qq ** (2 * binom2(m)) * (-qq * a) ** m / root ** n
           * eval_family("cbqih", n, PointZ.from_lattice(LatticePoint(-m, 1 / root), q),
                         ParamSet.build(q, a=1 / root)))
    return lhs, rhs


# id -> (callable, selector kind, degree kind of the first index)
DUALITIES = {
    "cdqh_bqj": (_cdqh_bqj, "selection", "m"),
    "cdqih_bqj": (_cdqih_bqj, "selection", "m"),
    "bqj_cdqih_a": (_bqj_cdqih_a, None, "m"),
    "bqj_cdqih_c": (_bqj_cdqih_c, None, "m"),
    "cdqh_bqjf": (_cdqh_bqjf, None, "mu"),
    "bqjf_cdqh": (_bqjf_cdqh, None, "mu"),
    "asc_lqj": (_asc_lqj, "variant", "m"),
    "asc_lqjf": (_asc_lqjf, None, "mu"),
    "lqjf_asc": (_lqjf_asc, None, "mu"),
    "cbqh_qibesself": (_cbqh_qibesself, None, "mu"),
    "qibesself_cbqh": (_qibesself_cbqh, None, "mu"),
    "cbqih_qbessel": (_cbqih_qbessel, None, "m"),
    "qbessel_cbqih": (_qbessel_cbqih, None, "m"),
}


def _check_indices(info, m, n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise DomainError(f"n must be an integer >= 0, got {n!r}")
    if info[2] == "m" and (isinstance(m, bool) or not isinstance(m, int) or m < 0):
        raise DomainError(f"m must be an integer >= 0, got {m!r}")


def duality_sides(did, m, n, params):
    """Both sides of the relation, lhs first."""
    if isinstance(did, str):
        did = DualityId(did)
    info = DUALITIES[did.id]
    _check_indices(info, m, n)
    if info[2] == "mu" and not isinstance(m, int):
        m = params.q.convert(m)
    return info[0](m, n, params, did.selector)


def verify_duality(did, m, n, params):
    """Normalized residual |lhs - rhs| / max(|lhs|, |rhs|, floor)."""
    lhs, rhs = duality_sides(did, m, n, params)
    return rel_residual(lhs, rhs)


# polynomial family and the lattice pair (z, 1/z) it is evaluated on
LATTICE_PAIRS = {
    "cdqh_bqj": "cdqh",
    "cdqih_bqj": "cdqih",
    "asc_lqj": None,
    "cbqih_qbessel": "cbqih",
}


def _uncanonical(z):
    """PointZ kept as given, so each member of the pair is evaluated on its own."""
    return PointZ(z=z, x=(z + 1 / z) / 2)


def dual_point_equivalence(did, m, n, params):
    """Residual between z = q^m a_p and z = q^-m / a_p of the same polynomial."""
    if isinstance(did, str):
        did = DualityId(did)
    if did.id not in LATTICE_PAIRS:
        raise DomainError(f"duality {did.id!r} has no lattice point pair")
    q = params.q
    if did.id == "asc_lqj":
        fid = "asc" if did.selector in (1, 2) else "qiasc"
        a, b = params.need("a", "b")
        ap = a if did.selector in (1, 3) else b
    elif did.id == "cbqih_qbessel":
        fid = "cbqih"
        (ap,) = params.need("a")
    else:
        fid = LATTICE_PAIRS[did.id]
        ap = _selected(params, did.selector)[0]
    first = _uncanonical(q.q ** m * ap)
    second = _uncanonical(q.q ** (-m) / ap)
    u = eval_family(fid, n, first, params)
    v = eval_family(fid, n, second, params)
    return rel_residual(u, v)


def verify_all_dualities(points, mmax=3, nmax=3):
    """Worst residual per relation over (ParamSet, mu) points and 0 <= m, n <= the caps."""
    out = {}
    for did_name, info in DUALITIES.items():
        if info[1] == "selection":
            selectors = SELECTIONS
        elif info[1] == "variant":
            selectors = (1, 2, 3, 4)
        else:
            selectors = (None,)
        worst = 0.0
        for params in points.get(did_name, ()):
            for sel in selectors:
                did = DualityId(did_name, sel)
                for m in range(mmax + 1):
                    for n in range(nmax + 1):
                        worst = max(worst, verify_duality(did, m, n, params))
        out[did_name] = worst
    return out
