"""
qaskey genfun.py
Generating functions of the q^-1-families and their verification by
contour extraction of the series coefficients.
"""

from dataclasses import dataclass

from qaskey.errors import ConvergenceError, DomainError
from qaskey.families import ParamSet, PointZ, eval_family
from qaskey.qcore import binom2, qpoch, qpoch_inf, rel_residual
from qaskey.series import gated, phi

__all__ = ["GFConfig", "GFId", "GF_IDS", "eval_gf", "eval_v", "gf_coefficient", "extract_coefficients",
           "verify_gf_coefficients", "partial_sum_check", "verify_master_limits"]


@dataclass
class GFConfig:
    """Default configuration"""
    radius: float     = 0.2                # contour |t| = radius
    nodes: int        = 64                 # doubled once for the self check
    check_tol: float  = 1e-10
    limit_gamma: float = 1e-9              # stand-in for gamma -> 0


DEFAULT_GF = GFConfig()


@dataclass(frozen=True)
class GFId:
    id: str

    def __post_init__(self):
        if self.id not in GF_IDS:
            raise DomainError(f"unknown generating function {self.id!r}")


##### Closed forms

def _nonzero(value, what):
    if value == 0:
        raise DomainError(f"{what} vanishes; the closed form has a pole here")
    return value


def _check_t(t):
    if abs(t) >= 1:
        raise DomainError(f"generating functions need |t| < 1, got |t| = {float(abs(t)):.6g}")


def _gf_cdqih_g(t, pt, P, gamma, delta):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    den = _nonzero(qpoch_inf(a * b * c * t, q), "(abct;q)_inf")
    return qpoch_inf(b * t, q) / den * phi([pt.times(1 / a), pt.over(1 / a)], [1 / (a * b), b * t], q, a * t)


def _gf_master(t, pt, P, gamma, delta):
    a, b = P.need("a", "b")
    q = P.q
    if gamma is None or delta is None:
        raise DomainError("the master generating function needs gamma and delta")
    if abs(gamma) >= 1:
        raise DomainError("gamma must lie in the open unit disk")
    if gamma == 0:
        raise DomainError("gamma = 0 is the limiting corollary 'cor_gamma0'")
    num = qpoch_inf(gamma, q) * qpoch_inf(-pt.times(t), q) * qpoch_inf(-pt.over(t), q)
    den = _nonzero(qpoch_inf(delta, q) * qpoch_inf(-a * t, q) * qpoch_inf(-b * t, q), "(delta,-at,-bt;q)_inf")
    return num / den * phi([delta / gamma, -a * t, -b * t], [-pt.times(t), -pt.over(t)], q, gamma)


def _gf_cor_gamma0(t, pt, P, gamma, delta):
    a, b = P.need("a", "b")
    q = P.q
    if delta is None:
        raise DomainError("'cor_gamma0' needs delta")
    num = qpoch_inf(-pt.times(t), q) * qpoch_inf(-pt.over(t), q)
    den = _nonzero(qpoch_inf(delta, q) * qpoch_inf(-a * t, q) * qpoch_inf(-b * t, q), "(delta,-at,-bt;q)_inf")
    return num / den * phi([-a * t, -b * t], [-pt.times(t), -pt.over(t)], q, delta)


def _gf_cor_delta0(t, pt, P, gamma, delta):
    a, b = P.need("a", "b")
    q = P.q
    if gamma is None or abs(gamma) >= 1:
        raise DomainError("'cor_delta0' needs gamma with |gamma| < 1")
    num = qpoch_inf(gamma, q) * qpoch_inf(-pt.times(t), q) * qpoch_inf(-pt.over(t), q)
    den = _nonzero(qpoch_inf(-a * t, q) * qpoch_inf(-b * t, q), "(-at,-bt;q)_inf")
    return num / den * phi([-a * t, -b * t, 0], [-pt.times(t), -pt.over(t)], q, gamma)


def _gf_cor_delta_ab(t, pt, P, gamma, delta):
    a, b = P.need("a", "b")
    q = P.q
    den = _nonzero(qpoch_inf(-b * t, q), "(-bt;q)_inf")
    return phi([pt.times(1 / a), pt.over(1 / a)], [1 / (a * b)], q, -a * t) / den


def _gf_cor_delta_gamma(t, pt, P, gamma, delta):
    a, b = P.need("a", "b")
    q = P.q
    den = _nonzero(qpoch_inf(-a * t, q) * qpoch_inf(-b * t, q), "(-at,-bt;q)_inf")
    return qpoch_inf(-pt.times(t), q) * qpoch_inf(-pt.over(t), q) / den


def _gf_cbqih_i(t, pt, P, gamma, delta):
    (a,) = P.need("a")
    q = P.q
    den = _nonzero(qpoch_inf(-a * t, q), "(-at;q)_inf")
    return qpoch_inf(-pt.times(t), q) * qpoch_inf(-pt.over(t), q) / den


def _gf_v(t, pt, P, gamma, delta):
    t1, t2, t3 = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    den = _nonzero(qpoch_inf(t * t2 / qq, q), "(t t2/q;q)_inf")
    arg = -pt.over(t)
    return qpoch_inf(arg, q) / den * phi([pt.times(qq / t1), pt.times(qq / t3)], [-qq * qq / (t1 * t3)], q, arg)


##### Series coefficients (weight_n times the polynomial)

def eval_v(n, pt, P):
    """V_n(x; t1, t2, t3 | q), the i-rotated continuous dual q^-1-Hahn normalization."""
    t1, t2, t3 = P.need("a", "b", "c")
    q = P.q
    ctx = q.ctx
    qq = q.q
    i = ctx.mpc(0, 1)
    inner = ParamSet.build(q, a=i * t1 / qq, b=i * t2 / qq, c=i * t3 / qq)
    value = eval_family("cdqih", n, PointZ.from_z(i * pt.z, q), inner)
    pre = (qq ** (2 * binom2(n)) * (-qq * qq / (t2 * t3)) ** n * i ** (-n)
           / (qpoch(-qq * qq / (t1 * t2), q, n) * qpoch(-qq * qq / (t2 * t3), q, n)))
    return pre * value


def _coef_cdqih_g(n, pt, P, gamma, delta):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    return (q.q ** (2 * binom2(n)) / (qpoch(q.q, q, n) * qpoch(1 / (a * b), q, n))
            * eval_family("cdqih", n, pt, P))


def _qiasc_coef(n, pt, P, num, den):
    q = P.q
    return q.q ** binom2(n) * num / (qpoch(q.q, q, n) * den) * eval_family("qiasc", n, pt, P)


def _coef_master(n, pt, P, gamma, delta):
    q = P.q
    return _qiasc_coef(n, pt, P, qpoch(gamma, q, n), qpoch(delta, q, n))


def _coef_cor_gamma0(n, pt, P, gamma, delta):
    return _qiasc_coef(n, pt, P, 1, qpoch(delta, P.q, n))


def _coef_cor_delta0(n, pt, P, gamma, delta):
    return _qiasc_coef(n, pt, P, qpoch(gamma, P.q, n), 1)


def _coef_cor_delta_ab(n, pt, P, gamma, delta):
    a, b = P.need("a", "b")
    return _qiasc_coef(n, pt, P, 1, qpoch(1 / (a * b), P.q, n))


def _coef_cor_delta_gamma(n, pt, P, gamma, delta):
    return _qiasc_coef(n, pt, P, 1, 1)


def _coef_cbqih_i(n, pt, P, gamma, delta):
    q = P.q
    return q.q ** binom2(n) / qpoch(q.q, q, n) * eval_family("cbqih", n, pt, P)


def _coef_v(n, pt, P, gamma, delta):
    t1, t2, t3 = P.need("a", "b", "c")
    q = P.q
    qq2 = q.q * q.q
    w = (qpoch(-qq2 / (t1 * t2), q, n) * qpoch(-qq2 / (t2 * t3), q, n)
         / (qpoch(q.q, q, n) * qpoch(-qq2 / (t1 * t3), q, n)))
    return w * (t2 / t1) ** n * eval_v(n, pt, P)


# id -> (closed form, n-th series coefficient)
GF_IDS = {
    "cdqih_G": (_gf_cdqih_g, _coef_cdqih_g),
    "master": (_gf_master, _coef_master),
    "cor_gamma0": (_gf_cor_gamma0, _coef_cor_gamma0),
    "cor_delta0": (_gf_cor_delta0, _coef_cor_delta0),
    "cor_delta_ab": (_gf_cor_delta_ab, _coef_cor_delta_ab),
    "cor_delta_gamma": (_gf_cor_delta_gamma, _coef_cor_delta_gamma),
    "cbqih_I": (_gf_cbqih_i, _coef_cbqih_i),
    "ismail_corrected_V": (_gf_v, _coef_v),
}


def _resolve(gid):
    if isinstance(gid, GFId):
        gid = gid.id
    try:
        return GF_IDS[gid]
    except KeyError:
        raise DomainError(f"unknown generating function {gid!r}") from None


def _point(pt, q):
    return pt if isinstance(pt, PointZ) else PointZ.from_z(pt, q)


def eval_gf(gid, t, pt, params, gamma=None, delta=None, continued=False):
    """Closed-form side of the generating function at t; continued=True drops the |t| < 1 check.

    Summed on a promoted base when its series cancel past the accuracy target.
    """
    closed, _ = _resolve(gid)
    q = params.q
    q.require_disk("generating functions")
    t = q.convert(t)
    if not continued:
        _check_t(t)
    pt = _point(pt, q)

    def compute(base):
        g = None if gamma is None else base.convert(gamma)
        d = None if delta is None else base.convert(delta)
        return closed(base.convert(t), pt.on(base), params.on(base), g, d)

    return gated(compute, q).value


def gf_coefficient(gid, n, pt, params, gamma=None, delta=None):
    """n-th coefficient of the series side, from the polynomial values."""
    _, coef = _resolve(gid)
    q = params.q
    gamma = None if gamma is None else q.convert(gamma)
    delta = None if delta is None else q.convert(delta)
    return coef(n, _point(pt, q), params, gamma, delta)


def _contour(gid, N, pt, params, gamma, delta, radius, nodes):
    ctx = params.q.ctx
    samples = []
    for j in range(nodes):
        t = radius * ctx.expjpi(ctx.mpf(2 * j) / nodes)
        samples.append((t, eval_gf(gid, t, pt, params, gamma, delta)))
    coeffs = []
    for n in range(N + 1):
        coeffs.append(ctx.fsum(f * t ** (-n) for t, f in samples) / nodes)
    scale = max(abs(f) for _, f in samples)
    return coeffs, scale


def extract_coefficients(gid, N, pt, params, gamma=None, delta=None, cfg=None):
    """Taylor coefficients 0..N of the closed form by trapezoid averaging on |t| = radius."""
    cfg = cfg or DEFAULT_GF
    q = params.q
    ctx = q.ctx
    radius = ctx.mpf(cfg.radius)
    pt = _point(pt, q)
    coarse, scale = _contour(gid, N, pt, params, gamma, delta, radius, cfg.nodes)
    fine, _ = _contour(gid, N, pt, params, gamma, delta, radius, 2 * cfg.nodes)
    for n, (u, v) in enumerate(zip(coarse, fine)):
        allowed = cfg.check_tol * max(abs(v), scale * radius ** (-n))
        if abs(u - v) > allowed:
            raise ConvergenceError(f"contour coefficient {n} changed by {float(abs(u - v)):.3g} "
                                   f"when the node count doubled")
    return fine


def verify_gf_coefficients(gid, N, pt, params, gamma=None, delta=None, cfg=None):
    """Residual per degree between the extracted and the polynomial coefficients."""
    extracted = extract_coefficients(gid, N, pt, params, gamma, delta, cfg)
    return [rel_residual(extracted[n], gf_coefficient(gid, n, pt, params, gamma, delta))
            for n in range(N + 1)]


def partial_sum_check(gid, t, N, pt, params, gamma=None, delta=None, safety=10):
    """(|partial sum through N - closed form|, safety * |next term|)."""
    q = params.q
    t = q.convert(t)
    pt = _point(pt, q)
    terms = [gf_coefficient(gid, n, pt, params, gamma, delta) * t ** n for n in range(N + 2)]
    partial = q.ctx.fsum(terms[:-1])
    diff = abs(partial - eval_gf(gid, t, pt, params, gamma, delta))
    return float(diff), float(safety * abs(terms[-1]))


def verify_master_limits(N, pt, params, gamma, delta, cfg=None):
    """Coefficientwise residuals of the master function's four limiting cases."""
    cfg = cfg or DEFAULT_GF
    a, b = params.need("a", "b")
    tiny = cfg.limit_gamma

    def extracted(gid, g, d):
        return extract_coefficients(gid, N, pt, params, g, d, cfg)

    cases = {
        "cor_gamma0": (extracted("master", tiny, delta), extracted("cor_gamma0", None, delta)),
        "cor_delta0": (extracted("master", gamma, 0), extracted("cor_delta0", gamma, None)),
        "cor_delta_ab": (extracted("master", tiny, 1 / (a * b)), extracted("cor_delta_ab", None, None)),
        "cor_delta_gamma": (extracted("master", gamma, gamma), extracted("cor_delta_gamma", None, None)),
    }
    out = {}
    for name, (lhs, rhs) in cases.items():
        scale = max(abs(v) for v in rhs)
        out[name] = max(float(abs(u - v) / scale) for u, v in zip(lhs, rhs))
    return out
