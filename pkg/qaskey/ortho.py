"""
qaskey ortho.py
Orthogonality relations of the q and q^-1 families: Gram matrices by quadrature
on [0, pi], along the imaginary axis and the half line, by Jackson q-integrals,
by one-sided and bilateral lattice sums and by index transforms in the degree.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

from mpmath.calculus.quadrature import GaussLegendre

from qaskey.errors import ConvergenceError, DomainError, QuadratureError, SingularSystemError
from qaskey.families import FAMILIES, ParamSet, PointX, PointZ, eval_family
from qaskey.qcore import LatticePoint, binom2, jackson_qintegral, qpoch, qpoch_inf, qpoch_multi, rel_residual, theta

__all__ = [
    "OrthoConfig", "OrthoRelation", "GramReport", "Recurrence", "WeightDecay", "RELATIONS", "TOTAL_MASSES",
    "verify_relation", "verify_continuous_theta", "verify_continuous_imag", "verify_w2_w3",
    "verify_discrete", "verify_bilateral", "verify_qintegral_bqJ", "verify_index_transform",
    "verify_total_mass", "verify_discrete_closure", "extract_ttrr", "extract_ttrr_and_verify_norm",
    "weight_decay", "summand_slope_check", "dcdqiho_swap_residual",
]


@dataclass
class OrthoConfig:
    """Default configuration"""
    quad_degree: int        = 5          # Gauss-Legendre level, 3*2^(degree-1) nodes per panel
    quad_max_degree: int    = 8
    quad_tol: float         = 1e-13      # relative change allowed between refinement levels
    imag_window: float      = 400.0      # largest |u| scanned on z = i e^u and z = e^u
    discrete_cap: int       = 2000       # terms per one-sided lattice sum
    contour_nodes: int      = 64         # midpoint nodes on the index-transform segment
    contour_max_nodes: int  = 2048


DEFAULT_ORTHO = OrthoConfig()


@dataclass(frozen=True)
class OrthoRelation:
    id: str
    kind: str            # theta | imag | line | discrete | bilateral | qint | index
    family: str
    params: tuple
    support: str
    norm: Callable       # (i, P, alpha) -> h_i
    degree_gram: bool = True


@dataclass
class GramReport:
    relation: str
    degrees: tuple
    gram: list
    expected: list
    normalized_residuals: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return max(max(row) for row in self.normalized_residuals)

    @property
    def max_off_diagonal(self):
        rows = self.normalized_residuals
        return max((rows[i][j] for i in range(len(rows)) for j in range(len(rows)) if i != j), default=0.0)

    def passed(self, tol):
        return self.max_residual <= tol


def _report(rid, gram, expected, diagnostics):
    size = len(gram)
    resid = []
    for i in range(size):
        row = []
        for j in range(size):
            target = expected[i] if i == j else 0
            scale = abs(expected[i] * expected[j]) ** 0.5
            row.append(float(abs(gram[i][j] - target) / scale) if scale else float(abs(gram[i][j] - target)))
        resid.append(row)
    return GramReport(relation=rid, degrees=(0, size - 1), gram=gram, expected=expected,
                      normalized_residuals=resid, diagnostics=diagnostics)


def _square(size, ctx):
    return [[ctx.zero] * size for _ in range(size)]


def _accumulate(gram, values, weight, conj=False):
    size = len(values)
    for i in range(size):
        vi = values[i] * weight
        for j in range(size):
            gram[i][j] += vi * (values[j].conjugate() if conj else values[j])


##### Parameter guards

def _real(v, tol=1e-15):
    return abs(getattr(v, "imag", 0)) <= tol * max(1, abs(v))


def _on_lattice(v, q, tol=1e-9):
    """v = q^k for some integer k."""
    if v == 0:
        return False
    ctx = q.ctx
    k = int(ctx.nint(ctx.log(abs(v)) / ctx.log(abs(q.q))))
    return abs(v - q.q ** k) <= tol * abs(v)


def _require_real_q(q, what):
    if not (_real(q.q) and 0 < q.q.real < 1):
        raise DomainError(f"{what} needs a real base 0 < q < 1")


def _log_inv(q):
    return q.ctx.log(1 / q.q)


##### Norms

def _theta_norm(ps):
    def norm(n, P, alpha=None):
        q = P.q
        qq = q.q
        vals = P.need(*ps)
        pairs = [qq ** n * vals[i] * vals[j] for i in range(len(vals)) for j in range(i + 1, len(vals))]
        h = 2 * q.ctx.pi / qpoch_multi([qq ** (n + 1)] + pairs, q)
        if len(vals) == 4:
            s = vals[0] * vals[1] * vals[2] * vals[3]
            h *= qpoch(qq ** (n - 1) * s, q, n) * qpoch_inf(qq ** (2 * n) * s, q)
        return h
    return norm


def _norm_theo33(n, P, alpha=None):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (-4 * binom2(n)) * qpoch_multi([qq, qq * a * b, qq * a * c, qq * b * c], q)
            * qpoch_multi([qq, 1 / (a * b), 1 / (a * c), 1 / (b * c)], q, n)
            * (a * a * b * b * c * c / qq) ** n * _log_inv(q))


def _norm_corr311(n, P, alpha=None):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qq ** (-2 * binom2(n)) * qpoch_multi([qq, qq * a * b], q) * qpoch_multi([qq, 1 / (a * b)], q, n)
            * (a * b / qq) ** n * _log_inv(q))


def _hermite_ratio(n, q):
    """h_n / h_0 shared by every q^-1-Hermite measure."""
    qq = q.q
    return qq ** (-binom2(n)) * qpoch(qq, q, n) * (-qq) ** (-n)


def _norm_cqih_imag(n, P, alpha=None):
    q = P.q
    return _hermite_ratio(n, q) * qpoch_inf(q.q, q) * _log_inv(q)


def _norm_w2(n, P, alpha=None):
    q = P.q
    ctx = q.ctx
    L = _log_inv(q)
    return _hermite_ratio(n, q) * ctx.exp(L / 8) * ctx.sqrt(ctx.pi * L / 2)


def _w3_alpha(alpha):
    """The weight is unchanged by alpha -> conj(alpha); the norm is stated for Im alpha > 0."""
    if alpha is None or alpha.imag == 0:
        raise DomainError("w3 needs a parameter alpha with nonzero imaginary part")
    return alpha if alpha.imag > 0 else alpha.conjugate()


def _norm_w3(n, P, alpha=None):
    q = P.q
    ctx = q.ctx
    al = _w3_alpha(q.convert(alpha) if alpha is not None else None)
    ab = al.conjugate()
    mass = ctx.pi * 1j / (al * qpoch_inf(q.q, q) * theta(-al * ab, q) * theta(ab / al, q))
    return _hermite_ratio(n, q) * mass


def _norm_akporth(n, P, alpha=None):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (-4 * binom2(n)) * (a * a * b * b * c * c / qq) ** n
            * qpoch_multi([qq / (a * a), qq * b * c], q)
            * qpoch_multi([qq, 1 / (a * b), 1 / (a * c), 1 / (b * c)], q, n)
            / qpoch_multi([qq * b / a, qq * c / a], q))


def _norm_ascorthi(n, P, alpha=None):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qq ** (-2 * binom2(n)) * (a * b / qq) ** n * qpoch_inf(qq / (a * a), q)
            * qpoch_multi([qq, 1 / (a * b)], q, n) / qpoch_inf(qq * b / a, q))


def _norm_cbqhorthi(n, P, alpha=None):
    (a,) = P.need("a")
    q = P.q
    return _hermite_ratio(n, q) * qpoch_inf(q.q / (a * a), q)


def _ratio2m(num, den, q, m):
    """(num;q)_{2m} / (den;q)_{2m}."""
    d = qpoch(den, q, 2 * m)
    if d == 0:
        raise DomainError(f"({den};q)_{2 * m} vanishes")
    return qpoch(num, q, 2 * m) / d


def _div(num, den, what):
    if den == 0:
        raise DomainError(f"{what} vanishes")
    return num / den


def _norm_dcdqiho(m, P, alpha=None):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    mass = _div(qpoch_multi([qq / (a * a), qq * b * c, 1 / (qq * b * c)], q),
                qpoch_multi([1 / (a * b), 1 / (a * c), qq * b / a, qq * c / a], q), "DcdqiHO mass denominator")
    lattice = _ratio2m(1 / (a * a), qq / (a * a), q, m) * _div(
        qpoch_multi([qq, 1 / (a * b), qq * c / a], q, m),
        qpoch_multi([1 / (a * a), 1 / (a * c), qq * b / a], q, m), "DcdqiHO lattice denominator")
    return qq ** (-binom2(m)) * (-b / (qq * a * a * c)) ** m * mass * lattice


def _norm_idqiasco(m, P, alpha=None):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qq ** (-2 * binom2(m)) * (a / (qq * b)) ** m * qpoch_inf(qq / (a * a), q) / qpoch_inf(qq * b / a, q)
            * _ratio2m(1 / (a * a), qq / (a * a), q, m)
            * _div(qpoch_multi([qq, qq * b / a], q, m), qpoch_multi([1 / (a * a), 1 / (a * b)], q, m),
                   "idqiASCO lattice denominator"))


def _norm_qbesselcbqiho(m, P, alpha=None):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return (qq ** (-3 * binom2(m)) * qpoch_inf(qq / (a * a), q) * (-a * a / qq) ** m
            * _ratio2m(1 / (a * a), qq / (a * a), q, m)
            * _div(qpoch(qq, q, m), qpoch(1 / (a * a), q, m), "(1/a^2;q)_m"))


def _norm_lqjo(n, P, alpha=None):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return ((qq * a) ** n * qpoch_inf(qq * qq * a * b, q) / qpoch_inf(qq * a, q)
            * _ratio2m(qq * a * b, qq * qq * a * b, q, n)
            * qpoch_multi([qq, qq * b], q, n) / qpoch_multi([qq * a, qq * a * b], q, n))


def _norm_thm314(n, P, alpha=None):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return ((1 / (qq * a)) ** n * qpoch_inf(qq * qq * a * b, q) * qpoch(qq, q, n)
            / (qpoch_inf(qq * a, q) * qpoch(qq * b, q, n)))


def _norm_thm316(n, P, alpha=None):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (-n) * qpoch_multi([qq * qq * a * b, c / a], q) * qpoch_multi([qq, qq * a / c], q, n)
            / (qpoch_multi([qq * b, qq * c], q) * qpoch_multi([qq * a, qq * a * b / c], q, n)))


def _norm_thm368(m, P, alpha=None):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return (qq ** binom2(m) * (qq * a) ** m * qpoch_inf(-qq * a, q) * _ratio2m(-a, -qq * a, q, m)
            * qpoch(qq, q, m) / qpoch(-a, q, m))


def _norm_thm248(n, P, alpha=None):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return qq ** (-binom2(n)) * (qq * a) ** (-n) * qpoch_inf(-qq * a, q) * qpoch(qq, q, n)


def _bilateral_mass(ps, alpha, q):
    qq = q.q
    den = q.ctx.one
    for p in ps:
        den *= qpoch_inf(qq * p * alpha, q) * qpoch_inf(qq * p / alpha, q)
    return qpoch_multi([qq, alpha * alpha, qq / (alpha * alpha)], q) / den


def _norm_eq189(n, P, alpha):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (_bilateral_mass((a, b, c), alpha, q) * qpoch_multi([qq * a * b, qq * a * c, qq * b * c], q)
            * _norm_theo33(n, P) / (qpoch_multi([qq, qq * a * b, qq * a * c, qq * b * c], q) * _log_inv(q)))


def _norm_thm420(n, P, alpha):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (_bilateral_mass((a, b), alpha, q) * qpoch_inf(qq * a * b, q)
            * qq ** (-2 * binom2(n)) * (a * b / qq) ** n * qpoch_multi([qq, 1 / (a * b)], q, n))


def _norm_cbqih_bilateral(n, P, alpha):
    (a,) = P.need("a")
    return _bilateral_mass((a,), alpha, P.q) * _hermite_ratio(n, P.q)


def _norm_cqih_bilateral(n, P, alpha):
    return _bilateral_mass((), alpha, P.q) * _hermite_ratio(n, P.q)


def _norm_bqjo(m, P, alpha=None):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (binom2(m) + 1) * a * (1 - qq) * (-qq * qq * a * c) ** m
            * qpoch_multi([qq, qq * qq * a * b, c / a, qq * a / c], q)
            / qpoch_multi([qq * a, qq * b, qq * c, qq * a * b / c], q)
            * _ratio2m(qq * a * b, qq * qq * a * b, q, m)
            * qpoch_multi([qq, qq * b, qq * a * b / c], q, m) / qpoch_multi([qq * a, qq * c, qq * a * b], q, m))


def _norm_cobqj(n, P, alpha=None):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    ctx = q.ctx
    qq = q.q
    return (-2 * ctx.pi * 1j / (ctx.log(qq) * qpoch_multi([qq, qq * a, qq * c, qq * c / b], q))
            * (qq * a * b) ** n * qpoch_multi([qq, qq * c / b], q, n) / qpoch_multi([qq * a, qq * c], q, n))


def _norm_colqj(n, P, alpha=None):
    a, b = P.need("a", "b")
    q = P.q
    ctx = q.ctx
    qq = q.q
    return (-2 * ctx.pi * 1j / (ctx.log(qq) * qpoch_multi([qq, qq * a, qq * a, qq * b, 1 / b, 1 / b], q))
            * (qq * a * b) ** n * qpoch(qq, q, n) / qpoch(qq * b, q, n))


def _norm_coqibf(n, P, alpha=None):
    (a,) = P.need("a")
    q = P.q
    ctx = q.ctx
    return 2 * ctx.pi * 1j * qpoch(q.q, q, n) / ((-a) ** n * qpoch_inf(q.q, q) * ctx.log(q.q))


RELATIONS = {r.id: r for r in (
    OrthoRelation("AWO", "theta", "aw", ("a", "b", "c", "d"), "theta in [0, pi]", _theta_norm("abcd")),
    OrthoRelation("cdqHO", "theta", "cdqh", ("a", "b", "c"), "theta in [0, pi]", _theta_norm("abc")),
    OrthoRelation("ASCO", "theta", "asc", ("a", "b"), "theta in [0, pi]", _theta_norm("ab")),
    OrthoRelation("cbqHO", "theta", "cbqh", ("a",), "theta in [0, pi]", _theta_norm("a")),
    OrthoRelation("cqHO", "theta", "cqh", (), "theta in [0, pi]", _theta_norm("")),
    OrthoRelation("theo33", "imag", "cdqih", ("a", "b", "c"), "z in (0, i inf)", _norm_theo33),
    OrthoRelation("corr311", "imag", "qiasc", ("a", "b"), "z in (0, i inf)", _norm_corr311),
    OrthoRelation("corr318", "imag", "cbqih", ("a",), "z in (0, i inf)", _norm_cqih_imag),
    OrthoRelation("corr326", "imag", "cqih", (), "z in (0, i inf)", _norm_cqih_imag),
    OrthoRelation("w2", "line", "cqih", (), "x = i(z - 1/z)/2, z in (0, inf)", _norm_w2),
    OrthoRelation("w3", "line", "cqih", (), "x = i(z - 1/z)/2, z in (0, inf)", _norm_w3),
    OrthoRelation("AKporth", "discrete", "cdqih", ("a", "b", "c"), "z = q^-m a", _norm_akporth),
    OrthoRelation("ASCorthi", "discrete", "qiasc", ("a", "b"), "z = q^-m a", _norm_ascorthi),
    OrthoRelation("cbqHorthi", "discrete", "cbqih", ("a",), "z = q^-m a", _norm_cbqhorthi),
    OrthoRelation("DcdqiHO", "discrete", "cdqih", ("a", "b", "c"), "degrees n >= 0", _norm_dcdqiho, False),
    OrthoRelation("idqiASCO", "discrete", "qiasc", ("a", "b"), "degrees n >= 0", _norm_idqiasco, False),
    OrthoRelation("qBesselcbqiHO", "discrete", "cbqih", ("a",), "degrees n >= 0", _norm_qbesselcbqiho, False),
    OrthoRelation("lqJO", "discrete", "lqj", ("a", "b"), "x = q^m", _norm_lqjo),
    OrthoRelation("thm314", "discrete", "lqj", ("a", "b"), "degrees m >= 0", _norm_thm314, False),
    OrthoRelation("thm316", "discrete", "bqj", ("a", "b", "c"), "degrees m >= 0", _norm_thm316, False),
    OrthoRelation("thm368", "discrete", "qbessel", ("a",), "x = q^n", _norm_thm368),
    OrthoRelation("thm248", "discrete", "qbessel", ("a",), "degrees m >= 0", _norm_thm248, False),
    OrthoRelation("eq189", "bilateral", "cdqih", ("a", "b", "c"), "z = q^-k / alpha", _norm_eq189),
    OrthoRelation("thm420", "bilateral", "qiasc", ("a", "b"), "z = q^-k / alpha", _norm_thm420),
    OrthoRelation("cbqiH-bilateral", "bilateral", "cbqih", ("a",), "z = q^-k / alpha", _norm_cbqih_bilateral),
    OrthoRelation("ismail-masson", "bilateral", "cqih", (), "z = q^-k / alpha", _norm_cqih_bilateral),
    OrthoRelation("bqJO", "qint", "bqj", ("a", "b", "c"), "x in [qc, qa]", _norm_bqjo),
    OrthoRelation("cobqJ", "index", "bqjf", ("a", "b", "c"), "mu in [A, A - i pi/log q]", _norm_cobqj, False),
    OrthoRelation("colqJ", "index", "lqjf", ("a", "b"), "mu in [A, A - i pi/log q]", _norm_colqj, False),
    OrthoRelation("COqiBf", "index", "qibesself", ("a",), "mu in [B, B + i pi/log q]", _norm_coqibf, False),
)}


def _relation(rid, kind=None):
    rel = RELATIONS.get(rid)
    if rel is None:
        raise DomainError(f"unknown orthogonality relation {rid!r}")
    if kind is not None and rel.kind not in (kind if isinstance(kind, tuple) else (kind,)):
        raise DomainError(f"relation {rid!r} is a {rel.kind} relation, not {kind}")
    return rel


def _norms(rel, nmax, P, alpha=None):
    return [rel.norm(i, P, alpha) for i in range(nmax + 1)]


##### Continuous relations on [0, pi]

_PANELS = (0, 1 / 8, 1 / 2, 7 / 8, 1)          # fractions of pi, clustered at the endpoints


def _theta_weight(z, ps, q):
    w = qpoch_inf(z * z, q) * qpoch_inf(1 / (z * z), q)
    for p in ps:
        w /= qpoch_inf(p * z, q) * qpoch_inf(p / z, q)
    return w


def _gauss_gram(ctx, panels, integrand_values, size, degree):
    rule = GaussLegendre(ctx)
    gram = _square(size, ctx)
    for lo, hi in zip(panels, panels[1:]):
        for t, wt in rule.get_nodes(lo, hi, degree, ctx.prec):
            values, weight = integrand_values(t)
            _accumulate(gram, values, weight * wt)
    return gram


def _max_change(g1, g2):
    return max(abs(g1[i][j] - g2[i][j]) for i in range(len(g1)) for j in range(len(g1)))


def _max_entry(g):
    return max(abs(v) for row in g for v in row)


def _refine_gauss(ctx, panels, integrand_values, size, cfg):
    prev = _gauss_gram(ctx, panels, integrand_values, size, cfg.quad_degree)
    change = float("inf")
    for degree in range(cfg.quad_degree + 1, cfg.quad_max_degree + 1):
        cur = _gauss_gram(ctx, panels, integrand_values, size, degree)
        change = _max_change(prev, cur)
        if change <= cfg.quad_tol * _max_entry(cur):
            return cur, {"quadrature_degree": degree, "quadrature_change": float(change)}
        prev = cur
    raise QuadratureError(f"Gauss-Legendre refinement did not settle by degree {cfg.quad_max_degree} "
                          f"(last change {float(change):.3g})")


def verify_continuous_theta(rid, nmax, params, cfg=None):
    """Gram matrix of a [0, pi] relation against 2 pi-normalized norms."""
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "theta")
    P = params
    q = P.q
    q.require_disk("continuous orthogonality")
    ctx = q.ctx
    ps = P.need(*rel.params)
    if any(abs(p) >= 1 for p in ps):
        raise DomainError(f"{rid} needs every parameter inside the unit disk")
    size = nmax + 1

    def integrand_values(t):
        z = ctx.expj(t)
        pt = PointZ.from_z(z, q)
        values = [eval_family(rel.family, n, pt, P) for n in range(size)]
        return values, _theta_weight(z, ps, q)

    panels = [ctx.pi * f for f in _PANELS]
    gram, diag = _refine_gauss(ctx, panels, integrand_values, size, cfg)
    return _report(rid, gram, _norms(rel, nmax, P), diag)


##### Integrals along a line in log z: z = i e^u or z = e^u

def _window(envelope, q, cfg, step=0.5):
    """Smallest U with the integrand envelope negligible at +-U."""
    ctx = q.ctx
    eps = q.eps
    peak = envelope(ctx.zero)
    limits = []
    for sign in (1, -1):
        u = ctx.zero
        quiet = 0
        while quiet < 3:
            u += step
            if u > cfg.imag_window:
                raise QuadratureError(f"integrand still significant at |u| = {cfg.imag_window}")
            e = envelope(sign * u)
            peak = max(peak, e)
            quiet = quiet + 1 if e <= eps * peak else 0
        limits.append(u)
    return max(limits)


def _trapezoid_gram(integrand_values, size, U, q, cfg, h0=0.5, max_halvings=8):
    """Trapezoid sums on [-U, U] with step halving; integrands are analytic and decay fast."""
    ctx = q.ctx
    h = ctx.mpf(h0)
    count = int(ctx.ceil(U / h))
    total = _square(size, ctx)
    for k in range(-count, count + 1):
        values, weight = integrand_values(k * h)
        _accumulate(total, values, weight)
    prev = [[v * h for v in row] for row in total]
    change = float("inf")
    for level in range(1, max_halvings + 1):
        h /= 2
        count *= 2
        for k in range(-count + 1, count, 2):
            values, weight = integrand_values(k * h)
            _accumulate(total, values, weight)
        cur = [[v * h for v in row] for row in total]
        change = _max_change(prev, cur)
        if change <= cfg.quad_tol * _max_entry(cur):
            return cur, {"window": float(U), "step": float(h), "quadrature_change": float(change)}
        prev = cur
    raise QuadratureError(f"trapezoid refinement did not settle (last change {float(change):.3g})")


def _imag_weight(z, ps, q):
    """w(z) * z for the weights (q p z^+-1;q)_inf / (z (q z^+-2;q)_inf)."""
    qq = q.q
    w = 1 / (qpoch_inf(qq * z * z, q) * qpoch_inf(qq / (z * z), q))
    for p in ps:
        w *= qpoch_inf(qq * p * z, q) * qpoch_inf(qq * p / z, q)
    return w


def _line_gram(rid, family, weight_at, point_at, nmax, P, cfg):
    q = P.q
    size = nmax + 1

    def integrand_values(u):
        pt = PointZ.from_z(point_at(u), q)
        return [eval_family(family, n, pt, P) for n in range(size)], weight_at(u)

    def envelope(u):
        values, weight = integrand_values(u)
        return abs(weight) * max(abs(v) for v in values) ** 2

    U = _window(envelope, q, cfg)
    return _trapezoid_gram(integrand_values, size, U, q, cfg)


def verify_continuous_imag(rid, nmax, params, cfg=None):
    """Gram matrix of an imaginary-axis relation; z = i e^u turns dz/z into du."""
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "imag")
    P = params
    q = P.q
    q.require_disk("imaginary-axis orthogonality")
    ctx = q.ctx
    ps = P.need(*rel.params)
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            if _on_lattice(ps[i] * ps[j], q):
                raise DomainError(f"{rid}: parameter product {ps[i] * ps[j]} lies on the q-lattice")

    def point_at(u):
        return 1j * ctx.exp(u)

    gram, diag = _line_gram(rid, rel.family, lambda u: _imag_weight(point_at(u), ps, q), point_at, nmax, P, cfg)
    return _report(rid, gram, _norms(rel, nmax, P), diag)


@dataclass
class WeightDecay:
    ks: list
    ratios: list             # log|w| / (log|z|)^2
    curvature: list          # second differences of log|w| against (log|z|)^2
    target: float


def weight_decay(rid, params, ks=range(5, 16)):
    """Growth of log|w(z)| along |z| = |q|^-k on the imaginary axis."""
    rel = _relation(rid, "imag")
    P = params
    q = P.q
    ctx = q.ctx
    ps = P.need(*rel.params)
    ks = list(ks)
    if len(ks) < 3:
        raise DomainError("weight decay needs at least three lattice radii")
    lq = ctx.log(abs(q.q))
    logs = []
    for k in ks:
        z = 1j * abs(q.q) ** (-k)
        logs.append(ctx.log(abs(_imag_weight(z, ps, q) / z)))
    ratios = [float(l / (k * lq) ** 2) for k, l in zip(ks, logs)]
    curvature = [float((logs[i + 1] - 2 * logs[i] + logs[i - 1]) / (2 * lq * lq)) for i in range(1, len(ks) - 1)]
    target = float((4 - len(ps)) / (2 * lq))
    return WeightDecay(ks=ks, ratios=ratios, curvature=curvature, target=target)


##### q^-1-Hermite measures on the real x-line

def verify_w2_w3(rid, nmax, params, alpha=None, cfg=None):
    """Gram matrices for the log-normal (w2) and theta-quotient (w3) weights.

    Both are computed as half the integral over z in (0, inf), i.e. over the whole real
    x-line; for w2 this equals the integral over [1, inf) whenever the degrees have equal parity.
    """
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "line")
    P = params
    q = P.q
    _require_real_q(q, rid)
    ctx = q.ctx
    L = _log_inv(q)
    diag = {}
    if rid == "w2":
        def weight_at(u):
            return ctx.cosh(u) * ctx.exp(-2 * u * u / L)
    else:
        raw = q.convert(alpha) if alpha is not None else None
        al = _w3_alpha(raw)
        ab = al.conjugate()
        qq = q.q
        diag["alpha_conjugated"] = bool(raw is not None and raw.imag < 0)

        def weight_at(u):
            z = ctx.exp(u)
            den = qpoch_multi([al * z, ab * z, -qq * z / al, -qq * z / ab,
                               -al / z, -ab / z, qq / (al * z), qq / (ab * z)], q)
            return ctx.cosh(u) / den

    gram, qdiag = _line_gram(rid, rel.family, weight_at, lambda u: 1j * ctx.exp(u), nmax, P, cfg)
    diag.update(qdiag)
    return _report(rid, gram, _norms(rel, nmax, P, alpha), diag)


##### Infinite discrete relations

@dataclass(frozen=True)
class _Term:
    family: str
    params: Callable         # P -> ParamSet for the family
    point: Callable          # (j, P) -> point of the family at lattice index j
    weight: Callable         # (j, P) -> weight at summation index j
    scale: Optional[Callable] = None         # (i, P) -> factor on row i and on column i of the Gram matrix
    constant: Optional[Callable] = None      # P -> factor on the whole term


def _same(P):
    return P


def _lattice_z(exponent, prefactor, q):
    return PointZ.from_lattice(LatticePoint(exponent, prefactor), q)


def _zq(j, P):
    return _lattice_z(-j, P.a, P.q)


def _xq(j, P):
    return PointX.from_value(LatticePoint(j, 1), P.q)


def _w_akporth(m, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** binom2(m) * (-qq * b * c) ** m * _ratio2m(qq / (a * a), 1 / (a * a), q, m)
            * qpoch_multi([1 / (a * b), 1 / (a * c), 1 / (a * a)], q, m)
            / qpoch_multi([qq, qq * b / a, qq * c / a], q, m))


def _w_ascorthi(m, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qq ** (2 * binom2(m)) * (qq * b / a) ** m * _ratio2m(qq / (a * a), 1 / (a * a), q, m)
            * qpoch_multi([1 / (a * a), 1 / (a * b)], q, m) / qpoch_multi([qq, qq * b / a], q, m))


def _w_cbqhorthi(m, P):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return (qq ** (3 * binom2(m)) * (-qq / (a * a)) ** m * _ratio2m(qq / (a * a), 1 / (a * a), q, m)
            * qpoch(1 / (a * a), q, m) / qpoch(qq, q, m))


def _w_idqiasco(n, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return qq ** (2 * binom2(n)) * (qq / (a * b)) ** n / qpoch_multi([qq, 1 / (a * b)], q, n)


def _w_qbesselcbqiho(n, P):
    q = P.q
    qq = q.q
    return qq ** binom2(n) * (-qq) ** n / qpoch(qq, q, n)


def _w_lqjo(m, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qq * a) ** m * qpoch(qq * b, q, m) / qpoch(qq, q, m)


def _w_thm314(m, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return ((1 / (qq * a)) ** m * qpoch_multi([qq * a, qq * a * b], q, m) / qpoch_multi([qq, qq * b], q, m)
            * (1 - qq ** (2 * m + 1) * a * b) / (1 - qq * a * b))


def _w_thm316(m, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (-binom2(m)) / (-qq * qq * a * c) ** m
            * qpoch_multi([qq * a, qq * c, qq * a * b], q, m) / qpoch_multi([qq, qq * b, qq * a * b / c], q, m)
            * (1 - qq ** (2 * m + 1) * a * b) / (1 - qq * a * b))


def _w_thm368(n, P):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return qq ** binom2(n) * (qq * a) ** n / qpoch(qq, q, n)


def _w_thm248(m, P):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return (qq ** (-binom2(m)) * (qq * a) ** (-m) * _ratio2m(-qq * a, -a, q, m)
            * qpoch(-a, q, m) / qpoch(qq, q, m))


def _dcdqiho_second(P):
    a, b, c = P.need("a", "b", "c")
    qq = P.q.q
    return P.with_params(b=1 / (qq * b), c=1 / (qq * c))


def _const_dcdqiho_first(P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    return qpoch_inf(1 / (q.q * b * c), q) / qpoch_multi([1 / (a * b), 1 / (a * c)], q)


def _const_dcdqiho_second(P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return qpoch_inf(qq * b * c, q) / qpoch_multi([qq * b / a, qq * c / a], q)


def _scale_dcdqiho_first(m, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    return (b / a) ** m * qpoch(1 / (a * b), q, m) / qpoch(q.q * b / a, q, m)


def _scale_dcdqiho_second(m, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (1 / (qq * a * c)) ** m * qpoch(qq * c / a, q, m) / qpoch(1 / (a * c), q, m)


def _w_dcdqiho_first(n, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (4 * binom2(n)) * (qq / (a * a * b * b * c * c)) ** n
            / qpoch_multi([qq, 1 / (a * b), 1 / (a * c), 1 / (b * c)], q, n))


def _w_dcdqiho_second(n, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qq ** (4 * binom2(n)) * (qq ** 5 * b * b * c * c / (a * a)) ** n
            / qpoch_multi([qq, qq * b / a, qq * c / a, qq * qq * b * c], q, n))


def _zq_over_a(m, P):
    return _lattice_z(m, 1 / P.a, P.q)


DISCRETE = {
    "AKporth": (_Term("cdqih", _same, _zq, _w_akporth),),
    "ASCorthi": (_Term("qiasc", _same, _zq, _w_ascorthi),),
    "cbqHorthi": (_Term("cbqih", _same, _zq, _w_cbqhorthi),),
    "DcdqiHO": (_Term("cdqih", _same, _zq_over_a, _w_dcdqiho_first, _scale_dcdqiho_first, _const_dcdqiho_first),
                _Term("cdqih", _dcdqiho_second, _zq_over_a, _w_dcdqiho_second, _scale_dcdqiho_second,
                      _const_dcdqiho_second)),
    "idqiASCO": (_Term("qiasc", _same, _zq, _w_idqiasco),),
    "qBesselcbqiHO": (_Term("cbqih", _same, _zq, _w_qbesselcbqiho),),
    "lqJO": (_Term("lqj", _same, _xq, _w_lqjo),),
    "thm314": (_Term("lqj", _same, _xq, _w_thm314),),
    "thm316": (_Term("bqj", _same, lambda n, P: PointX.from_value(LatticePoint(n + 1, P.a), P.q), _w_thm316),),
    "thm368": (_Term("qbessel", _same, _xq, _w_thm368),),
    "thm248": (_Term("qbessel", _same, _xq, _w_thm248),),
}

# closure partners: the dual sum of the key reproduces the value's relation
CLOSURE_PAIRS = {"cbqHorthi": "qBesselcbqiHO", "qBesselcbqiHO": "cbqHorthi",
                 "thm368": "thm248", "thm248": "thm368", "ASCorthi": "idqiASCO", "idqiASCO": "ASCorthi"}


def _stated_region(rid, P):
    """Whether the parameters lie in the region the relation is stated for."""
    if rid in ("thm314", "thm316"):
        a, b = P.need("a", "b")
        return bool(abs(a * b) > 1 and abs(P.q.q * b) < abs(a))
    if rid == "idqiASCO":
        a, b = P.need("a", "b")
        return bool(abs(P.q.q * b) < abs(a))
    if rid == "thm368":
        (a,) = P.need("a")
        return bool(_real(a) and a.real > 0)
    return True


def _certified_sum(term, q, cap, start=0, step=1, run=3):
    """Sum of vector-valued term(k), k = start, start+step, ..., stopped by a ratio-test tail bound."""
    ctx = q.ctx
    eps = q.eps
    total = None
    peak = ctx.zero
    prev = None
    quiet = 0
    k = start
    for used in range(1, cap + 1):
        t = term(k)
        total = list(t) if total is None else [s + v for s, v in zip(total, t)]
        mag = max(abs(v) for v in t)
        peak = max(peak, mag)
        scale = max(abs(s) for s in total) or peak
        if mag == 0:
            quiet += 1
        elif prev:
            rho = mag / prev
            quiet = quiet + 1 if rho < 1 and mag * rho / (1 - rho) <= eps * scale else 0
        if quiet >= run:
            return total, used, float(mag)
        prev = mag
        k += step
    raise ConvergenceError(f"lattice sum did not reach its tail bound within {cap} terms")


def _term_gram(term, rel, nmax, P, cfg):
    """sum_j w_j psi(j, i) psi(j, i') for one term, as a flat row-major vector."""
    FP = term.params(P)
    q = P.q
    size = nmax + 1
    if rel.degree_gram:
        def psi(j):
            pt = term.point(j, P)
            return [eval_family(term.family, i, pt, FP) for i in range(size)]
    else:
        points = [term.point(i, P) for i in range(size)]

        def psi(j):
            return [eval_family(term.family, j, pt, FP) for pt in points]

    def summand(j):
        w = term.weight(j, P)
        values = psi(j)
        return [w * values[i] * values[i2] for i in range(size) for i2 in range(size)]

    flat, used, tail = _certified_sum(summand, q, cfg.discrete_cap)
    gram = [flat[i * size:(i + 1) * size] for i in range(size)]
    if term.scale is not None:
        s = [term.scale(i, P) for i in range(size)]
        c = term.constant(P) if term.constant is not None else 1
        gram = [[c * s[i] * s[j] * v for j, v in enumerate(row)] for i, row in enumerate(gram)]
    return gram, used, tail


def verify_discrete(rid, nmax, params, cfg=None):
    """Gram matrix of an infinite discrete relation; tails certified by the ratio test."""
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "discrete")
    P = params
    P.q.require_disk("infinite discrete orthogonality")
    P.need(*rel.params)
    ctx = P.q.ctx
    size = nmax + 1
    gram = _square(size, ctx)
    diag = {"inside_stated_region": _stated_region(rid, P), "terms_used": [], "last_term": []}
    for term in DISCRETE[rid]:
        part, used, tail = _term_gram(term, rel, nmax, P, cfg)
        for i in range(size):
            for j in range(size):
                gram[i][j] += part[i][j]
        diag["terms_used"].append(used)
        diag["last_term"].append(tail)
    return _report(rid, gram, _norms(rel, nmax, P), diag)


def dcdqiho_swap_residual(m, m2, params, cfg=None):
    """Second DcdqiHO term against the first one at (b, c) -> (1/(qc), 1/(qb))."""
    cfg = cfg or DEFAULT_ORTHO
    rel = RELATIONS["DcdqiHO"]
    P = params
    a, b, c = P.need("a", "b", "c")
    qq = P.q.q
    nmax = max(m, m2)
    first, second = DISCRETE["DcdqiHO"]
    swapped = P.with_params(b=1 / (qq * c), c=1 / (qq * b))
    lhs, _, _ = _term_gram(second, rel, nmax, P, cfg)
    rhs, _, _ = _term_gram(first, rel, nmax, swapped, cfg)
    return rel_residual(lhs[m][m2], rhs[m][m2])


def verify_discrete_closure(rid, nmax, params, cfg=None):
    """Dual sums sum_i psi(j, i) psi(j', i) / h_i against delta_{j,j'} / w_j."""
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "discrete")
    if rid not in CLOSURE_PAIRS:
        raise DomainError(f"no closure relation is registered for {rid!r}")
    (term,) = DISCRETE[rid]
    P = params
    q = P.q
    q.require_disk("discrete closure")
    size = nmax + 1
    FP = term.params(P)

    def psi(j, i):
        if rel.degree_gram:
            return eval_family(term.family, i, term.point(j, P), FP)
        return eval_family(term.family, j, term.point(i, P), FP)

    def summand(i):
        h = rel.norm(i, P)
        values = [psi(j, i) for j in range(size)]
        return [values[j] * values[j2] / h for j in range(size) for j2 in range(size)]

    flat, used, tail = _certified_sum(summand, q, cfg.discrete_cap)
    gram = [flat[j * size:(j + 1) * size] for j in range(size)]
    expected = [1 / term.weight(j, P) for j in range(size)]
    return _report(f"{rid}:closure", gram, expected,
                   {"dual_relation": CLOSURE_PAIRS[rid], "terms_used": used, "last_term": tail})


def _rate_akporth(m, n, P):
    a, b, c = P.need("a", "b", "c")
    ctx = P.q.ctx
    lq = ctx.log(abs(P.q.q))
    return m * lq + ctx.log(abs(b * c)) - (2 * n - 1) * lq


def _rate_cbqhorthi(m, n, P):
    (a,) = P.need("a")
    ctx = P.q.ctx
    lq = ctx.log(abs(P.q.q))
    return 3 * m * lq - 2 * ctx.log(abs(a)) - (2 * n - 1) * lq


# predicted log|s_{m+1} / s_m| of the diagonal summand
SUMMAND_RATES = {"AKporth": _rate_akporth, "cbqHorthi": _rate_cbqhorthi}


def summand_slope_check(rid, n, params, ms=range(8, 16)):
    """Measured log|s_{m+1}/s_m| of the diagonal summand against the lattice asymptotics."""
    if rid not in SUMMAND_RATES:
        raise DomainError(f"no summand asymptotics registered for {rid!r}")
    (term,) = DISCRETE[rid]
    P = params
    ctx = P.q.ctx

    def s(m):
        return term.weight(m, P) * eval_family(term.family, n, term.point(m, P), P) ** 2

    rows = []
    for m in ms:
        measured = ctx.log(abs(s(m + 1) / s(m)))
        predicted = SUMMAND_RATES[rid](m, n, P)
        rows.append((m, float(measured), float(predicted), float(abs(measured - predicted) / abs(predicted))))
    return rows


##### Bilateral relations

def _wb_eq189(k, P, alpha):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return (qpoch_multi([alpha / a, alpha / b, alpha / c], q, k)
            / qpoch_multi([qq * alpha * a, qq * alpha * b, qq * alpha * c], q, k)
            * qq ** binom2(k) * (-qq * alpha * a * b * c) ** k * (1 - qq ** (2 * k) * alpha * alpha))


def _wb_thm420(k, P, alpha):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return (qpoch_multi([alpha / a, alpha / b], q, k) / qpoch_multi([qq * alpha * a, qq * alpha * b], q, k)
            * qq ** (2 * binom2(k)) * (qq * alpha * alpha * a * b) ** k * (1 - qq ** (2 * k) * alpha * alpha))


def _wb_cbqih(k, P, alpha):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return (qpoch(alpha / a, q, k) / qpoch(qq * alpha * a, q, k)
            * qq ** (3 * binom2(k)) * (-qq * alpha ** 3 * a) ** k * (1 - qq ** (2 * k) * alpha * alpha))


def _wb_cqih(k, P, alpha):
    qq = P.q.q
    return qq ** (4 * binom2(k)) * (qq * alpha ** 4) ** k * (1 - qq ** (2 * k) * alpha * alpha)


BILATERAL = {"eq189": _wb_eq189, "thm420": _wb_thm420, "cbqiH-bilateral": _wb_cbqih, "ismail-masson": _wb_cqih}


def verify_bilateral(rid, nmax, params, alpha, cfg=None):
    """Gram matrix sum_k psi_m conj(psi_n) w_k over z = q^-k / alpha, k in Z, split at k = 0."""
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "bilateral")
    P = params
    q = P.q
    q.require_disk("bilateral orthogonality")
    ctx = q.ctx
    alpha = q.convert(alpha)
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    ps = P.need(*rel.params)
    for p in ps:
        for v in (p * alpha, p / alpha):
            if _on_lattice(v, q):
                raise DomainError(f"{rid}: {v} lies on the q-lattice")
    if rid == "ismail-masson" and not (_real(alpha) and q.q.real < alpha.real <= 1):
        raise DomainError("the Ismail-Masson bilateral relation needs alpha in (q, 1]")
    size = nmax + 1
    weight = BILATERAL[rid]

    def summand(k):
        pt = _lattice_z(-k, 1 / alpha, q)
        values = [eval_family(rel.family, n, pt, P) for n in range(size)]
        w = weight(k, P, alpha)
        return [w * values[i] * values[j].conjugate() for i in range(size) for j in range(size)]

    upper, up_used, _ = _certified_sum(summand, q, cfg.discrete_cap, start=0, step=1)
    lower, low_used, _ = _certified_sum(summand, q, cfg.discrete_cap, start=-1, step=-1)
    flat = [u + v for u, v in zip(upper, lower)]
    gram = [flat[i * size:(i + 1) * size] for i in range(size)]
    diag = {"terms_used": (up_used, low_used)}
    return _report(rid, gram, _norms(rel, nmax, P, alpha), diag)


##### Big q-Jacobi: Jackson q-integral on [qc, qa]

def verify_qintegral_bqJ(nmax, params, cfg=None):
    """Gram matrix of the big q-Jacobi polynomials for the Jackson q-integral over [qc, qa]."""
    rel = RELATIONS["bqJO"]
    P = params
    q = P.q
    a, b, c = P.need("a", "b", "c")
    qq = q.q
    if not (_real(qq) and _real(a) and _real(b) and _real(c)):
        raise DomainError("bqJO is stated for real q, a, b, c")
    if not (0 < (qq * a).real < 1 and 0 <= (qq * b).real < 1 and c.real < 0):
        raise DomainError("bqJO needs qa in (0,1), qb in [0,1) and c < 0")
    size = nmax + 1
    cache = {}

    def values(x):
        key = (x.real, x.imag) if hasattr(x, "imag") else x
        if key not in cache:
            pt = PointX(x=x)
            weight = (qpoch_inf(x / a, q) * qpoch_inf(x / c, q)
                      / (qpoch_inf(x, q) * qpoch_inf(b * x / c, q)))
            cache[key] = ([eval_family("bqj", m, pt, P) for m in range(size)], weight)
        return cache[key]

    gram = _square(size, q.ctx)
    for i in range(size):
        for j in range(i, size):
            def f(x, i=i, j=j):
                vals, w = values(x)
                return vals[i] * vals[j] * w
            gram[i][j] = gram[j][i] = jackson_qintegral(f, qq * c, qq * a, q)
    return _report("bqJO", gram, _norms(rel, nmax, P), {"points_cached": len(cache)})


##### Index transforms in the degree mu

def _index_setup(rid, P):
    """Segment start, direction factor dmu/dtheta, family point for index n, the weight in mu
    and the point masses (mu_k, mass_k) off the segment."""
    q = P.q
    ctx = q.ctx
    qq = q.q
    lq = ctx.log(qq)
    masses = []
    if rid == "cobqJ":
        a, b, c = P.need("a", "b", "c")
        start = -ctx.log(qq * a * b) / (2 * lq)
        direction = -1j / lq

        def weight(mu):
            qm, qp = q.power(-mu), q.power(mu + 1)
            num = qpoch_inf(q.power(-2 * mu - 1) / (a * b), q) * qpoch_inf(q.power(2 * mu + 1) * a * b, q)
            return num / qpoch_multi([qm, qm / b, qm * c / (a * b), qp * a, qp * c, qp * a * b], q)

        def point(n):
            return PointX.from_value(LatticePoint(-n, 1), q)
    elif rid == "colqJ":
        a, b = P.need("a", "b")
        start = -ctx.log(qq * a * b) / (2 * lq)
        direction = -1j / lq

        def weight(mu):
            qm, qp = q.power(-mu), q.power(mu + 1)
            num = qpoch_inf(q.power(-2 * mu - 1) / (a * b), q) * qpoch_inf(q.power(2 * mu + 1) * a * b, q)
            return num / qpoch_multi([qm, qm / a, qm / b, qm / b, qp * a, qp * a, qp * b, qp * a * b], q)

        def point(n):
            return PointX.from_value(LatticePoint(-1 - n, 1 / b), q)
    else:
        (a,) = P.need("a")
        if not (_real(a) and a.real < 0):
            raise DomainError("COqiBf needs a < 0")
        start = ctx.log(-a) / (2 * lq)
        direction = 1j / lq
        log_sq = ctx.log(qq * qq / (a * a))

        def regular(mu):
            num = qpoch_inf(-q.power(-2 * mu) * a, q) * qpoch_inf(-q.power(2 * mu) / a, q)
            return num / qpoch_inf(-q.power(mu) / a, q) * ctx.exp(4 * binom2(mu) * lq + mu * log_sq)

        def weight(mu):
            return regular(mu) / qpoch_inf(q.power(-mu), q)

        def point(n):
            return PointX.from_value(LatticePoint(-n, 1), q)

        # for -1 < a < 0 the poles mu = k < B of 1/(q^-mu;q)_inf lie left of the segment
        # and each contributes 2 pi i times its residue
        if abs(start - ctx.nint(start)) < 1e-9 and ctx.nint(start) >= 0:
            raise DomainError("COqiBf: a pole of the weight lies on the segment")
        k = 0
        while k < start:
            res = regular(k) / (lq * qpoch(q.power(-k), q, k) * qpoch_inf(qq, q))
            masses.append((ctx.mpf(k), 2 * ctx.pi * 1j * res))
            k += 1
    return start, direction, weight, point, masses


def _midpoint_gram(rel, start, direction, weight, points, P, nodes):
    q = P.q
    ctx = q.ctx
    size = len(points)
    gram = _square(size, ctx)
    step = ctx.pi / nodes
    for j in range(nodes):
        th = (j + ctx.mpf(1) / 2) * step
        mu = start + direction * th
        values = [eval_family(rel.family, mu, pt, P) for pt in points]
        _accumulate(gram, values, weight(mu) * direction * step)
    return gram


def _mass_gram(rel, masses, points, P):
    gram = _square(len(points), P.q.ctx)
    for mu, mass in masses:
        _accumulate(gram, [eval_family(rel.family, mu, pt, P) for pt in points], mass)
    return gram


def verify_index_transform(rid, nmax, params, cfg=None):
    """Gram matrix in the lattice index for a continuous orthogonality in the degree mu."""
    cfg = cfg or DEFAULT_ORTHO
    rel = _relation(rid, "index")
    P = params
    q = P.q
    q.require_disk("index transform")
    start, direction, weight, point, masses = _index_setup(rid, P)
    points = [point(n) for n in range(nmax + 1)]
    discrete = _mass_gram(rel, masses, points, P)
    nodes = cfg.contour_nodes
    prev = _midpoint_gram(rel, start, direction, weight, points, P, nodes)
    change = float("inf")
    while nodes * 2 <= cfg.contour_max_nodes:
        nodes *= 2
        cur = _midpoint_gram(rel, start, direction, weight, points, P, nodes)
        change = _max_change(prev, cur)
        if change <= cfg.quad_tol * _max_entry(cur):
            gram = [[c + d for c, d in zip(crow, drow)] for crow, drow in zip(cur, discrete)]
            diag = {"nodes": nodes, "quadrature_change": float(change), "point_masses": len(masses)}
            return _report(rid, gram, _norms(rel, nmax, P), diag)
        prev = cur
    raise QuadratureError(f"{rid}: midpoint rule did not settle with {cfg.contour_max_nodes} nodes")


##### Total masses

def _mass_askey(P, alpha, f, g, cfg):
    a, b, c, d = P.need("a", "b", "c", "d")
    q = P.q
    ctx = q.ctx
    qq = q.q
    if abs(a * b * c * d) >= abs(qq) ** 3:
        raise DomainError("the Askey q-beta integral needs |abcd| < |q|^3")
    ps = (a, b, c, d)

    def integrand(u):
        z = 1j * ctx.exp(u)
        w = 1 / (qpoch_inf(qq * z * z, q) * qpoch_inf(qq / (z * z), q))
        for p in ps:
            w *= qpoch_inf(-p * z, q) * qpoch_inf(-p / z, q)
        return [ctx.one], w

    lhs = _line_mass(integrand, q, cfg)
    rhs = (qpoch_multi([qq] + [ps[i] * ps[j] / qq for i in range(4) for j in range(i + 1, 4)], q)
           / qpoch_inf(a * b * c * d / qq ** 3, q) * _log_inv(q))
    return lhs, rhs


def _mass_ismail_masson(P, alpha, f, g, cfg):
    a, b, c, d = P.need("a", "b", "c", "d")
    q = P.q
    _require_real_q(q, "the Ismail-Masson q-beta integral")
    ctx = q.ctx
    qq = q.q
    if f is None or g is None:
        raise DomainError("the Ismail-Masson q-beta integral needs f and g")
    f, g = q.convert(f), q.convert(g)
    if f.imag * g.imag >= 0:
        raise DomainError("the Ismail-Masson q-beta integral needs Im f and Im g of opposite sign")
    if f.imag < 0:
        f, g = g, f
    ps = (a, b, c, d)

    def integrand(u):
        z = ctx.exp(u)
        num = ctx.one
        for p in ps:
            num *= qpoch_inf(1j * p * z, q) * qpoch_inf(-1j * p / z, q)
        den = qpoch_multi([f * z, g * z, -qq * z / f, -qq * z / g, -f / z, -g / z, qq / (f * z), qq / (g * z)], q)
        return [ctx.one], 2 * ctx.cosh(u) * num / den

    lhs = _line_mass(integrand, q, cfg)
    pairs = [ps[i] * ps[j] / qq for i in range(4) for j in range(i + 1, 4)]
    rhs = (2 * ctx.pi * 1j * qpoch_multi(pairs, q)
           / (f * qpoch_multi([qq, g / f, qq * f / g, -f * g, -qq / (f * g), a * b * c * d / qq ** 3], q)))
    return lhs, rhs


def _mass_bilateral_6psi6(P, alpha, f, g, cfg):
    a, b, c, d = P.need("a", "b", "c", "d")
    q = P.q
    qq = q.q
    if alpha is None:
        raise DomainError("the bilateral mass needs alpha")
    alpha = q.convert(alpha)
    if not (_real(alpha) and qq.real < alpha.real <= 1):
        raise DomainError("the bilateral mass needs alpha in (q, 1]")
    if abs(a * b * c * d) >= 1 / abs(qq):
        raise DomainError("the bilateral mass needs |abcd| < |q|^-1")
    ps = (a, b, c, d)

    def summand(k):
        z = qq ** (-k) / alpha
        term = qq ** (4 * binom2(k)) * (qq * alpha ** 4) ** k * (1 + qq ** (2 * k) * alpha * alpha)
        for p in ps:
            term *= qpoch_inf(-qq * p * z, q) * qpoch_inf(qq * p / z, q)
        return [term]

    upper, _, _ = _certified_sum(summand, q, cfg.discrete_cap, start=0, step=1)
    lower, _, _ = _certified_sum(summand, q, cfg.discrete_cap, start=-1, step=-1)
    lhs = upper[0] + lower[0]
    pairs = [-qq * ps[i] * ps[j] for i in range(4) for j in range(i + 1, 4)]
    rhs = (qpoch_multi([qq, -alpha * alpha, -qq / (alpha * alpha)] + pairs, q)
           / qpoch_inf(qq * a * b * c * d, q))
    return lhs, rhs


def _line_mass(integrand, q, cfg):
    def envelope(u):
        _, w = integrand(u)
        return abs(w)

    U = _window(envelope, q, cfg)
    gram, _ = _trapezoid_gram(integrand, 1, U, q, cfg)
    return gram[0][0]


TOTAL_MASSES = {"askey_qbeta": _mass_askey, "ismail_masson_qbeta": _mass_ismail_masson,
                "bilateral_6psi6": _mass_bilateral_6psi6}


def verify_total_mass(mid, params, alpha=None, f=None, g=None, cfg=None):
    """Relative residual between a weight's total mass and its product formula."""
    cfg = cfg or DEFAULT_ORTHO
    fn = TOTAL_MASSES.get(mid)
    if fn is None:
        raise DomainError(f"unknown total-mass identity {mid!r}")
    P = params
    P.q.require_disk("total mass")
    filled = P.with_params(**{k: 0 for k in "abcd" if getattr(P, k) is None})
    lhs, rhs = fn(filled, alpha, f, g, cfg)
    return rel_residual(lhs, rhs)


##### Three-term recurrence

@dataclass
class Recurrence:
    A: list
    B: list
    C: list                 # C[0] unused (p_-1 = 0)
    reproduction: list      # |p_{n+1} - recurrence| / |p_{n+1}| at a fourth point


_TTRR_POINTS = ("0.31", "-0.47", "0.73", "0.12")


def _family_point(family, x, q):
    if FAMILIES[family].point == "z":
        return PointZ.from_x(x, q)
    return PointX.from_value(x, q)


def extract_ttrr(fid, nmax, params, points=_TTRR_POINTS):
    """A_n, B_n, C_n of p_{n+1} = (A_n x + B_n) p_n - C_n p_{n-1} from three evaluation points."""
    info = FAMILIES.get(fid)
    if info is None or info.degree != "n":
        raise DomainError(f"{fid!r} is not a polynomial family")
    q = params.q
    ctx = q.ctx
    xs = [q.convert(x) for x in points]
    if len(xs) < 4 or len({(x.real, x.imag) if hasattr(x, "imag") else x for x in xs}) < len(xs):
        raise SingularSystemError("the recurrence needs four distinct points")
    pts = [_family_point(fid, x, q) for x in xs]
    vals = [[eval_family(fid, n, pt, params) for pt in pts] for n in range(nmax + 2)]
    A, B, C, rep = [], [], [ctx.zero], []
    for n in range(nmax + 1):
        if n == 0:
            M = ctx.matrix([[xs[k] * vals[0][k], vals[0][k]] for k in range(2)])
            rhs = ctx.matrix([vals[1][k] for k in range(2)])
        else:
            M = ctx.matrix([[xs[k] * vals[n][k], vals[n][k], -vals[n - 1][k]] for k in range(3)])
            rhs = ctx.matrix([vals[n + 1][k] for k in range(3)])
        try:
            sol = ctx.lu_solve(M, rhs)
        except ZeroDivisionError as e:
            raise SingularSystemError(f"degenerate recurrence system at degree {n}") from e
        A.append(sol[0])
        B.append(sol[1])
        if n > 0:
            C.append(sol[2])
        x4 = xs[3]
        pred = (sol[0] * x4 + sol[1]) * vals[n][3] - (sol[2] * vals[n - 1][3] if n > 0 else 0)
        rep.append(rel_residual(pred, vals[n + 1][3]))
    return Recurrence(A=A, B=B, C=C, reproduction=rep)


def extract_ttrr_and_verify_norm(fid, rid, nmax, params, alpha=None):
    """Residuals of h_n = h_0 (A_0/A_n) prod_{k<=n} C_k against the relation's norms."""
    rel = _relation(rid)
    if rel.family != fid:
        raise DomainError(f"relation {rid!r} is stated for {rel.family!r}, not {fid!r}")
    if not rel.degree_gram or rel.kind == "index":
        raise DomainError(f"the Gram index of {rid!r} is not the polynomial degree")
    rec = extract_ttrr(fid, nmax, params)
    h0 = rel.norm(0, params, alpha)
    out = []
    prod = params.q.ctx.one
    for n in range(nmax + 1):
        if n > 0:
            prod *= rec.C[n]
        out.append(rel_residual(h0 * rec.A[0] / rec.A[n] * prod, rel.norm(n, params, alpha)))
    return out


##### Dispatch

def verify_relation(rid, nmax, params, alpha=None, cfg=None):
    rel = _relation(rid)
    if rel.kind == "theta":
        return verify_continuous_theta(rid, nmax, params, cfg)
    if rel.kind == "imag":
        return verify_continuous_imag(rid, nmax, params, cfg)
    if rel.kind == "line":
        return verify_w2_w3(rid, nmax, params, alpha, cfg)
    if rel.kind == "discrete":
        return verify_discrete(rid, nmax, params, cfg)
    if rel.kind == "bilateral":
        return verify_bilateral(rid, nmax, params, alpha, cfg)
    if rel.kind == "qint":
        return verify_qintegral_bqJ(nmax, params, cfg)
    return verify_index_transform(rid, nmax, params, cfg)
