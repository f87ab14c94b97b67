"""
qaskey qcore.py
Scalars on an mpmath context, q-shifted factorials in every index regime,
q-binomials, the theta function and the Jackson q-integral.
"""

import os
from dataclasses import dataclass, field, replace
from typing import Optional

import mpmath

from qaskey.errors import ConvergenceError, DomainError

__all__ = [
    "PRECISIONS", "QCoreConfig", "BaseQ", "LatticePoint",
    "resolve_precision", "make_context", "parse_scalar",
    "qpoch", "qpoch_inf", "qpoch_inf_bounded", "qpoch_multi", "qbinom",
    "theta", "theta_bilateral", "theta_multi", "jackson_qintegral",
    "binom2", "binom_identities_check", "rel_residual",
    "qpoch_identity_residuals", "critlim_ratio",
]

PRECISIONS = {"standard": 53, "wide": 106}
PRECISION_ENV = "QASKEY_PRECISION"
RESIDUAL_FLOOR = 1e-300


@dataclass
class QCoreConfig:
    """Default configuration"""
    eps_trunc: Optional[float] = None                    # None: 2^-(prec+6)
    max_factors: int           = 100_000


DEFAULT_QCORE = QCoreConfig()


def resolve_precision(flag=None, default="standard"):
    """Pick the precision name: explicit flag, then QASKEY_PRECISION, then the configured default."""
    name = flag or os.environ.get(PRECISION_ENV) or default
    name = str(name).strip().lower()
    if name not in PRECISIONS:
        raise DomainError(f"unknown precision {name!r} (expected one of {', '.join(PRECISIONS)})")
    return name


def make_context(precision="standard"):
    """One private mpmath context per evaluation; contexts are never shared between threads."""
    ctx = mpmath.MPContext()
    ctx.prec = PRECISIONS[resolve_precision(precision)]
    return ctx


def parse_scalar(text, ctx):
    """Parse 're+imi' / 're' / 'imi' literals exactly in the context's precision."""
    if not isinstance(text, str):
        return ctx.convert(text)
    s = text.strip().replace(" ", "")
    if not s:
        raise DomainError("empty number literal")
    try:
        if not s.endswith(("i", "j")):
            return ctx.mpf(s.lstrip("+"))
        body = s[:-1]
        split = None
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                split = pos
                break
        if split is None:
            re_part, im_part = "0", body
        else:
            re_part, im_part = body[:split], body[split:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return ctx.mpc(ctx.mpf(re_part.lstrip("+")), ctx.mpf(im_part.lstrip("+")))
    except ValueError as e:
        raise DomainError(f"malformed number literal {text!r}") from e


@dataclass(frozen=True)
class BaseQ:
    """The base q with its regime: 'disk' (0<|q|<1) or 'off-circle' (|q|>1).

    The kernel limits travel with the base: max_factors caps (a;q)_inf and
    series_cfg (a SeriesConfig, None for its defaults) bounds every series
    summed over this base.
    """
    ctx: object = field(compare=False, repr=False)
    q: object
    regime: str
    eps_trunc: Optional[float] = None
    max_factors: Optional[int] = field(default=None, compare=False)
    series_cfg: object = field(default=None, compare=False, repr=False)

    @classmethod
    def from_value(cls, q, precision="standard", ctx=None, eps_trunc=None, max_factors=None,
                   series_cfg=None):
        ctx = ctx or make_context(precision)
        qv = parse_scalar(q, ctx) if isinstance(q, str) else ctx.convert(q)
        if qv == 0:
            raise DomainError("q must be nonzero")
        mod = abs(qv)
        if mod == 1:
            raise DomainError("|q| = 1 is excluded")
        return cls(ctx=ctx, q=qv, regime="disk" if mod < 1 else "off-circle", eps_trunc=eps_trunc,
                   max_factors=max_factors, series_cfg=series_cfg)

    @classmethod
    def from_config(cls, q, cfg):
        """Base built with the precision and kernel limits of a loaded Config."""
        return cls.from_value(q, cfg.main.precision, eps_trunc=cfg.qcore.eps_trunc,
                              max_factors=cfg.qcore.max_factors, series_cfg=cfg.series)

    def promoted(self, bits):
        """Same base on a fresh context `bits` wider; the truncation threshold follows the new precision."""
        ctx = mpmath.MPContext()
        ctx.prec = self.ctx.prec + max(0, int(bits))
        return replace(self, ctx=ctx, q=ctx.convert(self.q), eps_trunc=None)

    def narrow(self, x):
        """A value from a promoted context rounded back into this one."""
        return +self.ctx.convert(x)

    @property
    def prec(self):
        return self.ctx.prec

    @property
    def eps(self):
        """Truncation threshold for infinite products and series."""
        if self.eps_trunc is not None:
            return self.ctx.mpf(self.eps_trunc)
        return self.ctx.ldexp(1, -(self.ctx.prec + 6))

    @property
    def snap(self):
        """Factors 1 - a q^k below this size are lattice zeros."""
        return self.ctx.ldexp(1, -(self.ctx.prec - 10))

    @property
    def is_disk(self):
        return self.regime == "disk"

    def inverse(self):
        return replace(self, q=1 / self.q, regime="off-circle" if self.is_disk else "disk")

    def squared(self):
        return replace(self, q=self.q * self.q)

    def power(self, k):
        """q**k for integer or complex k (principal branch for non-integers)."""
        if isinstance(k, int):
            return self.q ** k
        k = self.ctx.convert(k)
        if k.imag == 0 and k.real == int(k.real):
            return self.q ** int(k.real)
        return self.ctx.exp(k * self.ctx.log(self.q))

    def convert(self, x):
        if isinstance(x, LatticePoint):
            return x.value(self)
        if isinstance(x, str):
            return parse_scalar(x, self.ctx)
        return self.ctx.convert(x)

    def require_disk(self, what):
        if not self.is_disk:
            raise DomainError(f"{what} requires 0 < |q| < 1")


@dataclass(frozen=True)
class LatticePoint:
    """prefactor * q**exponent, kept apart so q-shifts stay exact."""
    exponent: int
    prefactor: object = 1

    def value(self, q):
        return q.ctx.convert(self.prefactor) * q.q ** self.exponent

    def inverse(self):
        return LatticePoint(-self.exponent, 1 / self.prefactor)

    def scaled(self, c):
        return LatticePoint(self.exponent, c * self.prefactor)

    def shifted(self, k):
        return LatticePoint(self.exponent + k, self.prefactor)


def _factor(one_minus, q):
    return 0 if abs(one_minus) < q.snap else one_minus


def qpoch(a, q, n):
    """(a;q)_n for any integer n; n < 0 through (a;q)_{-m} = q^{C(m,2)}(-q/a)^m/(q/a;q)_m."""
    ctx = q.ctx
    a = q.convert(a)
    n = int(n)
    if n == 0:
        return ctx.one
    if n > 0:
        prod = ctx.one
        t = a
        for _ in range(n):
            f = _factor(1 - t, q)
            if f == 0:
                return ctx.zero
            prod *= f
            t *= q.q
        return prod
    m = -n
    if a == 0:
        raise DomainError("(0;q)_n with n < 0 is undefined")
    b = q.q / a
    den = ctx.one
    t = b
    for _ in range(m):
        f = _factor(1 - t, q)
        if f == 0:
            raise DomainError(f"(a;q)_{n}: vanishing denominator factor at a={a}")
        den *= f
        t *= q.q
    return q.q ** binom2(m) * (-b) ** m / den


def qpoch_inf_bounded(a, q, max_factors=None):
    """(a;q)_inf and the relative tail bound |a q^N|/(1-|q|) of the dropped factors."""
    q.require_disk("(a;q)_inf")
    max_factors = max_factors or q.max_factors or DEFAULT_QCORE.max_factors
    ctx = q.ctx
    a = q.convert(a)
    eps = q.eps
    prod = ctx.one
    t = a
    for _ in range(max_factors):
        if abs(t) < eps:
            return prod, abs(t) / (1 - abs(q.q))
        f = _factor(1 - t, q)
        if f == 0:
            return ctx.zero, ctx.zero
        prod *= f
        t *= q.q
    raise ConvergenceError(f"(a;q)_inf did not converge within {max_factors} factors")


def qpoch_inf(a, q, max_factors=None):
    """(a;q)_inf, requires 0 < |q| < 1."""
    return qpoch_inf_bounded(a, q, max_factors)[0]


def qpoch_multi(args, q, n=None):
    """(a1,...,ak;q)_n; n=None means n = infinity."""
    prod = q.ctx.one
    for a in args:
        prod *= qpoch_inf(a, q) if n is None else qpoch(a, q, n)
    return prod


def qbinom(n, k, q):
    """Gaussian binomial [n k]_q."""
    if k < 0 or k > n:
        raise DomainError(f"q-binomial needs 0 <= k <= n, got n={n}, k={k}")
    qq = q.q
    return qpoch(qq, q, n) / (qpoch(qq, q, k) * qpoch(qq, q, n - k))


def theta(z, q):
    """theta(z;q) = (z, q/z; q)_inf."""
    z = q.convert(z)
    if z == 0:
        raise DomainError("theta(z;q) needs z != 0")
    q.require_disk("theta(z;q)")
    return qpoch_inf(z, q) * qpoch_inf(q.q / z, q)


def theta_multi(zs, q):
    prod = q.ctx.one
    for z in zs:
        prod *= theta(z, q)
    return prod


def _bilateral_half(term_at, q, start, step, cap):
    total = q.ctx.zero
    scale = q.ctx.zero
    small = 0
    prev = None
    k = start
    for _ in range(cap):
        t = term_at(k)
        mag = abs(t)
        total += t
        scale = max(scale, mag)
        if prev is not None and mag <= prev and mag <= q.eps * scale:
            small += 1
            if small >= 3:
                return total, scale
        else:
            small = 0
        prev = mag
        k += step
    raise ConvergenceError("bilateral theta sum did not decay")


def theta_bilateral(z, q, cap=100_000):
    """Sum side of the triple product: (1/(q;q)_inf) sum_{n in Z} (-1)^n q^{C(n,2)} z^n."""
    z = q.convert(z)
    if z == 0:
        raise DomainError("theta(z;q) needs z != 0")
    q.require_disk("theta(z;q)")
    qq = q.q

    def term_at(k):
        return (-1) ** (k % 2) * qq ** binom2(k) * z ** k

    up, _ = _bilateral_half(term_at, q, 0, 1, cap)
    down, _ = _bilateral_half(term_at, q, -1, -1, cap)
    return (up + down) / qpoch_inf(qq, q)


def _jackson_side(f, end, q, tol, cap):
    ctx = q.ctx
    if end == 0:
        return ctx.zero
    total = ctx.zero
    scale = ctx.zero
    small = 0
    qn = ctx.one
    for _ in range(cap):
        term = qn * f(qn * end)
        total += term
        scale = max(scale, abs(term))
        if abs(term) <= tol * max(abs(total), scale):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        qn *= q.q
    raise ConvergenceError(f"Jackson q-integral terms did not decay within {cap} points")


def jackson_qintegral(f, a, b, q, tol=None, cap=100_000):
    """int_a^b f d_q u = (1-q)[b sum q^n f(q^n b) - a sum q^n f(q^n a)]."""
    q.require_disk("Jackson q-integral")
    a = q.convert(a)
    b = q.convert(b)
    tol = q.eps if tol is None else q.ctx.mpf(tol)
    if a == b:
        return q.ctx.zero
    upper = _jackson_side(f, b, q, tol, cap)
    lower = _jackson_side(f, a, q, tol, cap)
    return (1 - q.q) * (b * upper - a * lower)


def binom2(mu):
    """C(mu,2) = mu(mu-1)/2, exact for integers."""
    if isinstance(mu, int):
        return mu * (mu - 1) // 2
    return mu * (mu - 1) / 2


def binom_identities_check(n, k, mu=None):
    """Largest residual of C(n+k,2), C(n-k,2) splittings and, with mu, their complex extension."""
    residual = max(
        abs(binom2(n + k) - (binom2(n) + binom2(k) + k * n)),
        abs(binom2(n - k) - (binom2(n) + binom2(k) + k * (1 - n))),
    )
    residual = float(residual)
    if mu is not None:
        ext = abs(binom2(mu + k) - (binom2(mu) + binom2(k) + k * mu))
        residual = max(residual, float(ext), float(abs(binom2(mu) - mu * (mu - 1) / 2)))
    return residual


def rel_residual(lhs, rhs, floor=RESIDUAL_FLOOR):
    """|lhs - rhs| / max(|lhs|, |rhs|, floor) as a float."""
    scale = max(abs(lhs), abs(rhs), floor)
    return float(abs(lhs - rhs) / scale)


def qpoch_identity_residuals(a, b, q, n, k):
    """Residuals of the q-shifted factorial identities at one parameter point (0 <= k <= n)."""
    ctx = q.ctx
    a = q.convert(a)
    b = q.convert(b)
    qq = q.q
    qi = q.inverse()
    C = binom2
    out = {
        "shift": rel_residual(qpoch(a, q, n + k), qpoch(a, q, k) * qpoch(a * qq ** k, q, n)),
        "base_inversion": rel_residual(
            qpoch(a, qi, n), qq ** (-C(n)) * (-a) ** n * qpoch(1 / a, q, n)),
        "reflection": rel_residual(
            qpoch(a, q, n), qpoch(qq ** (1 - n) / a, q, n) * (-a) ** n * qq ** C(n)),
        "negative_index": rel_residual(qpoch(a, q, -n) * qpoch(a * qq ** (-n), q, n), ctx.one),
        "lattice_shift": rel_residual(
            qpoch(qq ** (-n - k), q, k),
            qq ** (-C(k)) * (-qq) ** (-k) * qq ** (-n * k) * qpoch(qq, q, k)
            * qpoch(qq ** (1 + k), q, n) / qpoch(qq, q, n)),
        "squared_base": rel_residual(qpoch(a, q, n) * qpoch(-a, q, n), qpoch(a * a, q.squared(), n)),
    }
    if k <= n:
        out["ratio"] = rel_residual(
            qpoch(a, q, n - k) / qpoch(b, q, n - k),
            (b / a) ** k * qpoch(a, q, n) * qpoch(qq ** (1 - n) / b, q, k)
            / (qpoch(b, q, n) * qpoch(qq ** (1 - n) / a, q, k)))
        out["lattice_expansion"] = rel_residual(
            qpoch(qq ** (-n), q, k),
            (-1) ** k * qq ** C(k) * qq ** (-n * k) * qpoch(qq, q, n) / qpoch(qq, q, n - k))
    if q.is_disk:
        root = ctx.sqrt(qq)
        out["square_factorisation"] = rel_residual(
            qpoch_inf(a * a, q), qpoch_multi([a, -a, root * a, -root * a], q))
    return out


def critlim_ratio(x, q, n, a):
    """a^n (x/a;q)_n / (q^{C(n,2)} (-x)^n); tends to 1 as a -> 0."""
    x = q.convert(x)
    a = q.convert(a)
    return a ** n * qpoch(x / a, q, n) / (q.q ** binom2(n) * (-x) ** n)
