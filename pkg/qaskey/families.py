"""
qaskey families.py
Askey-Wilson subfamilies (q and q^-1), big/little q-Jacobi polynomials and functions,
q and q^-1-Bessel polynomials and the q^-1-Bessel function, in every listed representation.
"""

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Optional

from qaskey.errors import ConvergenceError, DomainError, SingularRepresentationError
from qaskey.qcore import BaseQ, LatticePoint, binom2, qpoch, qpoch_inf, rel_residual
from qaskey.series import (SeriesSpec, config_for, eval_phi, gated, is_accurate, note_condition,
                           track_condition)

__all__ = [
    "FamilyId", "PointZ", "PointX", "ParamSet", "FamilyEval", "FAMILIES", "LIMIT_EDGES",
    "eval_family", "evaluate", "verify_limit_chain", "verify_q_inversion", "verify_symmetries",
    "connection_cqH", "ks_normalization", "polynomial_degree_check", "representation_spread",
]


##### Points and parameters

@dataclass(frozen=True)
class PointZ:
    """z with x = (z + 1/z)/2; stored as the canonical one of z, 1/z so both give identical values."""
    z: object
    x: object
    lattice: Optional[LatticePoint] = None

    @classmethod
    def from_z(cls, z, q):
        if isinstance(z, LatticePoint):
            return cls.from_lattice(z, q)
        z = q.convert(z)
        if z == 0:
            raise DomainError("z must be nonzero")
        if _flip(z):
            z = 1 / z
        return cls(z=z, x=(z + 1 / z) / 2)

    @classmethod
    def from_lattice(cls, lp, q):
        z = lp.value(q)
        if z == 0:
            raise DomainError("z must be nonzero")
        if _flip(z):
            lp = lp.inverse()
            z = lp.value(q)
        return cls(z=z, x=(z + 1 / z) / 2, lattice=lp)

    @classmethod
    def from_x(cls, x, q):
        ctx = q.ctx
        x = q.convert(x)
        return cls.from_z(x + ctx.sqrt(x * x - 1), q)

    def on(self, q):
        """The same point on another base, e.g. a promoted one."""
        if self.lattice is not None:
            return PointZ.from_lattice(self.lattice, q)
        z = q.convert(self.z)
        return PointZ(z=z, x=(z + 1 / z) / 2)

    def times(self, c):
        return c * self.z

    def over(self, c):
        return c / self.z


def _flip(z):
    mod = abs(z)
    if mod != 1:
        return mod < 1
    return z.imag < 0


@dataclass(frozen=True)
class PointX:
    x: object
    lattice: Optional[LatticePoint] = None

    @classmethod
    def from_value(cls, x, q):
        if isinstance(x, LatticePoint):
            return cls(x=x.value(q), lattice=x)
        return cls(x=q.convert(x))

    def on(self, q):
        if self.lattice is not None:
            return PointX(x=self.lattice.value(q), lattice=self.lattice)
        return PointX(x=q.convert(self.x))


@dataclass(frozen=True)
class ParamSet:
    q: BaseQ
    a: object = None
    b: object = None
    c: object = None
    d: object = None

    @classmethod
    def build(cls, q, **kw):
        conv = {k: (None if v is None else q.convert(v)) for k, v in kw.items()}
        return cls(q=q, **conv)

    def need(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise DomainError(f"missing parameter {', '.join(repr(m) for m in missing)}")
        return [getattr(self, n) for n in names]

    def with_base(self, q):
        return replace(self, q=q)

    def on(self, q):
        """Parameters converted onto another base with the same q."""
        return ParamSet(q=q, **{n: None if getattr(self, n) is None else q.convert(getattr(self, n))
                                for n in ("a", "b", "c", "d")})

    def with_params(self, **kw):
        return replace(self, **{k: self.q.convert(v) for k, v in kw.items()})


@dataclass(frozen=True)
class FamilyId:
    id: str
    rep: int = 1

    def __post_init__(self):
        info = FAMILIES.get(self.id)
        if info is None:
            raise DomainError(f"unknown family {self.id!r}")
        if self.rep not in info.reps:
            raise DomainError(f"family {self.id!r} has representations {sorted(info.reps)}, not {self.rep}")


@dataclass(frozen=True)
class FamilyEval:
    family: str
    rep: int
    degree: object
    value: object
    condition: float = 1.0
    prec: int = 53


##### Helpers shared by the representations

def _nz(*vals):
    for v in vals:
        if v == 0:
            raise SingularRepresentationError("representation divides by a zero parameter")


def _den(a, q, n, tol=None):
    """(a;q)_n used as a denominator; a lattice zero makes the representation singular."""
    tol = config_for(q).sing_tol if tol is None else tol
    t = q.convert(a)
    prod = q.ctx.one
    for _ in range(n):
        f = 1 - t
        if abs(f) < tol:
            raise SingularRepresentationError(f"denominator (a;q)_{n} vanishes at a={a}")
        prod *= f
        t *= q.q
    return prod


def _phi(numer, denom, q, arg, n=None, offset=0):
    return eval_phi(SeriesSpec.build(numer, denom, q, arg, offset, n)).value


def _int_degree(n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise DomainError(f"polynomial degree must be an integer >= 0, got {n!r}")
    return n


##### Askey-Wilson

def _aw1(n, pt, P):
    a, b, c, d = P.need("a", "b", "c", "d")
    q = P.q
    _nz(a)
    qq = q.q
    pre = a ** (-n) * qpoch(a * b, q, n) * qpoch(a * c, q, n) * qpoch(a * d, q, n)
    return pre * _phi([qq ** (-n), qq ** (n - 1) * a * b * c * d, pt.times(a), pt.over(a)],
                      [a * b, a * c, a * d], q, qq, n)


def _aw2(n, pt, P):
    a, b, c, d = P.need("a", "b", "c", "d")
    q = P.q
    _nz(a, b, c, d)
    qq = q.q
    s = a * b * c * d
    pre = (qq ** (-binom2(n)) * (-a) ** (-n) * qpoch(s / qq, q, 2 * n)
           * qpoch(pt.times(a), q, n) * qpoch(pt.over(a), q, n) / _den(s / qq, q, n))
    w = qq ** (1 - n)
    return pre * _phi([qq ** (-n), w / (a * b), w / (a * c), w / (a * d)],
                      [qq ** (2 - 2 * n) / s, w * pt.times(1 / a), w * pt.over(1 / a)], q, qq, n)


def _aw3(n, pt, P):
    a, b, c, d = P.need("a", "b", "c", "d")
    q = P.q
    _nz(c, d)
    qq = q.q
    z = pt.z
    w = qq ** (1 - n)
    pre = z ** n * qpoch(a * b, q, n) * qpoch(pt.over(c), q, n) * qpoch(pt.over(d), q, n)
    return pre * _phi([qq ** (-n), pt.times(a), pt.times(b), w / (c * d)],
                      [a * b, w * pt.times(1 / c), w * pt.times(1 / d)], q, qq, n)


##### Continuous dual q-Hahn and its q^-1 analogue

def _cdqh1(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(a)
    qq = q.q
    pre = a ** (-n) * qpoch(a * b, q, n) * qpoch(a * c, q, n)
    return pre * _phi([qq ** (-n), pt.times(a), pt.over(a)], [a * b, a * c], q, qq, n)


def _cdqh2(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(a, b, c)
    qq = q.q
    w = qq ** (1 - n)
    pre = qq ** (-binom2(n)) * (-a) ** (-n) * qpoch(pt.times(a), q, n) * qpoch(pt.over(a), q, n)
    return pre * _phi([qq ** (-n), w / (a * b), w / (a * c)],
                      [w * pt.times(1 / a), w * pt.over(1 / a)], q, qq ** n * b * c, n)


def _cdqh3(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(c)
    qq = q.q
    z = pt.z
    pre = z ** n * qpoch(a * b, q, n) * qpoch(pt.over(c), q, n)
    return pre * _phi([qq ** (-n), pt.times(a), pt.times(b)],
                      [a * b, qq ** (1 - n) * pt.times(1 / c)], q, pt.over(qq / c), n)


def _cdqh4(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(a, b)
    qq = q.q
    z = pt.z
    w = qq ** (1 - n)
    pre = z ** n * qpoch(pt.over(a), q, n) * qpoch(pt.over(b), q, n)
    return pre * _phi([qq ** (-n), pt.times(c), w / (a * b)],
                      [w * pt.times(1 / a), w * pt.times(1 / b)], q, qq, n)


def _cdqih1(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(a, b, c)
    qq = q.q
    pre = qq ** (-2 * binom2(n)) * (a * b * c) ** n * qpoch(1 / (a * b), q, n) * qpoch(1 / (a * c), q, n)
    return pre * _phi([qq ** (-n), pt.times(1 / a), pt.over(1 / a)],
                      [1 / (a * b), 1 / (a * c)], q, qq ** n / (b * c), n)


def _cdqih2(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(a)
    qq = q.q
    w = qq ** (1 - n)
    pre = qq ** (-binom2(n)) * (-a) ** n * qpoch(pt.times(1 / a), q, n) * qpoch(pt.over(1 / a), q, n)
    return pre * _phi([qq ** (-n), w * a * b, w * a * c], [w * pt.times(a), w * pt.over(a)], q, qq, n)


def _cdqih3(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(a, b, c)
    qq = q.q
    pre = qq ** (-2 * binom2(n)) * (a * b * c) ** n * qpoch(1 / (a * b), q, n) * qpoch(pt.times(1 / c), q, n)
    return pre * _phi([qq ** (-n), pt.over(1 / a), pt.over(1 / b)],
                      [qq ** (1 - n) * pt.over(c), 1 / (a * b)], q, qq, n)


def _cdqih4(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    _nz(c)
    qq = q.q
    w = qq ** (1 - n)
    pre = (qq ** (-2 * binom2(n)) * pt.over(a * b) ** n
           * qpoch(pt.times(1 / a), q, n) * qpoch(pt.times(1 / b), q, n))
    return pre * _phi([qq ** (-n), pt.over(1 / c), w * a * b], [w * pt.over(a), w * pt.over(b)],
                      q, pt.over(qq * c), n)


##### Al-Salam-Chihara and its q^-1 analogue

def _asc1(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a)
    qq = q.q
    return a ** (-n) * qpoch(a * b, q, n) * _phi([qq ** (-n), pt.times(a), pt.over(a)], [a * b], q, qq, n,
                                                 offset=1)


def _asc2(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a, b)
    qq = q.q
    w = qq ** (1 - n)
    pre = qq ** (-binom2(n)) * (-a) ** (-n) * qpoch(pt.times(a), q, n) * qpoch(pt.over(a), q, n)
    return pre * _phi([qq ** (-n), w / (a * b)], [w * pt.times(1 / a), w * pt.over(1 / a)], q,
                      qq * b / a, n)


def _asc3(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    z = pt.z
    return z ** n * qpoch(a * b, q, n) * _phi([qq ** (-n), pt.times(a), pt.times(b)], [a * b], q,
                                              qq ** n / (z * z), n)


def _asc4(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a)
    qq = q.q
    z = pt.z
    return z ** n * qpoch(pt.over(a), q, n) * _phi([qq ** (-n), pt.times(b)], [qq ** (1 - n) * pt.times(1 / a)],
                                                   q, pt.over(qq / a), n)


def _asc5(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a, b)
    qq = q.q
    z = pt.z
    w = qq ** (1 - n)
    pre = z ** n * qpoch(pt.over(a), q, n) * qpoch(pt.over(b), q, n)
    return pre * _phi([qq ** (-n), w / (a * b)], [w * pt.times(1 / a), w * pt.times(1 / b)], q, qq, n,
                      offset=-1)


def _qiasc1(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a, b)
    qq = q.q
    pre = qq ** (-binom2(n)) * (-b) ** n * qpoch(1 / (a * b), q, n)
    return pre * _phi([qq ** (-n), pt.times(1 / a), pt.over(1 / a)], [1 / (a * b)], q, qq ** n * a / b, n)


def _qiasc2(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a)
    qq = q.q
    w = qq ** (1 - n)
    pre = qq ** (-binom2(n)) * (-a) ** n * qpoch(pt.times(1 / a), q, n) * qpoch(pt.over(1 / a), q, n)
    return pre * _phi([qq ** (-n), w * a * b], [w * pt.times(a), w * pt.over(a)], q, qq, n, offset=-1)


def _qiasc3(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(a, b)
    qq = q.q
    pre = qq ** (-binom2(n)) * (-a * b * pt.z) ** n * qpoch(1 / (a * b), q, n)
    return pre * _phi([qq ** (-n), pt.over(1 / a), pt.over(1 / b)], [1 / (a * b)], q, qq, n, offset=1)


def _qiasc4(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(b)
    qq = q.q
    pre = qq ** (-binom2(n)) * (-a) ** n * qpoch(pt.over(1 / a), q, n)
    return pre * _phi([qq ** (-n), pt.times(1 / b)], [qq ** (1 - n) * pt.times(a)], q, pt.times(qq * b), n)


def _qiasc5(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    z = pt.z
    w = qq ** (1 - n)
    pre = qq ** (-2 * binom2(n)) * (a * b * z) ** n * qpoch(pt.over(1 / a), q, n) * qpoch(pt.over(1 / b), q, n)
    return pre * _phi([qq ** (-n), w * a * b], [w * pt.times(a), w * pt.times(b)], q, qq * z * z, n)


##### Continuous big q-Hermite and its q^-1 analogue

def _cbqh1(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    return a ** (-n) * _phi([qq ** (-n), pt.times(a), pt.over(a)], [], q, qq, n, offset=2)


def _cbqh2(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    w = qq ** (1 - n)
    pre = qq ** (-binom2(n)) * (-a) ** (-n) * qpoch(pt.times(a), q, n) * qpoch(pt.over(a), q, n)
    return pre * _phi([qq ** (-n)], [w * pt.times(1 / a), w * pt.over(1 / a)], q, qq ** (2 - n) / (a * a), n)


def _cbqh3(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    z = pt.z
    return z ** n * qpoch(pt.over(a), q, n) * _phi([qq ** (-n)], [qq ** (1 - n) * pt.times(1 / a)], q,
                                                   pt.over(qq / a), n, offset=-1)


def _cbqh4(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    z = pt.z
    return z ** n * _phi([qq ** (-n), pt.times(a)], [], q, qq ** n / (z * z), n)


def _cbqih1(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    return a ** (-n) * _phi([qq ** (-n), pt.times(1 / a), pt.over(1 / a)], [], q, qq ** n * a * a, n)


def _cbqih2(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    w = qq ** (1 - n)
    pre = qq ** (-binom2(n)) * (-a) ** n * qpoch(pt.times(1 / a), q, n) * qpoch(pt.over(1 / a), q, n)
    return pre * _phi([qq ** (-n)], [w * pt.times(a), w * pt.over(a)], q, qq, n, offset=-2)


def _cbqih3(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    z = pt.z
    pre = qq ** (-binom2(n)) * (-a) ** n * qpoch(pt.over(1 / a), q, n)
    return pre * _phi([qq ** (-n)], [qq ** (1 - n) * pt.times(a)], q, qq * z * z, n)


def _cbqih4(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    z = pt.z
    return z ** n * _phi([qq ** (-n), pt.over(1 / a)], [], q, pt.over(qq * a), n, offset=1)


##### Continuous q-Hermite and its q^-1 analogue

def _cqh1(n, pt, P):
    qq = P.q.q
    z = pt.z
    return z ** n * _phi([qq ** (-n)], [], P.q, qq ** n / (z * z), n, offset=-1)


def _cqih1(n, pt, P):
    qq = P.q.q
    z = pt.z
    return z ** n * _phi([qq ** (-n)], [], P.q, qq / (z * z), n, offset=1)


##### Big q-Jacobi polynomials and function

def _bqj1(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return _phi([qq ** (-n), qq ** (n + 1) * a * b, pt.x], [qq * a, qq * c], q, qq, n)


def _bqj2(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    x = pt.x
    _nz(a, b, c, x)
    qq = q.q
    pre = qq ** binom2(n) * (-qq * a) ** n * qpoch(b * x / c, q, n) / _den(qq * a, q, n)
    return pre * _phi([qq ** (-n), qq ** (-n) * c / (a * b), qq * c / x],
                      [qq * c, qq ** (1 - n) * c / (b * x)], q, qq, n)


def _bqj3(n, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    x = pt.x
    _nz(b, c, x)
    qq = q.q
    pre = qq ** binom2(n) * (-qq * c) ** n * qpoch(b * x / c, q, n) / _den(qq * c, q, n)
    return pre * _phi([qq ** (-n), qq ** (-n) / b, qq * a / x],
                      [qq * a, qq ** (1 - n) * c / (b * x)], q, qq, n)


def _bqjf1(mu, pt, P):
    a, b, c = P.need("a", "b", "c")
    q = P.q
    qq = q.q
    return _phi([q.power(-mu), q.power(mu + 1) * a * b, pt.x], [qq * a, qq * c], q, qq,
                _integer_or_none(mu))


##### Little q-Jacobi polynomials and function

def _lqj1(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return _phi([qq ** (-n), qq ** (n + 1) * a * b], [qq * a], q, qq * pt.x, n)


def _lqj2(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    _nz(b)
    qq = q.q
    pre = qq ** (-binom2(n)) * (-qq * b) ** (-n) * qpoch(qq * b, q, n) / _den(qq * a, q, n)
    return pre * _phi([qq ** (-n), qq ** (n + 1) * a * b, qq * b * pt.x], [qq * b, 0], q, qq, n)


def _lqj3(n, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    x = pt.x
    _nz(b, x)
    qq = q.q
    return qpoch(qq * b * x, q, n) * _phi([qq ** (-n), qq ** (-n) / b, 0], [qq * a, qq ** (-n) / (b * x)],
                                          q, qq, n)


def _lqjf1(mu, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    qq = q.q
    return _phi([q.power(-mu), q.power(mu + 1) * a * b], [qq * a], q, qq * pt.x, _integer_or_none(mu))


def _lqjf2(mu, pt, P):
    """Two-term form through 3phi2 series at argument q; valid for |qx| >= 1 as well."""
    a, b = P.need("a", "b")
    q = P.q
    _nz(b)
    qq = q.q
    x = pt.x
    qm, qp = q.power(-mu), q.power(mu + 1)
    first = (qpoch_inf(qp * a, q) * qpoch_inf(qm / b, q) / (_inf_den(qq * a, q) * _inf_den(1 / b, q))
             * _phi([qm, qp * a * b, qq * b * x], [qq * b, 0], q, qq, _integer_or_none(mu)))
    weight = qpoch_inf(qm, q)
    if weight == 0:
        return first
    second = (weight * qpoch_inf(qp * a * b, q) * qpoch_inf(qq * b * x, q)
              / (_inf_den(b, q) * _inf_den(qq * a, q) * _inf_den(qq * x, q))
              * _phi([qp * a, qm / b, qq * x], [qq / b, 0], q, qq))
    return first + second


def _lqjf3(mu, pt, P):
    a, b = P.need("a", "b")
    q = P.q
    x = pt.x
    _nz(b, x)
    qq = q.q
    qm = q.power(-mu)
    first = (qpoch_inf(qq * b * x, q) / _inf_den(q.power(mu + 1) * b * x, q)
             * _phi([qm, qm / b, 0], [qq * a, qm / (b * x)], q, qq, _integer_or_none(mu)))
    weight = qpoch_inf(qm, q)
    if weight == 0:
        return first
    qp2 = q.power(mu + 2)
    second = (weight * qpoch_inf(qp2 * a * b * x, q) * qpoch_inf(qm / b, q)
              / (_inf_den(qq * a, q) * _inf_den(qq * x, q) * _inf_den(qm / (qq * b * x), q))
              * _phi([qq * x, qq * b * x, 0], [qp2 * b * x, qp2 * a * b * x], q, qq))
    return first + second


##### q-Bessel and q^-1-Bessel polynomials, q^-1-Bessel function

def _qb1(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    qq = q.q
    return _phi([qq ** (-n), -qq ** n * a], [0], q, qq * pt.x, n)


def _qb2(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(a, x)
    qq = q.q
    return (-qq ** n * a * x) ** n * _phi([qq ** (-n), 1 / x], [0], q, -qq ** (1 - n) / a, n)


def _qb3(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(x)
    qq = q.q
    pre = qq ** (-binom2(n)) * (-x) ** n * qpoch(1 / x, q, n)
    return pre * _phi([qq ** (-n)], [qq ** (1 - n) * x], q, -qq ** (n + 1) * a * x, n)


def _qb4(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(a, x)
    qq = q.q
    return qq ** (2 * binom2(n)) * (-qq * a) ** n * _phi([qq ** (-n), -qq ** n * a, 1 / x], [], q, -x / a, n)


def _qb5(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(a, x)
    qq = q.q
    pre = qq ** (-binom2(n)) * (-x) ** n * qpoch(1 / x, q, n) * qpoch(-a, q, 2 * n) / _den(-a, q, n)
    return pre * _phi([qq ** (-n), 0, 0], [qq ** (1 - n) * x, -qq ** (1 - 2 * n) / a], q, qq, n)


def _qib1(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    return _phi([qq ** (-n), -qq ** n / a], [], q, -a * pt.x, n)


def _qib2(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(a, x)
    qq = q.q
    return qq ** (-2 * binom2(n)) * (-a * x / qq) ** n * _phi([qq ** (-n), x], [], q, -qq ** (2 * n) / (a * x), n)


def _qib3(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(x)
    qq = q.q
    return qpoch(x, q, n) * _phi([qq ** (-n), 0], [qq ** (1 - n) / x], q, -qq ** (1 - n) * a, n)


def _qib4(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    qq = q.q
    return qq ** (-2 * binom2(n)) * (-a / qq) ** n * _phi([qq ** (-n), -qq ** n / a, pt.x], [0, 0], q, qq, n)


def _qib5(n, pt, P):
    (a,) = P.need("a")
    q = P.q
    x = pt.x
    _nz(a, x)
    qq = q.q
    pre = (qq ** (-3 * binom2(n)) * (a / qq) ** n * qpoch(x, q, n) * qpoch(-1 / a, q, 2 * n)
           / _den(-1 / a, q, n))
    return pre * _phi([qq ** (-n)], [-qq ** (1 - 2 * n) * a, qq ** (1 - n) / x], q,
                      -qq ** (2 - 2 * n) * a / x, n)


def _qibf1(mu, pt, P):
    (a,) = P.need("a")
    q = P.q
    _nz(a)
    ctx = q.ctx
    qq = q.q
    pre = ctx.exp(-2 * binom2(mu) * ctx.log(qq)) * ctx.power(-a / qq, mu)
    return pre * _phi([q.power(-mu), -q.power(mu) / a, pt.x], [0, 0], q, qq, _integer_or_none(mu))


def _inf_den(a, q, tol=None):
    tol = config_for(q).sing_tol if tol is None else tol
    value = qpoch_inf(a, q)
    if abs(value) < tol:
        raise SingularRepresentationError(f"denominator (a;q)_inf vanishes at a={a}")
    return value


def _integer_or_none(mu):
    """Termination degree when a complex degree is a non-negative integer."""
    if isinstance(mu, int):
        return mu if mu >= 0 else None
    if mu.imag == 0 and mu.real >= 0 and mu.real == int(mu.real):
        return int(mu.real)
    return None


##### Registry

@dataclass(frozen=True)
class FamilyInfo:
    name: str
    params: tuple
    reps: dict
    point: str = "z"                 # 'z' (x = (z+1/z)/2) or 'x'
    degree: str = "n"                # 'n' integer, 'mu' complex
    partner: Optional[str] = None    # family obtained by q -> 1/q


FAMILIES = {
    "aw": FamilyInfo("Askey-Wilson", ("a", "b", "c", "d"), {1: _aw1, 2: _aw2, 3: _aw3}),
    "cdqh": FamilyInfo("continuous dual q-Hahn", ("a", "b", "c"),
                       {1: _cdqh1, 2: _cdqh2, 3: _cdqh3, 4: _cdqh4}, partner="cdqih"),
    "cdqih": FamilyInfo("continuous dual q^-1-Hahn", ("a", "b", "c"),
                        {1: _cdqih1, 2: _cdqih2, 3: _cdqih3, 4: _cdqih4}, partner="cdqh"),
    "asc": FamilyInfo("Al-Salam-Chihara", ("a", "b"),
                      {1: _asc1, 2: _asc2, 3: _asc3, 4: _asc4, 5: _asc5}, partner="qiasc"),
    "qiasc": FamilyInfo("q^-1-Al-Salam-Chihara", ("a", "b"),
                        {1: _qiasc1, 2: _qiasc2, 3: _qiasc3, 4: _qiasc4, 5: _qiasc5}, partner="asc"),
    "cbqh": FamilyInfo("continuous big q-Hermite", ("a",),
                       {1: _cbqh1, 2: _cbqh2, 3: _cbqh3, 4: _cbqh4}, partner="cbqih"),
    "cbqih": FamilyInfo("continuous big q^-1-Hermite", ("a",),
                        {1: _cbqih1, 2: _cbqih2, 3: _cbqih3, 4: _cbqih4}, partner="cbqh"),
    "cqh": FamilyInfo("continuous q-Hermite", (), {1: _cqh1}, partner="cqih"),
    "cqih": FamilyInfo("continuous q^-1-Hermite", (), {1: _cqih1}, partner="cqh"),
    "bqj": FamilyInfo("big q-Jacobi polynomial", ("a", "b", "c"), {1: _bqj1, 2: _bqj2, 3: _bqj3}, point="x"),
    "bqjf": FamilyInfo("big q-Jacobi function", ("a", "b", "c"), {1: _bqjf1}, point="x", degree="mu"),
    "lqj": FamilyInfo("little q-Jacobi polynomial", ("a", "b"), {1: _lqj1, 2: _lqj2, 3: _lqj3}, point="x"),
    "lqjf": FamilyInfo("little q-Jacobi function", ("a", "b"), {1: _lqjf1, 2: _lqjf2, 3: _lqjf3},
                       point="x", degree="mu"),
    "qbessel": FamilyInfo("q-Bessel polynomial", ("a",),
                          {1: _qb1, 2: _qb2, 3: _qb3, 4: _qb4, 5: _qb5}, point="x", partner="qibessel"),
    "qibessel": FamilyInfo("q^-1-Bessel polynomial", ("a",),
                           {1: _qib1, 2: _qib2, 3: _qib3, 4: _qib4, 5: _qib5}, point="x", partner="qbessel"),
    "qibesself": FamilyInfo("q^-1-Bessel function", ("a",), {1: _qibf1}, point="x", degree="mu"),
}


def _coerce_point(info, pt, q):
    if info.point == "z":
        if isinstance(pt, PointZ):
            return pt
        if isinstance(pt, PointX):
            raise DomainError(f"{info.name} is evaluated at z, not at x")
        return PointZ.from_z(pt, q)
    if isinstance(pt, PointX):
        return pt
    if isinstance(pt, PointZ):
        raise DomainError(f"{info.name} is evaluated at x, not at z")
    return PointX.from_value(pt, q)


def _coerce_degree(info, degree, q):
    if info.degree == "n":
        return _int_degree(degree)
    if isinstance(degree, int):
        return degree
    return q.convert(degree)


def evaluate(fid, degree, pt, params, fallback=True):
    """Value and representation actually used.

    A singular representation reroutes to the next one, and so does one whose
    sums cancel past the accuracy target. When every usable representation
    cancels, the least cancelling one is summed again on a promoted base.
    """
    if isinstance(fid, str):
        fid = FamilyId(fid)
    info = FAMILIES[fid.id]
    q = params.q
    pt = _coerce_point(info, pt, q)
    degree = _coerce_degree(info, degree, q)
    order = [fid.rep] + [r for r in sorted(info.reps) if r != fid.rep] if fallback else [fid.rep]
    last = None
    cancelling = []
    for rep in order:
        try:
            with track_condition(propagate=False) as log:
                value = info.reps[rep](degree, pt, params)
        except (SingularRepresentationError, ConvergenceError, ZeroDivisionError) as e:
            last = e
            continue
        if is_accurate(log.worst, q):
            note_condition(log.worst)
            return FamilyEval(family=fid.id, rep=rep, degree=degree, value=value,
                              condition=log.worst, prec=q.prec)
        cancelling.append((log.worst, rep, value))
    if not cancelling:
        raise SingularRepresentationError(
            f"every representation of {info.name} is singular at this point: {last}")
    condition, rep, value = min(cancelling, key=lambda c: c[0])
    fn = info.reps[rep]

    def compute(base):
        return fn(degree if isinstance(degree, int) else base.convert(degree), pt.on(base), params.on(base))

    out = gated(compute, q, value=value, condition=condition)
    return FamilyEval(family=fid.id, rep=rep, degree=degree, value=out.value,
                      condition=out.condition, prec=out.prec)


def eval_family(fid, degree, pt, params, fallback=True):
    """Value of the family at degree n (or mu) and point z (or x)."""
    return evaluate(fid, degree, pt, params, fallback).value


def representation_spread(fid_name, degree, pt, params):
    """Largest pairwise relative deviation between the non-singular representations."""
    info = FAMILIES[fid_name]
    values = []
    for rep in sorted(info.reps):
        try:
            values.append(evaluate(FamilyId(fid_name, rep), degree, pt, params, fallback=False).value)
        except (SingularRepresentationError, ConvergenceError):
            continue
    worst = 0.0
    for u, v in itertools.combinations(values, 2):
        worst = max(worst, rel_residual(u, v))
    return worst, len(values)


##### Limit chains

@dataclass(frozen=True)
class LimitEdge:
    parent: str
    child: str
    vanishing: str
    build: Callable                  # (params, eps, degree, pt) -> (parent params, parent point, scale)
    zeroable: bool = False
    rep: int = 1                     # parent representation tried first; one that stays regular in the limit


def _drop(name):
    def build(P, eps, degree, pt):
        return P.with_params(**{name: eps}), pt, None
    return build


def _aw_to_cdqih(P, eps, degree, pt):
    a, b, c = P.need("a", "b", "c")
    qi = P.q.inverse()
    parent = ParamSet.build(qi, a=1 / a, b=1 / b, c=1 / c, d=1 / eps)
    n = degree
    scale = P.q.q ** (-3 * binom2(n)) * (-a * b * c) ** n * eps ** n
    return parent, pt, scale


def _bqj_to_lqj(P, eps, degree, pt):
    a, b = P.need("a", "b")
    c = 1 / eps
    return ParamSet.build(P.q, a=a, b=b, c=c), PointX(x=P.q.q * c * pt.x), None


def _lqj_to_qb(P, eps, degree, pt):
    (a,) = P.need("a")
    return ParamSet.build(P.q, a=eps, b=-a / (P.q.q * eps)), pt, None


def _lqj_to_qib(P, eps, degree, pt):
    (a,) = P.need("a")
    qq = P.q.q
    return ParamSet.build(P.q, a=-1 / (qq * a * eps), b=eps), PointX(x=pt.x / (qq * eps)), None


LIMIT_EDGES = {
    "aw_cdqh": LimitEdge("aw", "cdqh", "d", _drop("d"), zeroable=True),
    "cdqh_asc": LimitEdge("cdqh", "asc", "c", _drop("c"), zeroable=True),
    "asc_cbqh": LimitEdge("asc", "cbqh", "b", _drop("b"), zeroable=True),
    "cbqh_cqh": LimitEdge("cbqh", "cqh", "a", _drop("a"), zeroable=True, rep=4),
    "aw_cdqih": LimitEdge("aw", "cdqih", "d", _aw_to_cdqih),
    "cdqih_qiasc": LimitEdge("cdqih", "qiasc", "c", _drop("c"), zeroable=True),
    "qiasc_cbqih": LimitEdge("qiasc", "cbqih", "b", _drop("b"), zeroable=True),
    "cbqih_cqih": LimitEdge("cbqih", "cqih", "a", _drop("a"), zeroable=True, rep=3),
    "bqj_lqj": LimitEdge("bqj", "lqj", "1/c", _bqj_to_lqj),
    "bqjf_lqjf": LimitEdge("bqjf", "lqjf", "1/c", _bqj_to_lqj),
    "lqj_qbessel": LimitEdge("lqj", "qbessel", "b", _lqj_to_qb),
    "lqj_qibessel": LimitEdge("lqj", "qibessel", "b", _lqj_to_qib),
}


def verify_limit_chain(edge, degree, pt, params, grid=(1e-2, 1e-4, 1e-6)):
    """Residuals between the parent family at a vanishing parameter and the child family."""
    try:
        e = LIMIT_EDGES[edge]
    except KeyError:
        raise DomainError(f"unknown limit edge {edge!r}") from None
    q = params.q
    child_info = FAMILIES[e.child]
    cpt = _coerce_point(child_info, pt, q)
    child = eval_family(e.child, degree, cpt, params)
    out = []
    for eps in grid:
        eps = q.convert(eps)
        if eps == 0 and not e.zeroable:
            raise DomainError(f"edge {edge!r} has no parent at {e.vanishing} = 0")
        parent_params, ppt, scale = e.build(params, eps, degree, cpt)
        value = eval_family(FamilyId(e.parent, e.rep), degree, ppt, parent_params)
        if scale is not None:
            value = value * scale
        out.append(rel_residual(value, child))
    return out


##### q-inversion

def verify_q_inversion(fid, degree, pt, params):
    """Residual of the q -> 1/q identity of a family (left side evaluated at base 1/q)."""
    q = params.q
    qi = q.inverse()
    info = FAMILIES[fid]
    pt = _coerce_point(info, pt, q)
    n = degree
    if fid == "aw":
        a, b, c, d = params.need("a", "b", "c", "d")
        lhs = eval_family("aw", n, pt, params.with_base(qi))
        rhs = (q.q ** (-3 * binom2(n)) * (-a * b * c * d) ** n
               * eval_family("aw", n, pt, ParamSet.build(q, a=1 / a, b=1 / b, c=1 / c, d=1 / d)))
        return rel_residual(lhs, rhs)
    if fid == "bqj":
        a, b, c = params.need("a", "b", "c")
        qq = q.q
        lhs = eval_family("bqj", n, pt, params.with_base(qi))
        pre = qq ** (-binom2(n)) * (-a * b / (qq * c)) ** n * qpoch(qq * c / (a * b), q, n) / qpoch(qq / c, q, n)
        xp = PointX(x=qq * pt.x / a)
        first = pre * eval_family("bqj", n, xp, ParamSet.build(q, a=1 / a, b=1 / b, c=c / (a * b)))
        second = pre * eval_family("bqj", n, xp, ParamSet.build(q, a=c / (a * b), b=1 / c, c=1 / a))
        return max(rel_residual(lhs, first), rel_residual(lhs, second))
    if fid == "lqj":
        a, b = params.need("a", "b")
        lhs = eval_family("lqj", n, pt, params.with_base(qi))
        rhs = eval_family("lqj", n, PointX(x=b * pt.x / q.q), ParamSet.build(q, a=1 / a, b=1 / b))
        return rel_residual(lhs, rhs)
    if info.partner is None:
        raise DomainError(f"no q-inversion identity for {fid!r}")
    lhs = eval_family(fid, n, pt, params.with_base(qi))
    rhs = eval_family(info.partner, n, pt, params)
    return rel_residual(lhs, rhs)


##### Symmetries

def _permutations(fid, params):
    info = FAMILIES[fid]
    if fid in ("bqj", "bqjf"):
        a, b, c = params.need("a", "b", "c")
        return [params.with_params(a=c, b=a * b / c, c=a)]
    if info.point != "z" or len(info.params) < 2:
        return []
    names = info.params
    vals = params.need(*names)
    out = []
    for perm in itertools.permutations(vals):
        if tuple(perm) == tuple(vals):
            continue
        out.append(params.with_params(**dict(zip(names, perm))))
    return out


def verify_symmetries(fid, degree, pt, params):
    """Largest residual over z -> 1/z and the parameter permutations the family admits."""
    info = FAMILIES[fid]
    q = params.q
    base_pt = _coerce_point(info, pt, q)
    ref = eval_family(fid, degree, base_pt, params)
    worst = 0.0
    if info.point == "z":
        inv_pt = PointZ.from_z(1 / base_pt.z, q)
        worst = rel_residual(eval_family(fid, degree, inv_pt, params), ref)
    for perm in _permutations(fid, params):
        worst = max(worst, rel_residual(eval_family(fid, degree, base_pt, perm), ref))
    return worst


##### Connection relations between continuous q- and q^-1-Hermite

def connection_cqH(direction, n, pt, q):
    """Residual of the finite connection sum between H_n(x|q) and H_n(x|1/q)."""
    n = _int_degree(n)
    pt = PointZ.from_z(pt, q) if not isinstance(pt, PointZ) else pt
    P = ParamSet(q=q)
    qq = q.q
    if direction == "q_to_qi":
        target, source, power, sign = "cqh", "cqih", 3, -1
    elif direction == "qi_to_q":
        target, source, power, sign = "cqih", "cqh", 2, 1
    else:
        raise DomainError(f"unknown connection direction {direction!r}")
    total = q.ctx.zero
    for k in range(n // 2 + 1):
        coef = qq ** (power * binom2(k)) * (sign * qq ** (1 - n)) ** k / (qpoch(qq, q, k) * qpoch(qq, q, n - 2 * k))
        total += coef * eval_family(source, n - 2 * k, pt, P)
    total *= qpoch(qq, q, n)
    return rel_residual(total, eval_family(target, n, pt, P))


##### Koelink-Stokman normalizations

def ks_normalization(kind, mu, x, params):
    """Residual of the relations tying the Koelink-Stokman q-Jacobi functions to P_mu and p_mu."""
    q = params.q
    q.require_disk("Koelink-Stokman relations")
    ctx = q.ctx
    qq = q.q
    mu = mu if isinstance(mu, int) else q.convert(mu)
    x = q.convert(x)
    if kind == "bigJ":
        a, b, c = params.need("a", "b", "c")
        sab = ctx.sqrt(a * b)
        ks_a = ctx.sqrt(qq) * sab
        ks_b = ctx.sqrt(qq * a / b)
        ks_c = ctx.sqrt(qq) * sab / c
        ks_mu = q.power(mu) * ctx.sqrt(qq) * sab
        ks_x = -x / (qq * a)
        phi_ks = _phi([ks_a * ks_mu, ks_a / ks_mu, -1 / ks_x], [ks_a * ks_b, ks_a * ks_c], q,
                      -ks_b * ks_c * ks_x, _integer_or_none(mu))
        pmu = eval_family("bqjf", mu, PointX(x=x), params)
        qm, qp = q.power(-mu), q.power(mu + 1)
        first = (qpoch_inf(qp * a * b / c, q) * qpoch_inf(qm / c, q)
                 / (_inf_den(qq * a * b / c, q) * _inf_den(1 / c, q)) * pmu)
        weight = qpoch_inf(qm, q)
        second = 0
        if weight != 0:
            second = (weight * qpoch_inf(x, q) * qpoch_inf(qp * a * b, q) * qpoch_inf(qq * a / c, q)
                      / (_inf_den(qq * a, q) * _inf_den(c, q) * _inf_den(qq * a * b / c, q) * _inf_den(x / c, q))
                      * _phi([qp * a * b / c, qm / c, x / c], [qq / c, qq * a / c], q, qq))
        residual = rel_residual(phi_ks, first + second)
        n = _integer_or_none(mu)
        if n is not None:
            poly = (qq ** (-binom2(n)) * (-qq * c) ** (-n) * qpoch(qq * c, q, n) / qpoch(qq * a * b / c, q, n)
                    * eval_family("bqj", n, PointX(x=x), params))
            residual = max(residual, rel_residual(phi_ks, poly))
        return residual
    if kind == "littleJ":
        a, b = params.need("a", "b")
        ks_a = ctx.sqrt(qq * a * b)
        ks_b = ctx.sqrt(qq * a / b)
        ks_mu = q.power(mu) * ctx.sqrt(qq) * ctx.sqrt(a * b)
        ks_x = -qq * x / ks_b
        phi_ks = _phi([ks_a * ks_mu, ks_a / ks_mu], [ks_a * ks_b], q, -ks_b * ks_x, _integer_or_none(mu))
        return rel_residual(phi_ks, eval_family("lqjf", mu, PointX(x=x), params))
    raise DomainError(f"unknown Koelink-Stokman kind {kind!r}")


##### Degree check

def polynomial_degree_check(fid, n, params, probe="0.3+0.2i"):
    """Interpolate through n+1 nodes in x and compare with direct evaluation at a probe point."""
    info = FAMILIES[fid]
    if info.degree != "n":
        raise DomainError(f"{info.name} is not a polynomial family")
    q = params.q
    ctx = q.ctx
    n = _int_degree(n)
    nodes = [ctx.cos(ctx.pi * (2 * j + 1) / (2 * n + 2)) * ctx.mpf("0.9") for j in range(n + 1)]

    def at(x):
        pt = PointZ.from_x(x, q) if info.point == "z" else PointX(x=x)
        return eval_family(fid, n, pt, params)

    values = [at(x) for x in nodes]
    xp = q.convert(probe)
    interp = ctx.zero
    for j, xj in enumerate(nodes):
        basis = ctx.one
        for k, xk in enumerate(nodes):
            if k != j:
                basis *= (xp - xk) / (xj - xk)
        interp += values[j] * basis
    return rel_residual(interp, at(xp))
