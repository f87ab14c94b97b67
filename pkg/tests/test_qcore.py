import cmath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaskey.config import Config, MainConfig
from qaskey.errors import ConvergenceError, DomainError
from qaskey.qcore import (
    BaseQ,
    LatticePoint,
    QCoreConfig,
    binom_identities_check,
    critlim_ratio,
    jackson_qintegral,
    make_context,
    parse_scalar,
    qbinom,
    qpoch,
    qpoch_identity_residuals,
    qpoch_inf,
    qpoch_inf_bounded,
    rel_residual,
    resolve_precision,
    theta,
    theta_bilateral,
)
from qaskey.series import SeriesConfig


def base(q, precision="standard"):
    return BaseQ.from_value(q, precision)


##### Precision and literals

def test_resolve_precision_flag_then_environment_then_default(monkeypatch):
    monkeypatch.setenv("QASKEY_PRECISION", "wide")

    assert resolve_precision("standard") == "standard"
    assert resolve_precision(None) == "wide"
    monkeypatch.delenv("QASKEY_PRECISION")
    assert resolve_precision(None, default="wide") == "wide"
    assert resolve_precision(None) == "standard"


def test_resolve_precision_rejects_unknown_name():
    with pytest.raises(DomainError, match="unknown precision"):
        resolve_precision("quad")


def test_make_context_precision_bits():
    assert make_context("standard").prec == 53
    assert make_context("wide").prec == 106


@pytest.mark.parametrize("text, expected", [
    ("0.25", 0.25),
    ("0.2-0.5i", complex(0.2, -0.5)),
    ("3i", 3j),
    ("-i", -1j),
    ("1e-3+2e-2i", complex(1e-3, 2e-2)),
])
def test_parse_scalar_literals(text, expected):
    value = parse_scalar(text, make_context())

    assert complex(value) == pytest.approx(expected)


def test_parse_scalar_rejects_garbage():
    with pytest.raises(DomainError, match="malformed"):
        parse_scalar("0.3+x", make_context())


##### Base

@pytest.mark.parametrize("q", [0, 1, -1, "0+1i"])
def test_base_rejects_zero_and_unit_circle(q):
    with pytest.raises(DomainError):
        base(q)


def test_base_regime_and_inverse():
    q = base(0.5)
    qi = q.inverse()

    assert q.is_disk
    assert qi.regime == "off-circle"
    assert float(qi.q) == 2.0
    assert qi.ctx is q.ctx


def test_base_carries_kernel_limits_from_config():
    cfg = Config(main=MainConfig(precision="standard"), qcore=QCoreConfig(max_factors=2),
                 series=SeriesConfig(max_terms=7))
    q = BaseQ.from_config(0.9, cfg)

    assert q.series_cfg.max_terms == 7
    with pytest.raises(ConvergenceError, match="2 factors"):
        qpoch_inf(0.5, q)
    assert abs(qpoch_inf(0.5, base(0.9))) > 0                     # another base keeps the default cap


def test_promoted_base_is_wider_and_narrows_back():
    q = base(0.5)
    wide = q.promoted(40)

    assert wide.prec == q.prec + 40
    assert wide.ctx is not q.ctx
    assert wide == q
    third = wide.ctx.mpf(1) / 3
    assert q.narrow(third) == q.ctx.mpf(1) / 3
    assert wide.promoted(-5).prec == wide.prec


def test_lattice_point_value_and_shift():
    q = base(0.5)
    p = LatticePoint(2, 3)

    assert float(p.value(q)) == 0.75
    assert float(p.shifted(-1).value(q)) == 1.5
    assert float(p.inverse().value(q)) == pytest.approx(4 / 3)


##### Products

def test_qpoch_positive_and_negative_index():
    q = base(0.5)

    assert float(qpoch(0.5, q, 2)) == 0.375
    assert float(qpoch(0.25, q, -1)) == 2.0
    assert float(qpoch(0.3, q, 0)) == 1.0


def test_qpoch_hits_lattice_zero():
    q = base(0.5)

    assert qpoch(4, q, 3) == 0


def test_qpoch_negative_index_pole_raises():
    with pytest.raises(DomainError):
        qpoch(0.5, base(0.5), -1)


def test_qbinom_gaussian_polynomial():
    q = base(0.5)

    assert float(qbinom(4, 2, q)) == pytest.approx(1 + 0.5 + 2 * 0.25 + 0.125 + 0.0625)
    with pytest.raises(DomainError):
        qbinom(2, 3, q)


def test_qpoch_inf_needs_disk_and_respects_factor_cap():
    with pytest.raises(DomainError, match="0 < \\|q\\| < 1"):
        qpoch_inf(0.5, base(2))
    with pytest.raises(ConvergenceError):
        qpoch_inf_bounded(0.5, base(0.9), max_factors=2)


def test_qpoch_inf_tail_bound_is_below_truncation_scale():
    q = base(0.5)

    value, tail = qpoch_inf_bounded(0.5, q)

    assert float(value) == pytest.approx(0.2887880950866024, rel=1e-14)
    assert tail < 1e-15


@pytest.mark.parametrize("z", [0.3, 1.7, "0.4+0.9i"])
def test_theta_product_matches_bilateral_sum(z):
    q = base(0.45)

    assert rel_residual(theta(z, q), theta_bilateral(z, q)) < 1e-13


def test_jackson_integral_of_identity_on_unit_interval():
    q = base(0.5)

    assert float(jackson_qintegral(lambda u: u, 0, 1, q)) == pytest.approx(2 / 3, rel=1e-14)


def test_binomial_splittings_hold_for_complex_mu():
    assert binom_identities_check(5, 2, mu=complex(0.3, 0.7)) < 1e-12


def test_critlim_ratio_tends_to_one():
    q = base(0.5, "wide")

    assert abs(critlim_ratio(0.7, q, 4, 1e-12) - 1) < 1e-9


def test_rel_residual_uses_floor_for_two_zeros():
    assert rel_residual(0, 0) == 0.0
    assert rel_residual(1.0, 1.0 + 1e-12) == pytest.approx(1e-12, rel=1e-3)


##### Identities

@settings(max_examples=60, deadline=None)
@given(
    q=st.floats(min_value=0.2, max_value=0.8),
    ra=st.floats(min_value=0.2, max_value=1.5),
    ta=st.floats(min_value=0.3, max_value=2.8),
    rb=st.floats(min_value=0.2, max_value=1.5),
    tb=st.floats(min_value=0.3, max_value=2.8),
    n=st.integers(min_value=0, max_value=5),
    data=st.data(),
)
def test_qpoch_identities_hold_off_the_lattice(q, ra, ta, rb, tb, n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    a = cmath.rect(ra, ta)
    b = cmath.rect(rb, tb)

    residuals = qpoch_identity_residuals(a, b, base(q), n, k)

    assert max(residuals.values()) < 1e-9, residuals


@settings(max_examples=30, deadline=None)
@given(q=st.floats(min_value=1.3, max_value=4.0), n=st.integers(min_value=0, max_value=4))
def test_qpoch_identities_off_circle_base(q, n):
    residuals = qpoch_identity_residuals(complex(0.3, 0.6), complex(-0.5, 0.4), base(q), n, n // 2)

    assert "square_factorisation" not in residuals
    assert max(residuals.values()) < 1e-9, residuals


@settings(max_examples=40, deadline=None)
@given(q=st.floats(min_value=0.1, max_value=0.9), n=st.integers(min_value=0, max_value=12), data=st.data())
def test_qbinom_is_symmetric(q, n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))

    assert rel_residual(qbinom(n, k, base(q)), qbinom(n, n - k, base(q))) < 1e-13
