import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaskey import series
from qaskey.errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    PrecisionError,
    ShapeError,
    SingularRepresentationError,
)
from qaskey.qcore import BaseQ, qpoch, qpoch_inf, rel_residual
from qaskey.series import (
    SUMMATIONS,
    SeriesConfig,
    SeriesSpec,
    apply_transform,
    eprime_q,
    eval_phi,
    eval_summation,
    gated,
    is_accurate,
    note_condition,
    phi,
    promotion_bits,
    relative_noise,
    track_condition,
    verify_limit_transition,
    verify_summation_grid,
)


@pytest.fixture
def q():
    return BaseQ.from_value(0.5)


def terminating_3phi2(q, n=3, arg=0.7):
    return SeriesSpec.build([q.q ** (-n), 0.3, "0.2+0.4i"], [0.6, -0.45], q, arg)


##### Shapes

def test_convergence_class_follows_the_term_exponent(q):
    assert SeriesSpec.build([0.3, 0.4], [0.6], q, 0.5).convergence_class == "disk"
    assert SeriesSpec.build([0.3], [0.6], q, 0.5).convergence_class == "entire"
    assert SeriesSpec.build([0.3, 0.4, 0.2], [0.6], q, 0.5).convergence_class == "divergent"
    assert terminating_3phi2(q).termination == 3


def test_zero_parameters_fold_into_the_padding(q):
    spec = SeriesSpec.build([0.3, 0], [0.6], q, 0.5).normalized()

    assert len(spec.numer) == 1
    assert spec.vdbr_offset == -1
    assert spec.exponent == 0


def test_balanced_and_well_poised(q):
    assert SeriesSpec.build([4.0, 0.3, 0.4], [0.6, 0.4], q, 0.5).is_balanced()
    assert not SeriesSpec.build([4.0, 0.3, 0.4], [0.6, 0.5], q, 0.5).is_balanced()
    assert SeriesSpec.build([0.4, 0.4], [0.5], q, 0.1).is_well_poised()


##### Evaluation

def test_divergent_and_off_disk_series_raise(q):
    with pytest.raises(DivergenceError):
        phi([0.3, 0.4, 0.2], [0.6], q, 0.5)
    with pytest.raises(ConvergenceError, match=r"\|z\| < 1"):
        phi([0.3, 0.4], [0.6], q, 1.2)
    with pytest.raises(DomainError, match="nonterminating"):
        phi([0.3], [], BaseQ.from_value(2.0), 0.5)


def test_denominator_on_the_lattice_raises(q):
    with pytest.raises(SingularRepresentationError):
        phi([q.q ** -3], [q.q ** -1], q, 0.5)


def test_terminating_series_is_exact_either_direction(q):
    spec = terminating_3phi2(q)

    up = eval_phi(spec)
    down = eval_phi(spec, descending=True)

    assert up.klass == "terminating"
    assert up.terms_used == 4
    assert up.tail_bound == 0.0
    assert rel_residual(up.value, down.value) < 1e-14


def test_nonterminating_value_carries_tail_bound(q):
    value = eval_phi(SeriesSpec.build([0.3], [], q, 0.4))

    assert value.klass == "convergent"
    assert value.tail_bound < 1e-15
    assert rel_residual(value.value, qpoch_inf(0.12, q) / qpoch_inf(0.4, q)) < 1e-14


def test_term_cap_travels_with_the_base():
    capped = BaseQ.from_value(0.5, series_cfg=SeriesConfig(max_terms=3))
    plain = BaseQ.from_value(0.5)

    with pytest.raises(ConvergenceError, match="3 terms"):
        phi([0.3], [], capped, 0.9)
    assert rel_residual(phi([0.3], [], plain, 0.9), qpoch_inf(0.27, plain) / qpoch_inf(0.9, plain)) < 1e-13


##### Cancellation and promotion

def test_promotion_bits_cover_the_condition(q):
    assert promotion_bits(1e10, q) == 41
    assert promotion_bits(math.inf, q) == 73
    assert is_accurate(1e3, q)
    assert not is_accurate(1e6, q)
    assert relative_noise(2.0 ** 20, q) == 2.0 ** -33


def test_condition_log_nesting(q):
    with track_condition() as outer:
        with track_condition(propagate=False):
            eval_phi(terminating_3phi2(q))
        assert outer.count == 0

        with track_condition() as inner:
            value = eval_phi(terminating_3phi2(q))

    assert inner.worst == value.condition
    assert outer.count == 1
    assert outer.worst == inner.worst


def near_zero_product(q, n=8, gap=1e-9):
    """1phi0(q^-n; -; q, z) = (q^-n z; q)_n with z just off q^n, where the sum cancels by ~1/gap."""
    z = q.convert(q.q ** n * (1 + gap))

    def compute(b):
        return phi([b.q ** -n], [], b, b.convert(z))
    return compute, qpoch(q.q ** -n * z, q, n)


def test_gated_promotes_a_cancelling_sum(q):
    compute, exact = near_zero_product(q)

    with track_condition() as log:
        out = gated(compute, q)

    assert out.prec > q.prec
    assert out.condition > 1e6
    assert rel_residual(out.value, exact) < 1e-12
    assert is_accurate(log.worst, q)


def test_gated_keeps_a_well_conditioned_sum(q):
    out = gated(lambda b: phi([0.3], [], b, 0.4), q)

    assert out.prec == q.prec
    assert rel_residual(out.value, qpoch_inf(0.12, q) / qpoch_inf(0.4, q)) < 1e-14


def test_gated_returns_an_exact_zero(q):
    def compute(b):
        return phi([b.q ** -1], [], b, b.q)

    assert gated(compute, q).value == 0


def test_gated_gives_up_when_promotion_does_not_help(q):
    def compute(b):
        note_condition(1e-3 * 2.0 ** b.prec)
        return b.q

    with pytest.raises(PrecisionError, match="after 2 promotion"):
        gated(compute, q)


def test_promotion_limits_travel_with_the_base():
    strict = BaseQ.from_value(0.5, series_cfg=SeriesConfig(max_promotions=0))
    compute, _ = near_zero_product(strict)

    with pytest.raises(PrecisionError, match="after 0 promotion"):
        gated(compute, strict)
    assert gated(compute, BaseQ.from_value(0.5)).prec > 53


##### Summations

@pytest.mark.parametrize("sid", sorted(SUMMATIONS))
def test_summation_holds_over_random_points(sid):
    residuals = verify_summation_grid(sid, count=20, seed=1)

    assert len(residuals) == 20
    assert max(residuals) < 1e-9


@pytest.mark.parametrize("sid", ["qchu", "limqchu"])
def test_cancelling_summations_hold_at_full_grid(sid):
    assert max(verify_summation_grid(sid)) < 1e-10


def test_summation_samples_are_reproducible():
    first = [float(abs(lhs)) for _, _, lhs, _ in series.summation_samples("qchu", 5, seed=3)]
    again = [float(abs(lhs)) for _, _, lhs, _ in series.summation_samples("qchu", 5, seed=3)]

    assert first == again


def test_eval_summation_errors(q):
    with pytest.raises(DomainError, match="unknown summation"):
        eval_summation("nope", {}, q)
    with pytest.raises(DomainError, match="missing parameter"):
        eval_summation("qgauss", {"a": 0.5}, q)
    with pytest.raises(DomainError, match=r"\|c\| < \|ab\|"):
        eval_summation("qgauss", {"a": 0.5, "b": 0.5, "c": 0.4}, q)


##### Transformations

def assert_preserved(tid, spec):
    out = apply_transform(tid, spec)
    assert rel_residual(out.value(), eval_phi(spec).value) < 1e-10


@pytest.mark.parametrize("tid", ["none", "inversion", "ivg3", "cor15", "qtopiden"])
def test_terminating_transforms_preserve_value(q, tid):
    assert_preserved(tid, terminating_3phi2(q))


def test_three_phi_two_transforms(q):
    qq = q.q
    n, a, b, c, d = 3, 0.3, 0.7, 0.6, -0.45
    assert_preserved("3phi2term", SeriesSpec.build([qq ** -n, a, b], [c, d], q, qq))
    assert_preserved("3phi2sec", SeriesSpec.build([qq ** -n, a, b], [c, d], q, qq ** n * c * d / (a * b)))


def test_one_phi_zero_padded_transforms(q):
    spec = SeriesSpec.build([0.4], [], q, 0.3, offset=1)

    assert_preserved("trans10101a", spec)
    assert_preserved("trans10101b", spec)


def test_one_phi_one_and_two_phi_two_transforms(q):
    assert_preserved("nt1112", SeriesSpec.build([0.4], [0.7], q, 0.3))
    a, b, c, z = 0.4, 0.3, 0.8, 0.5
    assert_preserved("rel2122", SeriesSpec.build([a, b], [c, a * b * z / c], q, z))


def test_transform_shape_errors(q):
    with pytest.raises(ShapeError, match="unknown transform"):
        apply_transform("nope", terminating_3phi2(q))
    with pytest.raises(ShapeError, match="argument q"):
        apply_transform("3phi2term", terminating_3phi2(q, arg=0.7))
    with pytest.raises(ShapeError, match="terminating"):
        apply_transform("inversion", SeriesSpec.build([0.3, 0.4], [0.6], q, 0.5))


##### Limits

@pytest.mark.parametrize("kind", [1, 3])
def test_limit_transition_residuals_shrink(q, kind):
    residuals = verify_limit_transition(kind, SeriesSpec.build([0.3, 0.5], [0.6], q, 0.4))

    assert residuals[0] > residuals[-1]
    assert residuals[-1] < 1e-4


def test_limit_transition_needs_a_parameter_to_scale(q):
    with pytest.raises(ShapeError):
        verify_limit_transition(2, SeriesSpec.build([0.3], [], q, 0.4))


def test_eprime_is_the_derivative_of_the_euler_product(q):
    h = 1e-5
    t = 0.3
    numeric = (qpoch_inf(-(t + h), q) - qpoch_inf(-(t - h), q)) / (2 * h)

    assert float(eprime_q(0, q)) == pytest.approx(2.0)
    assert rel_residual(eprime_q(t, q), numeric) < 1e-7


@settings(max_examples=30, deadline=None)
@given(perm=st.permutations([0, 1, 2]), dperm=st.permutations([0, 1]))
def test_terminating_series_ignores_parameter_order(perm, dperm):
    q = BaseQ.from_value(0.5)
    spec = terminating_3phi2(q)
    numer = [spec.numer[i] for i in perm]
    denom = [spec.denom[i] for i in dperm]

    shuffled = eval_phi(SeriesSpec.build(numer, denom, q, spec.arg)).value

    assert rel_residual(shuffled, eval_phi(spec).value) < 1e-13
