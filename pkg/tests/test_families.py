import pytest

from qaskey.errors import DomainError, SingularRepresentationError
from qaskey.families import (
    FAMILIES,
    FamilyId,
    ParamSet,
    PointX,
    PointZ,
    connection_cqH,
    eval_family,
    evaluate,
    ks_normalization,
    polynomial_degree_check,
    representation_spread,
    verify_limit_chain,
    verify_q_inversion,
    verify_symmetries,
)
from qaskey.qcore import BaseQ, rel_residual


@pytest.fixture
def q():
    return BaseQ.from_value(0.5)


Z = "1.5+0.5i"


##### Points

def test_point_z_is_stored_outside_the_unit_disk(q):
    inner = PointZ.from_z(0.5, q)
    outer = PointZ.from_z(2, q)

    assert float(inner.z) == 2.0
    assert inner == outer
    assert float(inner.x) == 1.25


def test_point_z_rejects_zero(q):
    with pytest.raises(DomainError):
        PointZ.from_z(0, q)


def test_point_kind_must_match_the_family(q):
    with pytest.raises(DomainError, match="at z, not at x"):
        evaluate("cqh", 1, PointX(x=q.convert(0.3)), ParamSet(q=q))


##### Values

@pytest.mark.parametrize("fid, n, expected", [
    ("cqh", 0, 1.0),
    ("cqh", 1, 2.5),
    ("cqh", 2, 4 + 1.5 + 0.25),
    ("cqih", 2, 4 + 3 + 0.25),
])
def test_continuous_hermite_values(q, fid, n, expected):
    assert float(eval_family(fid, n, 2, ParamSet(q=q)).real) == pytest.approx(expected, rel=1e-14)


def test_big_q_jacobi_function_at_integer_degree_is_the_polynomial(q):
    P = ParamSet.build(q, a=0.4, b=0.3, c=-0.5)
    x = PointX.from_value(0.3, q)

    assert rel_residual(eval_family("bqjf", 2, x, P), eval_family("bqj", 2, x, P)) < 1e-14


def test_missing_parameter_is_named(q):
    with pytest.raises(DomainError, match="missing parameter 'b', 'c'"):
        eval_family("cdqh", 1, 2, ParamSet.build(q, a=0.3))


def test_degree_must_be_a_nonnegative_integer(q):
    with pytest.raises(DomainError, match="integer >= 0"):
        eval_family("cqh", 1.5, 2, ParamSet(q=q))
    with pytest.raises(DomainError, match="integer >= 0"):
        eval_family("cqh", -1, 2, ParamSet(q=q))


def test_unknown_representation_is_rejected():
    with pytest.raises(DomainError, match="has representations"):
        FamilyId("cqh", 2)


def test_singular_representation_falls_back(q):
    P = ParamSet.build(q, a=0.4, b=0, c=0.6)

    result = evaluate(FamilyId("cdqh", 2), 2, Z, P)

    assert result.rep == 1
    with pytest.raises(SingularRepresentationError):
        evaluate(FamilyId("cdqh", 2), 2, Z, P, fallback=False)


@pytest.mark.parametrize("fid, params", [
    ("aw", {"a": 0.4, "b": 0.3, "c": 0.6, "d": 0.25}),
    ("cdqh", {"a": 0.4, "b": 0.3, "c": 0.6}),
    ("cdqih", {"a": 0.4, "b": 0.3, "c": 0.6}),
    ("asc", {"a": 0.4, "b": 0.7}),
    ("qiasc", {"a": 0.4, "b": 0.7}),
    ("cbqh", {"a": 0.4}),
    ("cbqih", {"a": 0.4}),
])
def test_representations_agree_in_z(q, fid, params):
    spread, used = representation_spread(fid, 3, PointZ.from_z(Z, q), ParamSet.build(q, **params))

    assert used == len(FAMILIES[fid].reps)
    assert spread < 1e-10


@pytest.mark.parametrize("fid, params", [
    ("bqj", {"a": 0.4, "b": 0.3, "c": -0.5}),
    ("lqj", {"a": 0.4, "b": 0.3}),
    ("qbessel", {"a": 0.4}),
    ("qibessel", {"a": 0.4}),
])
def test_representations_agree_in_x(q, fid, params):
    spread, used = representation_spread(fid, 3, PointX.from_value(0.3, q), ParamSet.build(q, **params))

    assert used >= 2
    assert spread < 1e-10



Z_PARAMS = [
    ("aw", {"a": 0.4, "b": 0.3, "c": 0.6, "d": 0.25}),
    ("cdqh", {"a": 0.4, "b": 0.3, "c": 0.6}),
    ("cdqih", {"a": 0.4, "b": 0.3, "c": 0.6}),
    ("asc", {"a": 0.4, "b": 0.7}),
    ("qiasc", {"a": 0.4, "b": 0.7}),
    ("cbqh", {"a": 0.4}),
    ("cbqih", {"a": 0.4}),
]
X_PARAMS = [
    ("bqj", {"a": 0.4, "b": 0.3, "c": -0.5}),
    ("lqj", {"a": 0.3, "b": 0.4}),
    ("qbessel", {"a": 0.4}),
    ("qibessel", {"a": 0.4}),
]


@pytest.mark.parametrize("n", range(9))
@pytest.mark.parametrize("fid, params", Z_PARAMS)
def test_representations_agree_in_z_up_to_degree_eight(q, fid, params, n):
    spread, used = representation_spread(fid, n, PointZ.from_z(Z, q), ParamSet.build(q, **params))

    assert used == len(FAMILIES[fid].reps)
    assert spread < 1e-10


@pytest.mark.parametrize("n", range(9))
@pytest.mark.parametrize("fid, params", X_PARAMS)
def test_representations_agree_in_x_up_to_degree_eight(q, fid, params, n):
    spread, used = representation_spread(fid, n, PointX.from_value(0.2, q), ParamSet.build(q, **params))

    assert used >= 2
    assert spread < 1e-10


@pytest.mark.parametrize("n", range(9))
@pytest.mark.parametrize("function, polynomial, params", [
    ("bqjf", "bqj", {"a": 0.4, "b": 0.3, "c": -0.5}),
    ("lqjf", "lqj", {"a": 0.3, "b": 0.4}),
    ("qibesself", "qibessel", {"a": 0.4}),
])
def test_functions_at_integer_degree_are_the_polynomials(q, function, polynomial, params, n):
    P = ParamSet.build(q, **params)
    x = PointX.from_value(0.2, q)

    assert rel_residual(eval_family(function, n, x, P), eval_family(polynomial, n, x, P)) < 1e-10


##### Cancellation

def test_cancelling_representation_is_summed_wider(q):
    P = ParamSet.build(q, a=0.3, b=0.4)
    x = PointX.from_value(0.2, q)

    evals = [evaluate(FamilyId("lqj", rep), 8, x, P, fallback=False) for rep in sorted(FAMILIES["lqj"].reps)]

    assert max(e.prec for e in evals) > q.prec
    for e in evals[1:]:
        assert rel_residual(e.value, evals[0].value) < 1e-10


def test_big_q_jacobi_near_a_zero_matches_wide_precision():
    a, b, c = 0.540046, 0.267694, 0.764273
    for q in (BaseQ.from_value(0.4), BaseQ.from_value(0.5)):
        wide = q.promoted(53)
        value = evaluate("bqj", 6, PointX.from_value(q.q * a, q), ParamSet.build(q, a=a, b=b, c=c))
        reference = eval_family("bqj", 6, PointX.from_value(wide.q * a, wide), ParamSet.build(wide, a=a, b=b, c=c))

        assert rel_residual(value.value, q.narrow(reference)) < 1e-10
        assert value.condition * 2.0 ** -value.prec <= 1e-12


##### Fallback

@pytest.mark.parametrize("fid, rep, degree, pt, params, used", [
    ("aw", 2, 2, Z, {"a": 0.4, "b": 0.3, "c": 0.6, "d": 0}, 1),
    ("cdqih", 1, 2, Z, {"a": 0.4, "b": 0, "c": 0.6}, 2),
    ("asc", 2, 2, Z, {"a": 0.4, "b": 0}, 1),
    ("qiasc", 1, 2, Z, {"a": 0.4, "b": 0}, 2),
    ("cbqh", 1, 2, Z, {"a": 0}, 4),
    ("cbqih", 2, 2, 2, {"a": 0.5}, 1),
    ("bqj", 2, 2, 0, {"a": 0.4, "b": 0.3, "c": -0.5}, 1),
    ("lqj", 3, 2, 0, {"a": 0.4, "b": 0.3}, 1),
    ("lqjf", 3, 1.5, 0, {"a": 0.4, "b": 0.3}, 1),
    ("qbessel", 3, 2, 0, {"a": 0.4}, 1),
    ("qibessel", 3, 2, 0, {"a": 0.4}, 1),
])
def test_every_family_falls_back_from_a_singular_representation(q, fid, rep, degree, pt, params, used):
    P = ParamSet.build(q, **params)

    result = evaluate(FamilyId(fid, rep), degree, pt, P)

    assert result.rep == used
    with pytest.raises(SingularRepresentationError):
        evaluate(FamilyId(fid, rep), degree, pt, P, fallback=False)


def test_big_q_hermite_at_zero_parameter_is_the_continuous_q_hermite(q):
    result = evaluate(FamilyId("cbqh", 1), 5, Z, ParamSet.build(q, a=0))

    assert result.rep == 4
    assert rel_residual(result.value, eval_family("cqh", 5, Z, ParamSet(q=q))) < 1e-12


def test_single_representation_family_reports_the_singularity(q):
    with pytest.raises(SingularRepresentationError, match="every representation"):
        evaluate("qibesself", 1.5, 0.3, ParamSet.build(q, a=0))


##### Relations

@pytest.mark.parametrize("fid, params", [
    ("aw", {"a": 0.4, "b": 0.3, "c": 0.6, "d": 0.25}),
    ("cdqh", {"a": 0.4, "b": 0.3, "c": 0.6}),
    ("asc", {"a": 0.4, "b": 0.7}),
    ("cqh", {}),
])
def test_q_inversion(q, fid, params):
    for n in range(4):
        assert verify_q_inversion(fid, n, Z, ParamSet.build(q, **params)) < 1e-10


def test_symmetries_in_z_and_parameters(q):
    P = ParamSet.build(q, a=0.4, b=0.3, c=0.6)

    assert verify_symmetries("cdqh", 3, Z, P) < 1e-10


def test_limit_chain_residual_shrinks_with_the_parameter(q):
    residuals = verify_limit_chain("cbqh_cqh", 3, Z, ParamSet(q=q))

    assert residuals[0] > residuals[-1]
    assert residuals[-1] < 1e-4


@pytest.mark.parametrize("edge", ["cbqh_cqh", "cbqih_cqih"])
def test_hermite_limit_edges_hold_at_small_parameter(edge):
    q = BaseQ.from_value(0.4)
    z = "0.785+1.614i"

    assert verify_limit_chain(edge, 3, z, ParamSet(q=q), grid=(1e-6,))[0] < 1e-5
    assert verify_limit_chain(edge, 4, z, ParamSet(q=q), grid=(1e-4,))[0] < 1e-3


def test_askey_wilson_limit_edge_to_the_inverse_family(q):
    residuals = verify_limit_chain("aw_cdqih", 4, Z, ParamSet.build(q, a=0.4, b=0.3, c=0.6))

    assert residuals[-1] < 1e-4


def test_unknown_limit_edge(q):
    with pytest.raises(DomainError, match="unknown limit edge"):
        verify_limit_chain("nope", 1, Z, ParamSet(q=q))


@pytest.mark.parametrize("direction", ["q_to_qi", "qi_to_q"])
def test_hermite_connection_sums(q, direction):
    for n in range(6):
        assert connection_cqH(direction, n, Z, q) < 1e-10


def test_polynomial_degree_check(q):
    assert polynomial_degree_check("asc", 3, ParamSet.build(q, a=0.4, b=0.7)) < 1e-9
    with pytest.raises(DomainError, match="not a polynomial"):
        polynomial_degree_check("lqjf", 2, ParamSet.build(q, a=0.4, b=0.3))


@pytest.mark.parametrize("kind, params", [
    ("littleJ", {"a": 0.4, "b": 0.3}),
    ("bigJ", {"a": 0.5, "b": 0.4, "c": -0.6}),
])
def test_koelink_stokman_normalization_at_integer_degree(q, kind, params):
    assert ks_normalization(kind, 2, 0.3, ParamSet.build(q, **params)) < 1e-10
