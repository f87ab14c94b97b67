import math

import pytest

from qaskey.asym import (
    DEFAULT_ASYM,
    LEMMAS,
    AsymLemma,
    AsymReport,
    darboux_from_gf,
    eval_asym,
    lem413_case_gain,
    lem420_exact,
    verify_asym,
    _guarded,
)
from qaskey.errors import DomainError, PoleOrderError, PrecisionError
from qaskey.families import ParamSet, PointZ, eval_family
from qaskey.qcore import BaseQ, LatticePoint, rel_residual
from qaskey.series import note_condition

Z = "1.5+0.5i"


@pytest.fixture
def q():
    return BaseQ.from_value(0.5)


def report(deviations, order):
    grid = list(range(len(deviations)))
    return AsymReport(lemma="x", index_grid=grid, exact=grid, predicted=grid, ratios=grid,
                      deviations=deviations, fitted_error_order=order)


##### Lemma handles

def test_lemma_validation():
    assert AsymLemma("lem413", "lt").case == "lt"
    with pytest.raises(DomainError, match="unknown asymptotic lemma"):
        AsymLemma("lem999")
    with pytest.raises(DomainError, match="needs a case"):
        AsymLemma("lem413")
    with pytest.raises(DomainError, match="has no cases"):
        AsymLemma("lem346", "lt")


def test_every_lemma_grows_one_index():
    assert {info.index for info in LEMMAS.values()} == {"m", "n", "k"}


@pytest.mark.parametrize("order, expected", [(-2.0, True), (-0.8, True), (-0.5, False), (None, True)])
def test_consistent_is_one_sided(order, expected):
    assert report([1e-2, 1e-3], order).consistent() is expected


def test_eventually_decreasing():
    assert report([1.0, 0.5, 0.2, 0.1], -1.0).eventually_decreasing()
    assert not report([1.0, 0.5, 0.2, 0.3], -1.0).eventually_decreasing()


##### Predictions

def test_eval_asym_input_checks(q):
    P = ParamSet.build(q, a=0.5)

    with pytest.raises(DomainError, match=">= 0"):
        eval_asym("lem416", -1, P, fixed=2)
    with pytest.raises(DomainError, match="needs a point z"):
        eval_asym("lem418", 5, P)
    with pytest.raises(DomainError, match="nonzero alpha"):
        eval_asym("lem4.10", 5, ParamSet.build(q, a=0.5, b=0.6, c=0.7), fixed=2)
    with pytest.raises(DomainError, match="lattice point"):
        eval_asym("lem418", 5, P, pt=4)


def test_lattice_growth_of_cbqih(q):
    rep = verify_asym("lem416", range(10, 31), ParamSet.build(q, a=0.5), fixed=2)

    assert rep.lemma == "lem416"
    assert rep.deviations[-1] < 1e-6
    assert rep.consistent()
    assert rep.diagnostics["max_drift"] <= 1e-8


def test_lattice_growth_of_cdqih(q):
    rep = verify_asym("lem346", range(10, 31), ParamSet.build(q, a=0.5, b=0.6, c=0.7), fixed=2)

    assert rep.deviations[-1] < 1e-6
    assert rep.consistent()


@pytest.mark.parametrize("case, a, b", [("lt", 0.3, 0.8), ("gt", 0.8, 0.3)])
def test_al_salam_chihara_dominant_term(q, case, a, b):
    rep = verify_asym("lem413", range(10, 26), ParamSet.build(q, a=a, b=b), pt=Z, case=case)

    assert rep.lemma == f"lem413:{case}"
    assert rep.deviations[-1] < 1e-6
    assert rep.consistent()


def test_al_salam_chihara_case_must_match_parameters(q):
    with pytest.raises(DomainError, match="does not match"):
        verify_asym("lem413", range(10, 12), ParamSet.build(q, a=0.3, b=0.8), pt=Z, case="gt")


def test_equal_modulus_needs_both_terms(q):
    two, single = lem413_case_gain(30, Z, ParamSet.build(q, a=0.5, b=-0.5))

    assert two < 1e-6
    assert two < single


def test_critical_case_error_order(q):
    rep = verify_asym("lem413", range(10, 31), ParamSet.build(q, a=0.5, b=0.5), pt=Z, case="critical")

    assert rep.deviations[-1] < 5e-2
    assert rep.consistent()


##### Exact lattice values

@pytest.mark.parametrize("n, m", [(1, 1), (3, 2), (5, 2), (6, 4)])
def test_lattice_sum_matches_the_polynomial(q, n, m):
    P = ParamSet.build(q, a=0.5)
    pt = PointZ.from_lattice(LatticePoint(-m, P.a), q)

    assert rel_residual(lem420_exact(n, m, P), eval_family("cbqih", n, pt, P)) < 1e-10


def test_lattice_sum_needs_n_at_least_m(q):
    with pytest.raises(DomainError, match="n >= m"):
        lem420_exact(1, 2, ParamSet.build(q, a=0.5))


##### Darboux

def test_darboux_simple_pole_of_cbqih_generating_function(q):
    P = ParamSet.build(q, a=0.5)

    rep = darboux_from_gf("cbqih_I", -2, range(10, 31), Z, P)

    assert rep.diagnostics["order"] == 1
    assert rep.diagnostics["residue_residuals"]["G1"] < 1e-6
    assert rep.deviations[-1] < 1e-6
    assert rep.consistent()


def test_darboux_rejects_regular_points(q):
    P = ParamSet.build(q, a=0.5)

    with pytest.raises(PoleOrderError, match="analyticity"):
        darboux_from_gf("cbqih_I", 0, range(3), Z, P)
    with pytest.raises(PoleOrderError, match="no simple or double pole"):
        darboux_from_gf("cbqih_I", -3, range(3), Z, P)


def test_darboux_double_pole_judges_the_first_residue_where_it_settled(q):
    P = ParamSet.build(q, a=0.477973, b=0.477973)

    rep = darboux_from_gf("cor_delta_gamma", -1 / 0.477973, range(10, 31), Z, P)

    tols = rep.diagnostics["residue_tols"]
    assert rep.diagnostics["order"] == 2
    assert tols["G1"] == pytest.approx(math.sqrt(DEFAULT_ASYM.pole_tol))
    for name, residual in rep.diagnostics["residue_residuals"].items():
        assert residual <= tols[name]


##### Guarded exact values

def third_with_condition(working, guard, skew=0.0):
    def fn(P):
        wide = P.q.prec > 53
        note_condition(guard if wide else working)
        return P.q.ctx.mpf(1) / 3 + (0 if wide else skew)
    return fn


def test_guarded_value_is_replaced_when_the_working_sum_cancels(q):
    P = ParamSet.build(q, a=0.5)

    value, drift = _guarded(third_with_condition(1e9, 1.0, skew=1e-6), P, DEFAULT_ASYM)

    assert float(abs(value - q.ctx.mpf(1) / 3)) < 1e-15
    assert drift < 1e-15


def test_guarded_value_is_kept_when_well_conditioned(q):
    P = ParamSet.build(q, a=0.5)

    value, drift = _guarded(third_with_condition(10.0, 10.0), P, DEFAULT_ASYM)

    assert drift < 1e-15


def test_guarded_value_fails_when_the_guard_run_cancels_too(q):
    P = ParamSet.build(q, a=0.5)

    with pytest.raises(PrecisionError, match="guard bits"):
        _guarded(third_with_condition(1e30, 1e30), P, DEFAULT_ASYM)


def test_guarded_drift_past_tolerance_is_an_error(q):
    P = ParamSet.build(q, a=0.5)

    with pytest.raises(PrecisionError, match="drifted"):
        _guarded(third_with_condition(10.0, 10.0, skew=1e-6), P, DEFAULT_ASYM)
