import threading

import pytest

from qaskey.config import Config
from qaskey.errors import DomainError
from qaskey.grids import DEFAULT_GRIDS, Grid, normalize_grids
from qaskey.suites import SUITES, Outcome, Row, run_suites, select_suites


class FakeLogger:
    def __init__(self):
        self.messages = []
        self._lock = threading.Lock()

    def log(self, msg, level="INFO"):
        with self._lock:
            self.messages.append((level, msg))


@pytest.fixture
def cfg():
    c = Config()
    c.runner.max_workers = 2
    return c


@pytest.fixture
def smoke():
    return [g for g in normalize_grids(DEFAULT_GRIDS) if g.name == "smoke"][0]


def explicit(*cases):
    (grid,) = normalize_grids([Grid("t", points=0, cases=list(cases))])
    return grid


##### Registry

@pytest.mark.parametrize("sid", [
    "qcore.identities",
    "series.qbinom",
    "series.limqchu",
    "families.aw",
    "families.limit.aw_cdqih",
    "families.connection",
    "duality.thm311",
    "duality.dhqinym2",
    "ortho.theta.cqh",
    "ortho.discrete.akporth",
    "ortho.mass.bilateral_6psi6",
    "genfun.master",
    "genfun.master_limits",
    "asym.lem413.critical",
    "asym.lem4.10",
    "asym.darboux.cbqih_I",
])
def test_registry_holds_named_suite(sid):
    assert sid in SUITES
    assert SUITES[sid].tol > 0


def test_select_all_is_sorted_registry():
    assert select_suites("all") == sorted(SUITES)


def test_select_prefix_all_and_exact_id():
    found = select_suites("duality.all")

    assert found
    assert all(s.startswith("duality.") for s in found)
    assert select_suites("asym.lem416") == ["asym.lem416"]


@pytest.mark.parametrize("pattern", ["", "nope", "nope.all", "asym.lem999"])
def test_select_unknown_pattern_raises(pattern):
    with pytest.raises(DomainError):
        select_suites(pattern)


##### Cases

def test_outcome_residual_is_worst_row_unless_judged():
    rows = [Row({"n": 0}, None, None, 1e-12), Row({"n": 1}, None, None, 3e-9)]

    assert Outcome(rows).residual == 3e-9
    assert Outcome(rows, judged=1e-12).residual == 1e-12
    assert Outcome([]).residual == 0.0


def test_unsampled_suite_gives_one_case_that_carries_count_and_seed(smoke):
    (case,) = SUITES["series.qbinom"].cases(smoke, seed=5)

    assert case.key == "smoke:all"
    assert case.q is None
    assert case.values == {"count": 25, "seed": 5}


def test_suite_cases_depend_on_seed_only_through_the_values(smoke):
    suite = SUITES["families.cdqh"]
    first = suite.cases(smoke, seed=1)
    again = suite.cases(smoke, seed=1)
    other = suite.cases(smoke, seed=2)

    assert [c.values for c in first] == [c.values for c in again]
    assert [c.key for c in first] == [c.key for c in other]
    assert [c.values for c in first] != [c.values for c in other]


def test_tied_parameters_are_derived_for_the_critical_case(smoke):
    (case,) = SUITES["asym.lem413.critical"].cases(smoke, seed=0)

    assert case.values["b"] == case.values["a"]


##### Running

def test_run_suites_passes_on_smoke_grid(cfg, smoke):
    logger = FakeLogger()

    results = run_suites(["families.cqh", "series.qbinom"], smoke, cfg, logger)

    assert [r.suite for r in results] == ["families.cqh", "series.qbinom"]
    assert all(r.passed for r in results), [(r.key, r.residual, r.error) for r in results]
    assert len(results[0].rows) == smoke.nmax + 1
    assert ("INFO", "Suite families.cqh: 1 case(s), nmax 2") in logger.messages
    assert ("INFO", "Suite series.qbinom: 1/1 passed") in logger.messages


def test_run_suites_nmax_argument_beats_grid_and_suite(cfg, smoke):
    results = run_suites(["families.cqh"], smoke, cfg, FakeLogger(), nmax=5)

    assert [row.index["n"] for row in results[0].rows] == [0, 1, 2, 3, 4, 5]


def test_run_suites_tolerance_override_fails_case_and_warns(cfg):
    logger = FakeLogger()

    (result,) = run_suites(["families.limit.cbqh_cqh"], explicit({"q": 0.5, "z": 1.5}), cfg, logger, tol=1e-300)

    assert result.passed is False
    assert result.error == ""
    assert result.tol == 1e-300
    assert any(level == "WARNING" and "residual" in msg and "> tol" in msg for level, msg in logger.messages)


def test_run_suites_records_library_errors_per_case(cfg):
    logger = FakeLogger()

    (result,) = run_suites(["qcore.identities"], explicit({"q": 0.5, "b": 0.3}), cfg, logger)

    assert result.passed is False
    assert result.rows == []
    assert "missing input 'a'" in result.error
    assert result.inputs == {"q": 0.5, "b": 0.3}


def test_run_suites_explicit_case_inputs_reach_the_suite(cfg):
    (result,) = run_suites(["qcore.identities"], explicit({"q": 0.5, "a": 0.3, "b": "0.2+0.4i"}), cfg,
                           FakeLogger(), nmax=3)

    assert result.passed, result.residual
    assert {row.index["identity"] for row in result.rows} >= {"shift", "base_inversion", "reflection"}


##### Sampling regions

def grid_named(name):
    return [g for g in normalize_grids(DEFAULT_GRIDS) if g.name == name][0]


@pytest.mark.parametrize("sid", [
    "ortho.discrete.thm248",
    "ortho.discrete.thm314",
    "ortho.discrete.thm316",
    "ortho.closure.thm368",
])
def test_slow_lattice_suites_sample_where_the_sums_settle(sid):
    for name in ("smoke", "default"):
        for case in SUITES[sid].cases(grid_named(name), seed=0):
            assert abs(case.q * case.values["a"]) >= 2, case


def test_index_transform_suites_keep_the_dual_parameters_inside_the_circle():
    grid = grid_named("default")
    for case in SUITES["ortho.index.cobqj"].cases(grid, seed=0):
        q, v = case.q, case.values
        assert max(q * v["a"] * v["b"], q * v["a"] / v["b"], v["c"] ** 2 * q / (v["a"] * v["b"])) < 1
    for case in SUITES["ortho.index.colqj"].cases(grid, seed=0):
        q, v = case.q, case.values
        assert max(q * v["a"] * v["b"], q * v["b"] / v["a"]) < 1


def test_two_term_and_index_suites_pass_on_smoke_grid(cfg, smoke):
    sids = ["ortho.discrete.dcdqiho", "ortho.discrete.thm314", "ortho.index.coqibf"]

    results = run_suites(sids, smoke, cfg, FakeLogger())

    assert all(r.passed for r in results), [(r.suite, r.residual, r.error) for r in results]
