import random

import pytest

from qaskey.errors import DomainError
from qaskey.grids import (
    DEFAULT_GRIDS,
    Grid,
    Span,
    latin_hypercube,
    normalize_grids,
    parse_inline_grid,
    resolve_grid,
    sample_cases,
)


def test_default_grids_are_valid():
    grids = normalize_grids(DEFAULT_GRIDS)

    assert [g.name for g in grids] == ["default", "smoke"]
    assert grids[0].qs == [0.4, 0.6]
    assert grids[0].points == 8


def test_normalize_grids_rejects_duplicate_names():
    with pytest.raises(ValueError, match="duplicate name"):
        normalize_grids([Grid("a", qs=[0.5]), Grid("a", qs=[0.4])])


@pytest.mark.parametrize("q", [0, 1, -1, 1.0])
def test_normalize_grids_rejects_base_on_unit_circle_or_zero(q):
    with pytest.raises(ValueError, match=r"\|q\|"):
        normalize_grids([Grid("bad", qs=[q])])


def test_normalize_grids_rejects_complex_literal_on_unit_circle():
    with pytest.raises(ValueError, match=r"\|q\|"):
        normalize_grids([Grid("bad", qs=["0+1i"])])


def test_normalize_grids_rejects_negative_points():
    with pytest.raises(ValueError, match="points"):
        normalize_grids([Grid("bad", qs=[0.5], points=-1)])


def test_normalize_grids_rejects_case_without_q():
    with pytest.raises(ValueError, match="has no q"):
        normalize_grids([Grid("bad", points=0, cases=[{"a": 0.3}])])


def test_normalize_grids_rejects_empty_grid():
    with pytest.raises(ValueError, match="empty"):
        normalize_grids([Grid("empty", qs=[], points=8)])
    with pytest.raises(ValueError, match="empty"):
        normalize_grids([Grid("empty", qs=[0.5], points=0)])


def test_parse_inline_grid_builds_explicit_cases():
    grid = parse_inline_grid("q=0.5,a=0.3;q=0.4,a=0.2+0.1i")

    assert grid.name == "inline"
    assert grid.cases == [{"q": 0.5, "a": 0.3}, {"q": 0.4, "a": "0.2+0.1i"}]


def test_parse_inline_grid_rejects_malformed_entry():
    with pytest.raises(DomainError, match="malformed"):
        parse_inline_grid("q=0.5,a")


def test_resolve_grid_by_name_inline_or_error():
    grids = normalize_grids(DEFAULT_GRIDS)

    assert resolve_grid("smoke", grids).nmax == 2
    assert resolve_grid("q=0.5", grids).cases == [{"q": 0.5}]
    with pytest.raises(DomainError, match="unknown grid"):
        resolve_grid("nope", grids)
    with pytest.raises(DomainError, match="empty grid"):
        resolve_grid("", grids)


def test_span_value_is_real_without_phase_and_complex_with_phase():
    assert Span(0.2, 0.6).value((0.5,)) == pytest.approx(0.4)
    assert Span(-0.8, -0.2).value((0.0,)) == pytest.approx(-0.8)

    z = Span(1.0, 2.0, (0.5, 1.0)).value((1.0, 0.0))
    assert isinstance(z, complex)
    assert abs(z) == pytest.approx(2.0, abs=1e-5)


def test_latin_hypercube_hits_every_stratum_once():
    rng = random.Random(1)
    pts = latin_hypercube(10, 3, rng)

    assert len(pts) == 10
    for d in range(3):
        strata = sorted(int(p[d] * 10) for p in pts)
        assert strata == list(range(10))


def test_sample_cases_spreads_points_over_bases_and_keeps_order():
    grid = normalize_grids([Grid("g", qs=[0.4, 0.6], points=5, cases=[{"q": 0.5, "a": 0.3}])])[0]
    spans = {"a": Span(0.2, 0.9)}

    cases = sample_cases(grid, spans, random.Random(7))

    assert [c.key for c in cases] == ["g:00:000", "g:00:001", "g:00:002", "g:01:000", "g:01:001", "g:case:000"]
    assert [c.q for c in cases] == [0.4, 0.4, 0.4, 0.6, 0.6, 0.5]
    assert all(0.2 <= c.values["a"] <= 0.9 for c in cases[:-1])


def test_sample_cases_is_deterministic_for_a_seed():
    grid = normalize_grids([Grid("g", qs=[0.5], points=4)])[0]
    spans = {"a": Span(0.2, 0.9), "z": Span(1.2, 2.0, (0.3, 1.2))}

    first = sample_cases(grid, spans, random.Random("s:1"))
    second = sample_cases(grid, spans, random.Random("s:1"))

    assert [c.values for c in first] == [c.values for c in second]


def test_sample_cases_resamples_rejected_points_and_derives_tied_values():
    grid = normalize_grids([Grid("g", qs=[0.5], points=6)])[0]
    spans = {"a": Span(0.1, 0.9)}

    cases = sample_cases(grid, spans, random.Random(3),
                         accept=lambda q, v: v["a"] > 0.5,
                         derive=lambda v: {**v, "b": -v["a"]})

    assert all(c.values["a"] > 0.5 for c in cases)
    assert all(c.values["b"] == -c.values["a"] for c in cases)


def test_sample_cases_gives_up_when_no_point_is_accepted():
    grid = normalize_grids([Grid("g", qs=[0.5], points=1)])[0]

    with pytest.raises(DomainError, match="no sampled point"):
        sample_cases(grid, {"a": Span(0.1, 0.9)}, random.Random(0), accept=lambda q, v: False)


def test_sample_cases_without_spans_gives_one_case_per_base():
    grid = normalize_grids([Grid("g", qs=[0.4, 0.6], points=8)])[0]

    cases = sample_cases(grid, {}, random.Random(0))

    assert [(c.key, c.q, c.values) for c in cases] == [("g:00:000", 0.4, {}), ("g:01:000", 0.6, {})]
