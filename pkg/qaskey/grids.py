"""
qaskey grids.py
Named parameter grids and the Latin-hypercube sampler that turns a grid into
parameter points inside the region a suite declares.
"""

import cmath
from dataclasses import dataclass, field
from typing import Optional

from qaskey.errors import DomainError
from qaskey.qcore import make_context, parse_scalar

__all__ = ["Grid", "Span", "Case", "DEFAULT_GRIDS", "normalize_grids", "resolve_grid", "parse_inline_grid",
           "latin_hypercube", "sample_cases"]


@dataclass
class Grid:
    name: str
    qs: list = field(default_factory=list)           # bases, one sampled block per q
    points: int = 8                                   # sampled points per suite, spread over qs
    nmax: Optional[int] = None                        # degree cap; None keeps each suite's default
    cases: list = field(default_factory=list)         # explicit points: tables with q and parameters


DEFAULT_GRIDS = [
    Grid("default", qs=[0.4, 0.6], points=8),
    Grid("smoke", qs=[0.5], points=1, nmax=2),
]


@dataclass(frozen=True)
class Span:
    """Sampling region of one input: modulus in [lo, hi], argument in `phase` (radians)."""
    lo: float
    hi: float
    phase: tuple = (0.0, 0.0)

    @property
    def dims(self):
        return 2 if self.phase[0] != self.phase[1] else 1

    def value(self, u):
        r = self.lo + u[0] * (self.hi - self.lo)
        if self.dims == 1:
            phase = self.phase[0]
        else:
            phase = self.phase[0] + u[1] * (self.phase[1] - self.phase[0])
        if phase == 0:
            return _rounded(r)
        return _rounded(r * cmath.exp(1j * phase))


@dataclass
class Case:
    key: str
    q: object
    values: dict


def _rounded(v, digits=6):
    if isinstance(v, complex):
        return complex(round(v.real, digits), round(v.imag, digits))
    return round(v, digits)


def _check_number(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ValueError(f"{what} must be a number or a 're+imi' literal")
    if isinstance(value, str):
        try:
            parse_scalar(value, make_context())
        except DomainError as e:
            raise ValueError(f"{what}: {e}") from e
    return value


def _check_base(value, what):
    _check_number(value, what)
    mod = abs(parse_scalar(value, make_context())) if isinstance(value, str) else abs(value)
    if mod == 0 or mod == 1:
        raise ValueError(f"{what}: |q| must be neither 0 nor 1")
    return value


def _count(value, what, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValueError(f"{what} must be an integer >= 0")
    return value


def normalize_grids(grids):
    """Copy and validate grid definitions."""
    normalized = []
    seen = set()
    for index, grid in enumerate(grids):
        name = getattr(grid, "name", None)
        if not isinstance(name, str) or not name:
            raise ValueError(f"grid #{index}: name must be a non-empty string")
        if name in seen:
            raise ValueError(f"grid #{index}: duplicate name {name!r}")
        seen.add(name)

        qs = getattr(grid, "qs", None) or []
        if not isinstance(qs, list):
            raise ValueError(f"grid {name!r}: qs must be a list")
        qs = [_check_base(q, f"grid {name!r}: q #{i}") for i, q in enumerate(qs)]
        points = _count(getattr(grid, "points", 0), f"grid {name!r}: points")
        nmax = _count(getattr(grid, "nmax", None), f"grid {name!r}: nmax", allow_none=True)

        cases = getattr(grid, "cases", None) or []
        if not isinstance(cases, list):
            raise ValueError(f"grid {name!r}: cases must be a list of tables")
        clean = []
        for i, case in enumerate(cases):
            if not isinstance(case, dict):
                raise ValueError(f"grid {name!r}: case #{i} must be a table")
            if "q" not in case:
                raise ValueError(f"grid {name!r}: case #{i} has no q")
            entry = {}
            for key, val in case.items():
                if not isinstance(key, str):
                    raise ValueError(f"grid {name!r}: case #{i} has a non-string key")
                if key == "q":
                    entry[key] = _check_base(val, f"grid {name!r}: case #{i} q")
                else:
                    entry[key] = _check_number(val, f"grid {name!r}: case #{i} {key}")
            clean.append(entry)

        if not clean and (not qs or points == 0):
            raise ValueError(f"grid {name!r} is empty")
        normalized.append(Grid(name=name, qs=qs, points=points, nmax=nmax, cases=clean))
    return normalized


def _inline_value(text):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_inline_grid(text):
    """'q=0.5,a=0.3;q=0.4,a=0.2' -> a grid of explicit cases."""
    cases = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        case = {}
        for item in chunk.split(","):
            key, sep, val = item.partition("=")
            if not sep or not key.strip():
                raise DomainError(f"malformed grid entry {item.strip()!r} (expected name=value)")
            case[key.strip()] = _inline_value(val)
        cases.append(case)
    try:
        (grid,) = normalize_grids([Grid("inline", qs=[], points=0, cases=cases)])
    except ValueError as e:
        raise DomainError(str(e)) from e
    return grid


def resolve_grid(spec, grids):
    """A configured grid by name, or an inline grid."""
    if not spec or not str(spec).strip():
        raise DomainError("empty grid")
    for grid in grids:
        if grid.name == spec:
            return grid
    if "=" in spec:
        return parse_inline_grid(spec)
    raise DomainError(f"unknown grid {spec!r} (known: {', '.join(g.name for g in grids)})")


def latin_hypercube(count, dims, rng):
    """count points in [0,1)^dims, one per stratum in every coordinate."""
    columns = []
    for _ in range(dims):
        strata = list(range(count))
        rng.shuffle(strata)
        columns.append([(s + rng.random()) / count for s in strata])
    return [tuple(col[i] for col in columns) for i in range(count)]


def _draw(spans, u):
    values = {}
    pos = 0
    for name, span in spans.items():
        values[name] = span.value(u[pos:pos + span.dims])
        pos += span.dims
    return values


def sample_cases(grid, spans, rng, accept=None, derive=None, tries=50):
    """Sampled cases of a grid followed by its explicit cases, keyed in a stable order."""
    dims = sum(s.dims for s in spans.values())
    out = []
    qs = grid.qs
    for qi, q in enumerate(qs):
        count = grid.points // len(qs) + (1 if qi < grid.points % len(qs) else 0)
        if dims == 0:
            count = min(count, 1)                                     # nothing to vary at a fixed q
        if count == 0:
            continue
        for i, u in enumerate(latin_hypercube(count, dims, rng)):
            values = _draw(spans, u)
            attempt = 0
            while accept is not None and not accept(q, values):
                attempt += 1
                if attempt > tries:
                    raise DomainError(f"grid {grid.name!r}: no sampled point satisfies the constraints at q={q}")
                values = _draw(spans, tuple(rng.random() for _ in range(dims)))
            if derive is not None:
                values = derive(values)
            out.append(Case(key=f"{grid.name}:{qi:02d}:{i:03d}", q=q, values=values))
    for i, case in enumerate(grid.cases):
        values = {k: v for k, v in case.items() if k != "q"}
        if derive is not None:
            values = derive(values)
        out.append(Case(key=f"{grid.name}:case:{i:03d}", q=case["q"], values=values))
    return out
