"""Triangular membership functions and fuzzification of patient records."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, DuplicateIdError, InvalidGridError, InvalidInputError


@dataclass(frozen=True)
class TriangularMF:
    """Piecewise-linear membership curve.

    Rises on ``[left, apex_lo]``, is 1 on ``[apex_lo, apex_hi]`` and falls on
    ``[apex_hi, right]``. A plain triangle has ``apex_lo == apex_hi``.
    """

    left: float
    apex_lo: float
    apex_hi: float
    right: float

    def __post_init__(self):
        points = (self.left, self.apex_lo, self.apex_hi, self.right)
        if not all(math.isfinite(p) for p in points):
            raise ConfigurationError(f"membership breakpoints must be finite: {points}")
        if not self.left <= self.apex_lo <= self.apex_hi <= self.right:
            raise ConfigurationError(
                f"membership breakpoints must satisfy left <= apex_lo <= apex_hi <= right: {points}"
            )

    @classmethod
    def triangle(cls, left: float, apex: float, right: float) -> "TriangularMF":
        return cls(float(left), float(apex), float(apex), float(right))

    @property
    def is_triangle(self) -> bool:
        return self.apex_lo == self.apex_hi

    def __call__(self, x: float) -> float:
        return mf_eval(self, x)


def mf_eval(mf: TriangularMF, x: float) -> float:
    """Membership degree of ``x``; 0 outside ``[left, right]``."""
    if not math.isfinite(x):
        raise InvalidInputError(f"cannot evaluate membership of non-finite value {x!r}")
    if x < mf.left or x > mf.right:
        return 0.0
    if mf.apex_lo <= x <= mf.apex_hi:
        return 1.0
    if x < mf.apex_lo:
        return (x - mf.left) / (mf.apex_lo - mf.left)
    return (mf.right - x) / (mf.right - mf.apex_hi)


@dataclass(frozen=True)
class Term:
    name: str
    mf: TriangularMF
    levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        check_grid(self.levels, where=f"term {self.name!r}")


def check_grid(grid: Sequence[float], where: str = "grid") -> None:
    """Raise unless ``grid`` is strictly increasing with values in (0, 1]."""
    for alpha in grid:
        if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and 0.0 < alpha <= 1.0):
            raise InvalidGridError(f"{where}: alpha level {alpha!r} outside (0, 1]")
    for lo, hi in zip(grid, grid[1:]):
        if not lo < hi:
            raise InvalidGridError(f"{where}: alpha levels must be strictly increasing, got {list(grid)}")


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    unit: str
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        names = [t.name for t in self.terms]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"variable {self.name!r} has duplicate term names: {names}")

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms)

    def term(self, name: str) -> Term:
        for t in self.terms:
            if t.name == name:
                return t
        raise ConfigurationError(f"variable {self.name!r} has no term {name!r}")


@dataclass(frozen=True)
class PatientRecord:
    id: str
    values: Mapping[str, float]
    label: bool | None = None

    def __post_init__(self):
        for name, value in self.values.items():
            if not math.isfinite(value):
                raise InvalidInputError(f"record {self.id!r}: value of {name!r} is not finite")
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def value(self, variable: str) -> float:
        try:
            return self.values[variable]
        except KeyError:
            raise ConfigurationError(
                f"record {self.id!r} has no value for variable {variable!r}"
            ) from None


@dataclass(frozen=True)
class FuzzyTable:
    """Membership of every (patient, variable, term) triple."""

    universe: tuple[str, ...]
    schema: tuple[tuple[str, tuple[str, ...]], ...]
    entries: Mapping[tuple[str, str, str], float] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "schema", tuple((v, tuple(ts)) for v, ts in self.schema))
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def membership(self, patient: str, variable: str, term: str) -> float:
        try:
            return self.entries[(patient, variable, term)]
        except KeyError:
            raise ConfigurationError(
                f"fuzzy table has no entry for ({patient!r}, {variable!r}, {term!r})"
            ) from None

    def has_term(self, variable: str, term: str) -> bool:
        return any(v == variable and term in ts for v, ts in self.schema)

    def column(self, variable: str, term: str) -> dict[str, float]:
        if not self.has_term(variable, term):
            raise ConfigurationError(f"fuzzy table has no column ({variable!r}, {term!r})")
        return {p: self.entries[(p, variable, term)] for p in self.universe}

    def out_of_support(self) -> list[tuple[str, str]]:
        """(patient, variable) pairs where every term evaluates to zero."""
        flagged = []
        for p in self.universe:
            for variable, terms in self.schema:
                if terms and all(self.entries[(p, variable, t)] == 0.0 for t in terms):
                    flagged.append((p, variable))
        return flagged


def term_memberships(var: LinguisticVariable, x: float) -> dict[str, float]:
    return {t.name: mf_eval(t.mf, x) for t in var.terms}


def fuzzify_table(records: Sequence[PatientRecord], config: Iterable[LinguisticVariable]) -> FuzzyTable:
    config = list(config)
    if not records:
        raise InvalidInputError("cannot fuzzify an empty record list")
    ids = [r.id for r in records]
    seen: set[str] = set()
    for pid in ids:
        if pid in seen:
            raise DuplicateIdError(f"duplicate patient id {pid!r}")
        seen.add(pid)

    entries: dict[tuple[str, str, str], float] = {}
    for record in records:
        for var in config:
            for term, mu in term_memberships(var, record.value(var.name)).items():
                entries[(record.id, var.name, term)] = mu
    schema = tuple((var.name, var.term_names) for var in config)
    return FuzzyTable(tuple(ids), schema, entries)


def _var(name, unit, terms, grids):
    return LinguisticVariable(
        name,
        unit,
        tuple(
            Term(term, TriangularMF.triangle(*points), grids[term])
            for term, points in terms
        ),
    )


QUARTERS = (0.25, 0.5, 0.75, 1.0)
FIFTHS = (0.2, 0.4, 0.6, 0.8, 1.0)
PLATELET_LEVELS = (0.2, 0.55, 0.7, 0.85, 1.0)


def default_dengue_config() -> list[LinguisticVariable]:
    """The five dengue input variables with their membership curves and alpha grids."""
    return [
        _var(
            "age", "years",
            [("child", (2, 9, 16)), ("young", (15, 30, 45)), ("old", (44, 65, 90))],
            {"child": QUARTERS, "young": FIFTHS, "old": FIFTHS},
        ),
        _var(
            "tlc", "cells/uL",
            [("low", (3500, 3750, 4000)), ("medium", (3900, 7450, 11000)), ("high", (10000, 12500, 15000))],
            {"low": FIFTHS, "medium": FIFTHS, "high": FIFTHS},
        ),
        _var(
            "sgot", "U/L",
            [("low", (10, 25, 40)), ("medium", (35, 42, 50)), ("high", (45, 50, 55))],
            {"low": QUARTERS, "medium": QUARTERS, "high": FIFTHS},
        ),
        _var(
            "platelets", "platelets/uL",
            [("low", (3500, 80000, 150000)), ("medium", (140000, 295000, 450000)),
             ("high", (440000, 455000, 470000))],
            {"low": PLATELET_LEVELS, "medium": PLATELET_LEVELS, "high": PLATELET_LEVELS},
        ),
        _var(
            "bp", "mmHg",
            [("low", (120, 127, 134)), ("medium", (127, 144, 161)), ("high", (154, 163, 172))],
            {"low": QUARTERS, "medium": QUARTERS, "high": QUARTERS},
        ),
    ]
