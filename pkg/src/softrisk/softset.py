"""Soft sets built from fuzzy columns by alpha cuts, and their algebra."""
from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Sequence

from .errors import (
    ConfigurationError,
    IncompatibleUniverseError,
    InvariantViolation,
)
from .fuzzify import FuzzyTable, LinguisticVariable, check_grid

Tag = tuple[str, str]

# Above this many cells a product soft set computes cells on access.
EAGER_CELL_LIMIT = 10**6


@dataclass(frozen=True)
class Universe:
    members: tuple[str, ...]
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        index = {m: i for i, m in enumerate(self.members)}
        if len(index) != len(self.members):
            raise ConfigurationError("universe members must be unique")
        object.__setattr__(self, "_index", MappingProxyType(index))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item):
        return item in self._index

    def position(self, member: str) -> int:
        return self._index[member]

    def ordered(self, subset: Iterable[str]) -> list[str]:
        """Members of ``subset`` in universe order."""
        return sorted(subset, key=self._index.__getitem__)

    @property
    def full(self) -> frozenset[str]:
        return frozenset(self.members)


@dataclass(frozen=True)
class SoftSet:
    """A parameterised family: each alpha level maps to a subset of the universe."""

    universe: Universe
    source: Tag
    levels: Mapping[float, frozenset[str]]

    def __post_init__(self):
        items = [(float(a), frozenset(s)) for a, s in self.levels.items()]
        alphas = [a for a, _ in items]
        for a in alphas:
            if not (math.isfinite(a) and 0.0 <= a <= 1.0):
                raise InvariantViolation(f"soft set {self.source}: level {a!r} outside [0, 1]")
        if any(lo >= hi for lo, hi in zip(alphas, alphas[1:])):
            raise InvariantViolation(f"soft set {self.source}: levels not strictly increasing: {alphas}")
        for a, subset in items:
            stray = subset - self.universe.full
            if stray:
                raise InvariantViolation(
                    f"soft set {self.source}: level {a} has members outside the universe: {sorted(stray)}"
                )
        for (a1, s1), (a2, s2) in zip(items, items[1:]):
            if not s2 <= s1:
                raise InvariantViolation(
                    f"soft set {self.source}: level {a2} is not nested in level {a1}"
                )
        object.__setattr__(self, "levels", MappingProxyType(dict(items)))

    @property
    def grid(self) -> tuple[float, ...]:
        return tuple(self.levels)

    def __getitem__(self, alpha: float) -> frozenset[str]:
        return self.levels[alpha]


def alpha_cut(table: FuzzyTable, variable: str, term: str, grid: Sequence[float]) -> SoftSet:
    """Soft set whose level ``a`` holds the patients with membership >= ``a``."""
    check_grid(list(grid), where=f"alpha cut of ({variable}, {term})")
    column = table.column(variable, term)
    levels = {
        float(a): frozenset(p for p in table.universe if column[p] >= a)
        for a in grid
    }
    return SoftSet(Universe(table.universe), (variable, term), levels)


def soft_sets_for(table: FuzzyTable, config: Sequence[LinguisticVariable]) -> dict[Tag, SoftSet]:
    """Alpha-cut every configured term on its own grid, in configuration order."""
    out: dict[Tag, SoftSet] = {}
    for var in config:
        for term in var.terms:
            out[(var.name, term.name)] = alpha_cut(table, var.name, term.name, term.levels)
    return out


def reduce_trivial(s: SoftSet, merge_duplicates: bool = False) -> SoftSet:
    """Drop levels whose set is empty or the whole universe.

    With ``merge_duplicates`` a level whose set equals the previous surviving
    level's set is dropped too, so the lowest alpha of each run is kept.
    """
    full = s.universe.full
    kept: dict[float, frozenset[str]] = {}
    previous = None
    for alpha, subset in s.levels.items():
        if not subset or subset == full:
            continue
        if merge_duplicates and subset == previous:
            continue
        kept[alpha] = subset
        previous = subset
    return SoftSet(s.universe, s.source, kept)


class _LazyCells(Mapping):
    def __init__(self, factors: Sequence[SoftSet], combine):
        self._factors = tuple(factors)
        self._combine = combine

    def __getitem__(self, key):
        if len(key) != len(self._factors):
            raise KeyError(key)
        return self._combine([f.levels[a] for f, a in zip(self._factors, key)])

    def __iter__(self) -> Iterator[tuple[float, ...]]:
        return itertools.product(*(f.grid for f in self._factors))

    def __len__(self):
        return math.prod(len(f.levels) for f in self._factors)


def _intersect(sets):
    return frozenset.intersection(*sets)


def _union(sets):
    return frozenset.union(*sets)


@dataclass(frozen=True, eq=False)
class ProductSoftSet:
    """Cells indexed by one alpha per factor."""

    universe: Universe
    factors: tuple[SoftSet, ...]
    operation: str
    cells: Mapping[tuple[float, ...], frozenset[str]] = field(repr=False)

    @property
    def tags(self) -> tuple[Tag, ...]:
        return tuple(f.source for f in self.factors)

    @property
    def is_lazy(self) -> bool:
        return isinstance(self.cells, _LazyCells)

    def cell_sets(self) -> dict[tuple[float, ...], frozenset[str]]:
        return dict(self.cells.items())


_COMBINERS: dict[str, Callable] = {"and": _intersect, "or": _union}


def product(operation: str, *factors: SoftSet, eager_limit: int = EAGER_CELL_LIMIT) -> ProductSoftSet:
    """AND/OR product of any number of soft sets over a shared universe."""
    if operation not in _COMBINERS:
        raise ValueError(f"unknown soft set operation {operation!r}")
    if not factors:
        raise ValueError("product needs at least one soft set")
    universe = factors[0].universe
    for f in factors[1:]:
        if f.universe != universe:
            raise IncompatibleUniverseError(
                f"soft sets {factors[0].source} and {f.source} are over different universes"
            )
    combine = _COMBINERS[operation]
    lazy = _LazyCells(factors, combine)
    cells: Mapping = lazy if len(lazy) > eager_limit else MappingProxyType(dict(lazy.items()))
    return ProductSoftSet(universe, tuple(factors), operation, cells)


def and_op(a: SoftSet, b: SoftSet) -> ProductSoftSet:
    return product("and", a, b)


def or_op(a: SoftSet, b: SoftSet) -> ProductSoftSet:
    return product("or", a, b)
