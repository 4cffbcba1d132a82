"""Conjunctive soft rules: enumeration, risk scoring and diagnosis."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .config import config_digest
from .errors import ConfigurationError, EnumerationError, InvariantViolation, MissingLabelError
from .fuzzify import LinguisticVariable, PatientRecord, term_memberships
from .softset import SoftSet, Tag, Universe

Conjunct = tuple[str, str, float]


@dataclass(frozen=True)
class Rule:
    id: int
    conjuncts: tuple[Conjunct, ...]
    matched: frozenset[str]

    def signature(self) -> str:
        return " & ".join(f"{v}={t}@{a:g}" for v, t, a in self.conjuncts)


@dataclass(frozen=True)
class ScoredRule:
    rule: Rule
    support: int
    positives: int
    risk: float

    @property
    def id(self) -> int:
        return self.rule.id


@dataclass(frozen=True)
class RiskModel:
    rules: tuple[ScoredRule, ...]
    config_digest: str
    universe: Universe

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        seen: set[frozenset[str]] = set()
        for sr in self.rules:
            if sr.support < 1 or sr.support != len(sr.rule.matched):
                raise InvariantViolation(f"rule {sr.id}: support {sr.support} does not match its set")
            if not 0 <= sr.positives <= sr.support:
                raise InvariantViolation(f"rule {sr.id}: positives {sr.positives} out of range")
            if not math.isclose(sr.risk, 100.0 * sr.positives / sr.support, rel_tol=0, abs_tol=1e-12):
                raise InvariantViolation(f"rule {sr.id}: risk {sr.risk} != 100*positives/support")
            if sr.rule.matched in seen:
                raise InvariantViolation(f"rule {sr.id}: duplicate matched set")
            seen.add(sr.rule.matched)

    def rule(self, rule_id: int) -> ScoredRule:
        for sr in self.rules:
            if sr.id == rule_id:
                return sr
        raise KeyError(rule_id)

    def rule_with_matched(self, matched: frozenset[str] | set[str]) -> ScoredRule | None:
        matched = frozenset(matched)
        for sr in self.rules:
            if sr.rule.matched == matched:
                return sr
        return None

    def rule_with_conjuncts(self, conjuncts: Sequence[Conjunct]) -> ScoredRule | None:
        wanted = tuple((v, t, float(a)) for v, t, a in conjuncts)
        for sr in self.rules:
            if sr.rule.conjuncts == wanted:
                return sr
        return None


@dataclass(frozen=True)
class Diagnosis:
    record_id: str
    matched_rules: tuple[int, ...]
    risk: float | None

    @property
    def matched(self) -> bool:
        return self.risk is not None


def _grouped_options(reduced: Mapping[Tag, SoftSet], variables: Sequence[str] | None):
    by_var: dict[str, list[tuple[str, float, frozenset[str]]]] = {}
    for (var, term), s in reduced.items():
        by_var.setdefault(var, [])
        for alpha, subset in s.levels.items():
            by_var[var].append((term, alpha, subset))
    order = list(variables) if variables is not None else list(by_var)
    for var in order:
        if not any(subset for _, _, subset in by_var.get(var, ())):
            raise EnumerationError(f"variable {var!r} has no non-empty soft set level to build rules from")
    return order, [by_var[v] for v in order]


def count_candidates(reduced: Mapping[Tag, SoftSet], variables: Sequence[str] | None = None) -> int:
    _, options = _grouped_options(reduced, variables)
    return math.prod(len(o) for o in options)


def enumerate_rules(
    reduced: Mapping[Tag, SoftSet], variables: Sequence[str] | None = None
) -> list[Rule]:
    """All conjunctions of one (term, alpha) per variable with a non-empty, unique match.

    Candidates are numbered 1.. over the full cartesian product (first
    variable slowest, then term declaration order, then ascending alpha).
    Empty intersections are pruned as soon as they appear; a candidate whose
    matched set repeats an earlier one is folded into the earlier rule.
    """
    order, options = _grouped_options(reduced, variables)
    universes = {s.universe for s in reduced.values()}
    if len(universes) != 1:
        raise EnumerationError("soft sets span more than one universe")
    universe = universes.pop()

    # Bitmasks keep the inner loop cheap; bit i is universe member i.
    masked = [
        [(term, alpha, _mask(universe, subset)) for term, alpha, subset in opts]
        for opts in options
    ]
    strides = [math.prod(len(o) for o in masked[i + 1:]) for i in range(len(masked))]
    full = (1 << len(universe)) - 1

    first_by_mask: dict[int, tuple[int, tuple[Conjunct, ...]]] = {}
    depth = len(masked)
    chosen: list[Conjunct] = []

    def walk(level: int, mask: int, base: int) -> None:
        if level == depth:
            if mask not in first_by_mask:
                first_by_mask[mask] = (base + 1, tuple(chosen))
            return
        stride = strides[level]
        for k, (term, alpha, m) in enumerate(masked[level]):
            nxt = mask & m
            if nxt:
                chosen.append((order[level], term, alpha))
                walk(level + 1, nxt, base + k * stride)
                chosen.pop()

    if depth:
        walk(0, full, 0)

    members = universe.members
    rules = [
        Rule(rid, conjuncts, frozenset(members[i] for i in range(len(members)) if mask >> i & 1))
        for mask, (rid, conjuncts) in first_by_mask.items()
    ]
    rules.sort(key=lambda r: r.id)
    return rules


def _mask(universe: Universe, subset: frozenset[str]) -> int:
    out = 0
    for p in subset:
        out |= 1 << universe.position(p)
    return out


def score_rules(
    rules: Sequence[Rule],
    labels: Mapping[str, bool],
    universe: Universe,
    config_digest: str,
) -> RiskModel:
    scored = []
    for rule in rules:
        positives = 0
        for p in universe.ordered(rule.matched):
            if p not in labels or labels[p] is None:
                raise MissingLabelError(p, rule.id)
            positives += bool(labels[p])
        support = len(rule.matched)
        scored.append(ScoredRule(rule, support, positives, 100.0 * positives / support))
    return RiskModel(tuple(scored), config_digest, universe)


def rule_matches(rule: Rule, memberships: Mapping[str, Mapping[str, float]]) -> bool:
    return all(memberships[v][t] >= a for v, t, a in rule.conjuncts)


def diagnose(model: RiskModel, record: PatientRecord, config: Sequence[LinguisticVariable]) -> Diagnosis:
    """Highest risk among the rules the record satisfies, or no match."""
    if config_digest(config) != model.config_digest:
        raise ConfigurationError("configuration does not match the one the risk model was built with")
    memberships = {var.name: term_memberships(var, record.value(var.name)) for var in config}
    hits = [sr for sr in model.rules if rule_matches(sr.rule, memberships)]
    if not hits:
        return Diagnosis(record.id, (), None)
    return Diagnosis(record.id, tuple(sorted(sr.id for sr in hits)), max(sr.risk for sr in hits))


def best_risks(model: RiskModel) -> dict[str, Diagnosis]:
    """Per-patient diagnosis from matched sets, for patients the model was trained on."""
    hits: dict[str, list[ScoredRule]] = {p: [] for p in model.universe}
    for sr in model.rules:
        for p in sr.rule.matched:
            hits[p].append(sr)
    out = {}
    for p in model.universe:
        rs = hits[p]
        if rs:
            out[p] = Diagnosis(p, tuple(sorted(sr.id for sr in rs)), max(sr.risk for sr in rs))
        else:
            out[p] = Diagnosis(p, (), None)
    return out


def classify_corpus(model: RiskModel, threshold: float) -> dict[str, bool]:
    if not 0.0 <= threshold <= 100.0:
        raise ValueError(f"threshold must lie in [0, 100], got {threshold}")
    return {
        p: d.risk is not None and d.risk >= threshold
        for p, d in best_risks(model).items()
    }
