"""Dataset ingestion, artifact persistence and stage orchestration.

A run goes through five stages, each persisted as one JSON artifact in the
run directory::

    fuzzify   -> fuzzy_table.json
    softsets  -> soft_sets.json
    reduce    -> reduced_soft_sets.json
    rules     -> rules.json
    score     -> risk_model.json   (only when labels are supplied)

Every artifact embeds the configuration digest, and any stage can be
restarted from the artifact of the stage before it.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import corpus
from .config import DatasetConfig, default_dataset_config, dumps, load_config, save_config
from .errors import (
    ArtifactError,
    ConfigurationError,
    DatasetParseError,
    DuplicateIdError,
    SoftRiskError,
    StageError,
)
from .fuzzify import FuzzyTable, PatientRecord, fuzzify_table
from .rules import RiskModel, Rule, ScoredRule, count_candidates, enumerate_rules, score_rules
from .softset import SoftSet, Tag, Universe, reduce_trivial, soft_sets_for

log = logging.getLogger(__name__)

STAGES = ("fuzzify", "softsets", "reduce", "rules", "score")
ARTIFACT_FILES = {
    "fuzzify": "fuzzy_table.json",
    "softsets": "soft_sets.json",
    "reduce": "reduced_soft_sets.json",
    "rules": "rules.json",
    "score": "risk_model.json",
}
KINDS = {
    "fuzzy_table": "fuzzify",
    "soft_sets": "softsets",
    "reduced_soft_sets": "reduce",
    "rules": "rules",
    "risk_model": "score",
}
CONFIG_FILE = "config.json"

_TRUE = {"1", "true", "yes"}
_FALSE = {"0", "false", "no"}


# -- ingestion ---------------------------------------------------------------

def _parse_label(text: str, line: int, column: str) -> bool | None:
    t = text.strip().lower()
    if t == "":
        return None
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise DatasetParseError(f"label must be 1 or 0, got {text!r}", line, column)


def load_dataset(path: str | Path, config: DatasetConfig | None = None) -> list[PatientRecord]:
    """Read patient records from a comma-separated file, in file order.

    Without a config every column other than the id and label columns is
    read as a numeric variable.
    """
    id_col = config.id_column if config else "id"
    label_col = config.label_column if config else "label"
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetParseError("file is empty, expected a header row", 1) from None
        if id_col not in header:
            raise DatasetParseError(f"header has no {id_col!r} column", 1)
        if config is None:
            wanted = [h for h in header if h not in (id_col, label_col)]
        else:
            wanted = config.variable_names
        missing = [v for v in wanted if v not in header]
        if missing:
            raise ConfigurationError(f"{path}: dataset has no column for variable(s) {missing}")
        records: list[PatientRecord] = []
        seen: dict[str, int] = {}
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetParseError(f"expected {len(header)} fields, found {len(row)}", line)
            cells = dict(zip(header, (c.strip() for c in row)))
            pid = cells[id_col]
            if not pid:
                raise DatasetParseError("empty patient id", line, id_col)
            if pid in seen:
                raise DuplicateIdError(f"line {line}: duplicate id {pid!r} (first seen on line {seen[pid]})")
            seen[pid] = line
            values = {}
            for name in wanted:
                try:
                    value = float(cells[name])
                except ValueError:
                    raise DatasetParseError(f"value {cells[name]!r} is not a number", line, name) from None
                if not math.isfinite(value):
                    raise DatasetParseError(f"value {cells[name]!r} is not finite", line, name)
                values[name] = value
            label = None
            if label_col is not None and label_col in cells:
                label = _parse_label(cells[label_col], line, label_col)
            records.append(PatientRecord(pid, values, label))
    return records


def _num(value: float) -> str:
    return str(int(value)) if value.is_integer() else repr(value)


def save_dataset(
    records: Sequence[PatientRecord], path: str | Path, config: DatasetConfig | None = None
) -> None:
    """Write records in the format :func:`load_dataset` reads."""
    id_col = config.id_column if config else "id"
    label_col = config.label_column if config else "label"
    names = config.variable_names if config else (list(records[0].values) if records else [])
    with_labels = label_col is not None and any(r.label is not None for r in records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([id_col, *names, *([label_col] if with_labels else [])])
        for r in records:
            row = [r.id, *(_num(r.value(n)) for n in names)]
            if with_labels:
                row.append("" if r.label is None else int(r.label))
            writer.writerow(row)


def load_labels(path: str | Path) -> dict[str, bool]:
    """Read an ``id,label`` file."""
    labels: dict[str, bool] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "label"} <= set(reader.fieldnames):
            raise DatasetParseError("label file needs 'id' and 'label' columns", 1)
        for row in reader:
            line = reader.line_num
            pid = (row["id"] or "").strip()
            if pid in labels:
                raise DuplicateIdError(f"line {line}: duplicate id {pid!r} in label file")
            value = _parse_label(row["label"] or "", line, "label")
            if value is not None:
                labels[pid] = value
    return labels


def labels_from_records(records: Sequence[PatientRecord]) -> dict[str, bool] | None:
    labels = {r.id: r.label for r in records if r.label is not None}
    return labels or None


def dataset_digest(records: Sequence[PatientRecord]) -> str:
    body = [[r.id, dict(r.values)] for r in records]
    return "sha256:" + hashlib.sha256(dumps(body).encode("utf-8")).hexdigest()


def reference_records() -> list[PatientRecord]:
    return load_dataset(corpus.path(corpus.DATASET), default_dataset_config())


def reference_labels() -> dict[str, bool]:
    return load_labels(corpus.path(corpus.LABELS))


# -- artifact encoding -------------------------------------------------------

def _header(kind: str, digest: str) -> dict:
    return {"kind": kind, "config_digest": digest}


def fuzzy_table_to_dict(table: FuzzyTable, digest: str, data_digest: str) -> dict:
    d = _header("fuzzy_table", digest)
    d["dataset_digest"] = data_digest
    d["universe"] = list(table.universe)
    d["schema"] = [{"variable": v, "terms": list(ts)} for v, ts in table.schema]
    d["memberships"] = {
        p: {v: {t: table.entries[(p, v, t)] for t in ts} for v, ts in table.schema}
        for p in table.universe
    }
    return d


def fuzzy_table_from_dict(d: dict) -> FuzzyTable:
    schema = tuple((s["variable"], tuple(s["terms"])) for s in d["schema"])
    entries = {
        (p, v, t): float(d["memberships"][p][v][t])
        for p in d["universe"]
        for v, ts in schema
        for t in ts
    }
    return FuzzyTable(tuple(d["universe"]), schema, entries)


def soft_sets_to_dict(sets: Mapping[Tag, SoftSet], kind: str, digest: str, **extra) -> dict:
    d = _header(kind, digest)
    d.update(extra)
    universe = next(iter(sets.values())).universe if sets else Universe(())
    d["universe"] = list(universe.members)
    d["soft_sets"] = [
        {
            "variable": var,
            "term": term,
            "levels": [{"alpha": a, "members": universe.ordered(s)} for a, s in ss.levels.items()],
        }
        for (var, term), ss in sets.items()
    ]
    return d


def soft_sets_from_dict(d: dict) -> dict[Tag, SoftSet]:
    universe = Universe(tuple(d["universe"]))
    return {
        (e["variable"], e["term"]): SoftSet(
            universe,
            (e["variable"], e["term"]),
            {float(lv["alpha"]): frozenset(lv["members"]) for lv in e["levels"]},
        )
        for e in d["soft_sets"]
    }


def _rule_dict(rule: Rule, universe: Universe) -> dict:
    return {
        "id": rule.id,
        "conjuncts": [{"variable": v, "term": t, "alpha": a} for v, t, a in rule.conjuncts],
        "matched": universe.ordered(rule.matched),
    }


def _rule_from(d: dict) -> Rule:
    return Rule(
        int(d["id"]),
        tuple((c["variable"], c["term"], float(c["alpha"])) for c in d["conjuncts"]),
        frozenset(d["matched"]),
    )


def rules_to_dict(rules: Sequence[Rule], universe: Universe, candidates: int, digest: str) -> dict:
    d = _header("rules", digest)
    d["universe"] = list(universe.members)
    d["candidates"] = candidates
    d["rules"] = [_rule_dict(r, universe) for r in rules]
    return d


def rules_from_dict(d: dict) -> tuple[list[Rule], Universe, int]:
    return [_rule_from(r) for r in d["rules"]], Universe(tuple(d["universe"])), int(d["candidates"])


def risk_model_to_dict(model: RiskModel) -> dict:
    d = _header("risk_model", model.config_digest)
    d["universe"] = list(model.universe.members)
    d["rules"] = []
    for sr in model.rules:
        r = _rule_dict(sr.rule, model.universe)
        r["support"] = sr.support
        r["positives"] = sr.positives
        r["risk"] = round(sr.risk, 1)
        d["rules"].append(r)
    return d


def risk_model_from_dict(d: dict) -> RiskModel:
    scored = []
    for r in d["rules"]:
        rule = _rule_from(r)
        support, positives = int(r["support"]), int(r["positives"])
        risk = 100.0 * positives / support if support else float("nan")
        if round(risk, 1) != float(r["risk"]):
            raise ArtifactError(f"rule {rule.id}: stored risk {r['risk']} disagrees with positives/support")
        scored.append(ScoredRule(rule, support, positives, risk))
    return RiskModel(tuple(scored), d["config_digest"], Universe(tuple(d["universe"])))


def read_artifact(path: str | Path) -> dict:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read artifact {path}: {exc}") from None
    if not isinstance(d, dict) or d.get("kind") not in KINDS:
        raise ArtifactError(f"{path} is not a pipeline artifact")
    return d


# -- running -----------------------------------------------------------------

@dataclass
class RunArtifacts:
    config: DatasetConfig
    dataset_digest: str
    fuzzy_table: FuzzyTable | None = None
    soft_sets: dict[Tag, SoftSet] | None = None
    reduced: dict[Tag, SoftSet] | None = None
    rules: list[Rule] | None = None
    candidates: int | None = None
    risk_model: RiskModel | None = None
    merge_duplicate_levels: bool = False
    notices: list[str] = field(default_factory=list)
    rule_universe: Universe | None = None

    @property
    def config_digest(self) -> str:
        return self.config.digest

    @property
    def universe(self) -> Universe:
        if self.fuzzy_table is not None:
            return Universe(self.fuzzy_table.universe)
        for sets in (self.soft_sets, self.reduced):
            if sets:
                return next(iter(sets.values())).universe
        if self.risk_model is not None:
            return self.risk_model.universe
        if self.rule_universe is not None:
            return self.rule_universe
        raise ArtifactError("run has no universe yet")

    def encoded(self) -> dict[str, str]:
        """Artifact file name -> canonical JSON text, for every completed stage."""
        digest = self.config_digest
        out = {CONFIG_FILE: dumps(self.config.to_dict())}
        if self.fuzzy_table is not None:
            out[ARTIFACT_FILES["fuzzify"]] = dumps(
                fuzzy_table_to_dict(self.fuzzy_table, digest, self.dataset_digest)
            )
        if self.soft_sets is not None:
            out[ARTIFACT_FILES["softsets"]] = dumps(
                soft_sets_to_dict(self.soft_sets, "soft_sets", digest, dataset_digest=self.dataset_digest)
            )
        if self.reduced is not None:
            out[ARTIFACT_FILES["reduce"]] = dumps(
                soft_sets_to_dict(
                    self.reduced, "reduced_soft_sets", digest,
                    dataset_digest=self.dataset_digest,
                    merge_duplicate_levels=self.merge_duplicate_levels,
                )
            )
        if self.rules is not None:
            d = rules_to_dict(self.rules, self.universe, self.candidates or 0, digest)
            d["dataset_digest"] = self.dataset_digest
            out[ARTIFACT_FILES["rules"]] = dumps(d)
        if self.risk_model is not None:
            d = risk_model_to_dict(self.risk_model)
            d["dataset_digest"] = self.dataset_digest
            out[ARTIFACT_FILES["score"]] = dumps(d)
        return out

    def save(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.encoded().items():
            p = out_dir / name
            p.write_text(text, encoding="utf-8")
            written.append(p)
        return written


def _stage(name: str):
    def wrap(fn):
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except SoftRiskError as exc:
                raise StageError(name, exc) from exc
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@_stage("fuzzify")
def stage_fuzzify(records, config: DatasetConfig) -> FuzzyTable:
    return fuzzify_table(records, config.variables)


@_stage("softsets")
def stage_softsets(table: FuzzyTable, config: DatasetConfig) -> dict[Tag, SoftSet]:
    return soft_sets_for(table, config.variables)


@_stage("reduce")
def stage_reduce(sets: Mapping[Tag, SoftSet], merge_duplicate_levels: bool = False) -> dict[Tag, SoftSet]:
    return {tag: reduce_trivial(s, merge_duplicate_levels) for tag, s in sets.items()}


@_stage("rules")
def stage_rules(reduced: Mapping[Tag, SoftSet], config: DatasetConfig) -> tuple[list[Rule], int]:
    names = config.variable_names
    return enumerate_rules(reduced, names), count_candidates(reduced, names)


@_stage("score")
def stage_score(rules, labels, universe: Universe, digest: str) -> RiskModel:
    return score_rules(rules, labels, universe, digest)


def _continue(
    run: RunArtifacts, start: str, labels: Mapping[str, bool] | None, until: str = "score"
) -> RunArtifacts:
    config = run.config
    first, last = STAGES.index(start), STAGES.index(until)

    def wanted(stage: str) -> bool:
        return first <= STAGES.index(stage) <= last

    if wanted("softsets"):
        run.soft_sets = stage_softsets(run.fuzzy_table, config)
    if wanted("reduce"):
        run.reduced = stage_reduce(run.soft_sets, run.merge_duplicate_levels)
    if wanted("rules"):
        run.rules, run.candidates = stage_rules(run.reduced, config)
        log.info("%d candidate rules, %d kept", run.candidates, len(run.rules))
    if wanted("score"):
        if labels is None:
            run.notices.append("scoring skipped: no labels supplied")
            log.warning("no labels supplied; scoring stage skipped")
        else:
            run.risk_model = stage_score(run.rules, labels, run.universe, config.digest)
    return run


def run_pipeline(
    records: Sequence[PatientRecord],
    config: DatasetConfig | None = None,
    labels: Mapping[str, bool] | None = None,
    *,
    merge_duplicate_levels: bool = False,
    out_dir: str | Path | None = None,
    until: str = "score",
) -> RunArtifacts:
    """Run the stages up to ``until``; labels only gate the scoring stage.

    Labels default to the records' own label column when it is present.
    """
    config = config or default_dataset_config()
    if labels is None:
        labels = labels_from_records(records)
    run = RunArtifacts(config, dataset_digest(records), merge_duplicate_levels=merge_duplicate_levels)
    run.fuzzy_table = stage_fuzzify(records, config)
    if until != "fuzzify":
        _continue(run, "softsets", labels, until)
    if out_dir is not None:
        run.save(out_dir)
    return run


def resume_pipeline(
    artifact_path: str | Path,
    config: DatasetConfig,
    labels: Mapping[str, bool] | None = None,
    *,
    merge_duplicate_levels: bool | None = None,
    out_dir: str | Path | None = None,
    until: str = "score",
) -> RunArtifacts:
    """Recompute the stages downstream of a persisted intermediate artifact.

    Only the recomputed artifacts (plus the config) are written to ``out_dir``.
    """
    d = read_artifact(artifact_path)
    if d["config_digest"] != config.digest:
        raise ArtifactError(f"{artifact_path} was produced with a different configuration")
    stage = KINDS[d["kind"]]
    if stage == "score":
        raise ArtifactError("a risk model is the last stage; nothing to resume")
    if STAGES.index(until) <= STAGES.index(stage):
        raise ArtifactError(f"{artifact_path} is already past stage {until!r}")
    merge = d.get("merge_duplicate_levels", False) if merge_duplicate_levels is None else merge_duplicate_levels
    run = RunArtifacts(config, d.get("dataset_digest", ""), merge_duplicate_levels=merge)
    if stage == "fuzzify":
        run.fuzzy_table = fuzzy_table_from_dict(d)
    elif stage == "softsets":
        run.soft_sets = soft_sets_from_dict(d)
    elif stage == "reduce":
        run.reduced = soft_sets_from_dict(d)
    else:
        run.rules, run.rule_universe, run.candidates = rules_from_dict(d)
    _continue(run, STAGES[STAGES.index(stage) + 1], labels, until)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in run.encoded().items():
            if name == CONFIG_FILE or STAGES.index(_stage_of_file(name)) > STAGES.index(stage):
                (out / name).write_text(text, encoding="utf-8")
    return run


def _stage_of_file(name: str) -> str:
    return {v: k for k, v in ARTIFACT_FILES.items()}[name]


def load_run(run_dir: str | Path) -> RunArtifacts:
    """Rebuild a run from the artifacts persisted in ``run_dir``."""
    run_dir = Path(run_dir)
    cfg_path = run_dir / CONFIG_FILE
    if not cfg_path.exists():
        raise ArtifactError(f"{run_dir} has no {CONFIG_FILE}")
    config = load_config(cfg_path)
    run = RunArtifacts(config, "")
    loaded = []
    for stage in STAGES:
        p = run_dir / ARTIFACT_FILES[stage]
        if not p.exists():
            continue
        d = read_artifact(p)
        if d["config_digest"] != config.digest:
            raise ArtifactError(f"{p} does not match {CONFIG_FILE}")
        run.dataset_digest = run.dataset_digest or d.get("dataset_digest", "")
        if stage == "fuzzify":
            run.fuzzy_table = fuzzy_table_from_dict(d)
        elif stage == "softsets":
            run.soft_sets = soft_sets_from_dict(d)
        elif stage == "reduce":
            run.reduced = soft_sets_from_dict(d)
            run.merge_duplicate_levels = bool(d.get("merge_duplicate_levels", False))
        elif stage == "rules":
            run.rules, run.rule_universe, run.candidates = rules_from_dict(d)
        else:
            run.risk_model = risk_model_from_dict(d)
        loaded.append(stage)
    if not loaded:
        raise ArtifactError(f"{run_dir} holds no pipeline artifacts")
    if run.rules is not None and run.risk_model is None:
        run.notices.append("scoring skipped: no labels supplied")
    return run


def save_default_corpus(out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in corpus.FILES:
        target = out_dir / name
        target.write_bytes(corpus.path(name).read_bytes())
        written.append(target)
    return written


__all__ = [
    "RunArtifacts",
    "dataset_digest",
    "load_dataset",
    "load_labels",
    "load_run",
    "save_dataset",
    "reference_labels",
    "reference_records",
    "resume_pipeline",
    "run_pipeline",
    "save_config",
]
