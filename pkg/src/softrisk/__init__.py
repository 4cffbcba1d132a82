"""Soft-set rule engine: fuzzify records, cut them into soft sets, enumerate
conjunctive rules and score each rule's risk percentage."""
from .config import DatasetConfig, default_dataset_config, load_config, save_config
from .fuzzify import (
    FuzzyTable,
    LinguisticVariable,
    PatientRecord,
    Term,
    TriangularMF,
    default_dengue_config,
    fuzzify_table,
    mf_eval,
    term_memberships,
)
from .pipeline import (
    RunArtifacts,
    load_dataset,
    load_labels,
    load_run,
    resume_pipeline,
    run_pipeline,
    save_dataset,
)
from .report import emit_report, write_report
from .rules import Diagnosis, RiskModel, Rule, classify_corpus, diagnose, enumerate_rules, score_rules
from .softset import ProductSoftSet, SoftSet, Universe, alpha_cut, and_op, or_op, reduce_trivial

__version__ = "0.1.0"

__all__ = [
    "DatasetConfig",
    "default_dataset_config",
    "load_config",
    "save_config",
    "FuzzyTable",
    "LinguisticVariable",
    "PatientRecord",
    "Term",
    "TriangularMF",
    "default_dengue_config",
    "fuzzify_table",
    "mf_eval",
    "term_memberships",
    "RunArtifacts",
    "load_dataset",
    "load_labels",
    "load_run",
    "resume_pipeline",
    "run_pipeline",
    "save_dataset",
    "emit_report",
    "write_report",
    "Diagnosis",
    "RiskModel",
    "Rule",
    "classify_corpus",
    "diagnose",
    "enumerate_rules",
    "score_rules",
    "ProductSoftSet",
    "SoftSet",
    "Universe",
    "alpha_cut",
    "and_op",
    "or_op",
    "reduce_trivial",
]
