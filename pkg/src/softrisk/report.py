"""Human-readable report, delimited tables and figures for a pipeline run."""
from __future__ import annotations

import csv
import io
from pathlib import Path

from . import corpus
from .errors import ArtifactError
from .pipeline import RunArtifacts, dataset_digest, reference_records
from .rules import Rule, best_risks, classify_corpus

DEFAULT_THRESHOLD = 50.0

REPORT_FILE = "report.txt"
RULES_CSV = "rules.csv"
PATIENTS_CSV = "patients.csv"
FIGURE_DIR = "figures"


def _conjunct_text(rule: Rule) -> str:
    return " ".join(f"{v}={t}@{a:g}" for v, t, a in rule.conjuncts)


def _fmt_risk(risk: float | None) -> str:
    return "no-match" if risk is None else f"{risk:.1f}"


def is_reference_run(artifacts: RunArtifacts) -> bool:
    return artifacts.dataset_digest == dataset_digest(reference_records())


def emit_report(artifacts: RunArtifacts, threshold: float = DEFAULT_THRESHOLD) -> str:
    """Plain-text report of whatever stages the run has completed."""
    out: list[str] = []
    w = out.append
    cfg = artifacts.config
    w("soft-set risk report")
    w(f"corpus: {cfg.corpus_name}")
    w(f"config digest: {artifacts.config_digest}")
    w(f"dataset digest: {artifacts.dataset_digest or 'unknown'}")
    try:
        w(f"patients: {len(artifacts.universe)}")
    except ArtifactError:
        w("patients: unknown")
    if artifacts.candidates is not None:
        w(f"candidate rules: {artifacts.candidates}")
    if artifacts.rules is not None:
        w(f"rules kept: {len(artifacts.rules)}")
    w(f"merge duplicate levels: {'on' if artifacts.merge_duplicate_levels else 'off'}")
    w(f"threshold: {threshold:.1f}")
    for notice in artifacts.notices:
        w(f"NOTICE: {notice}")

    if artifacts.reduced is not None:
        w("")
        w("== reduced soft sets ==")
        for (var, term), s in artifacts.reduced.items():
            grid = ", ".join(f"{a:g}" for a in s.levels) or "(no informative levels)"
            w(f"{var}/{term}: {{{grid}}}")

    w("")
    w("== rules ==")
    model = artifacts.risk_model
    if artifacts.rules is None:
        w("rule enumeration not run")
    elif not artifacts.rules:
        w("no rules survived pruning")
    elif model is None:
        universe = artifacts.universe
        for rule in artifacts.rules:
            w(f"rule {rule.id}  {_conjunct_text(rule)}  support={len(rule.matched)}"
              f"  matched={','.join(universe.ordered(rule.matched))}")
    else:
        for sr in model.rules:
            w(f"rule {sr.id}  {_conjunct_text(sr.rule)}  support={sr.support} risk={sr.risk:.1f}"
              f" positives={sr.positives}  matched={','.join(model.universe.ordered(sr.rule.matched))}")

    if model is not None:
        w("")
        w("== patients (best matching rule) ==")
        diagnoses = best_risks(model)
        positive = classify_corpus(model, threshold)
        for pid, d in diagnoses.items():
            flag = "positive" if positive[pid] else "negative"
            rules = ",".join(str(i) for i in d.matched_rules) or "-"
            w(f"{pid}  risk={_fmt_risk(d.risk)}  {flag}  rules={rules}")
        w("")
        w("== aggregate ==")
        n_pos = sum(positive.values())
        w(f"positive at threshold {threshold:.1f}: {n_pos} of {len(positive)}")
        w(f"negative at threshold {threshold:.1f}: {len(positive) - n_pos} of {len(positive)}")

    if artifacts.fuzzy_table is not None:
        w("")
        w("== out-of-support values ==")
        flagged = artifacts.fuzzy_table.out_of_support()
        if not flagged:
            w("none")
        for pid, var in flagged:
            w(f"{pid}: every {var} term has zero membership")

        w("")
        w("== printed membership table comparison ==")
        if is_reference_run(artifacts):
            checked, off = corpus.compare_with_printed(artifacts.fuzzy_table)
            w(f"checked {checked} printed entries, {len(off)} differ by more than 0.01")
            for e in off:
                w(f"{e['id']} {e['variable']}/{e['term']}: printed {e['printed']:g}, computed {e['computed']:.4f}")
        else:
            w("not applicable: dataset is not the reference corpus")
    return "\n".join(out) + "\n"


def rules_table(artifacts: RunArtifacts) -> str:
    variables = artifacts.config.variable_names
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rule_id", *variables, "support", "positives", "risk", "matched"])
    model = artifacts.risk_model
    if model is not None:
        rows = [(sr.rule, sr.support, sr.positives, f"{sr.risk:.1f}") for sr in model.rules]
        universe = model.universe
    else:
        rows = [(r, len(r.matched), "", "") for r in artifacts.rules or []]
        universe = artifacts.universe if rows else None
    for rule, support, positives, risk in rows:
        by_var = {v: f"{t}@{a:g}" for v, t, a in rule.conjuncts}
        writer.writerow([rule.id, *(by_var.get(v, "") for v in variables), support, positives, risk,
                         " ".join(universe.ordered(rule.matched))])
    return buf.getvalue()


def patients_table(artifacts: RunArtifacts, threshold: float = DEFAULT_THRESHOLD) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "best_risk", "positive", "rule_ids"])
    model = artifacts.risk_model
    if model is not None:
        positive = classify_corpus(model, threshold)
        for pid, d in best_risks(model).items():
            writer.writerow([pid, _fmt_risk(d.risk), int(positive[pid]),
                             " ".join(str(i) for i in d.matched_rules)])
    return buf.getvalue()


def write_report(
    artifacts: RunArtifacts,
    out_dir: str | Path,
    threshold: float = DEFAULT_THRESHOLD,
    figures: bool = True,
) -> list[Path]:
    """Write report.txt, rules.csv, patients.csv and (optionally) PNG figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        (REPORT_FILE, emit_report(artifacts, threshold)),
        (RULES_CSV, rules_table(artifacts)),
        (PATIENTS_CSV, patients_table(artifacts, threshold)),
    ):
        p = out_dir / name
        p.write_text(text, encoding="utf-8")
        written.append(p)
    if figures:
        from . import plotting

        fig_dir = out_dir / FIGURE_DIR
        fig_dir.mkdir(exist_ok=True)
        written.append(plotting.plot_memberships(artifacts.config.variables, fig_dir / "memberships.png"))
        if artifacts.risk_model is not None and artifacts.risk_model.rules:
            written.append(plotting.plot_rule_risks(artifacts.risk_model, fig_dir / "rule_risks.png"))
            diagnoses = list(best_risks(artifacts.risk_model).values())
            written.append(plotting.plot_patient_risks(diagnoses, threshold, fig_dir / "patient_risks.png"))
    return written
