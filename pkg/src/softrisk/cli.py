"""Command line entry point.

Exit codes: 0 success, 1 validation error, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import corpus
from .config import DatasetConfig, default_dataset_config, load_config
from .errors import InvariantViolation, StageError, ValidationError
from .fuzzify import PatientRecord
from .pipeline import (
    STAGES,
    labels_from_records,
    load_dataset,
    load_labels,
    load_run,
    read_artifact,
    resume_pipeline,
    risk_model_from_dict,
    run_pipeline,
    save_default_corpus,
)
from .report import DEFAULT_THRESHOLD, write_report
from .rules import diagnose

log = logging.getLogger("softrisk")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _threshold(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 100.0:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 100]")
    return value


def _common(p: argparse.ArgumentParser, data=True, upstream=True) -> None:
    if data:
        p.add_argument("--data", type=Path, help="patient CSV (default: shipped 30-patient corpus)")
    p.add_argument("--config", type=Path, help="variable configuration JSON (default: shipped dengue config)")
    p.add_argument("--labels", type=Path, help="id,label CSV; defaults to the data file's label column")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD,
                   help="risk percentage at or above which a patient counts as positive (default 50)")
    p.add_argument("--merge-duplicate-levels", action="store_true",
                   help="collapse alpha levels whose sets repeat the previous level")
    if upstream:
        p.add_argument("--in", dest="upstream", type=Path,
                       help="resume from this persisted intermediate artifact instead of --data")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softrisk", description="Soft-set rule engine for tabular risk scoring.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for stage, text in (
        ("fuzzify", "compute the membership table"),
        ("softsets", "alpha-cut memberships into soft sets"),
        ("reduce", "drop empty and full-universe levels"),
        ("rules", "enumerate conjunctive rules"),
        ("score", "score rules against labels"),
    ):
        _common(sub.add_parser(stage, help=text), upstream=stage != "fuzzify")

    p = sub.add_parser("run", help="all stages plus report and figures")
    _common(p, upstream=False)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("report", help="report from a persisted run directory")
    p.add_argument("--in", dest="upstream", type=Path, required=True, help="run directory")
    p.add_argument("--out", type=Path, help="output directory (default: the run directory)")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("diagnose", help="risk of new records under a scored model")
    p.add_argument("--model", type=Path, required=True, help="risk_model.json")
    p.add_argument("--config", type=Path)
    p.add_argument("--data", type=Path, help="CSV of records to diagnose")
    p.add_argument("--set", dest="assign", action="append", default=[], metavar="NAME=VALUE",
                   help="inline value for a single record; repeat per variable")
    p.add_argument("--id", default="query", help="id for an inline record")
    p.add_argument("--out", type=Path, help="write the diagnoses CSV here instead of stdout")

    p = sub.add_parser("corpus", help="copy the shipped reference corpus to a directory")
    p.add_argument("--out", type=Path, required=True)
    return parser


def _config(args) -> DatasetConfig:
    return load_config(args.config) if args.config else default_dataset_config()


def _labels(args, records=None):
    if args.labels:
        return load_labels(args.labels)
    if records is not None:
        return labels_from_records(records)
    return None


def _stage_command(args) -> int:
    config = _config(args)
    until = args.command
    out = args.out or Path(".")
    if getattr(args, "upstream", None):
        labels = _labels(args)
        if until == "score" and labels is None:
            raise ValidationError("score needs --labels when resuming from an artifact")
        run = resume_pipeline(args.upstream, config, labels,
                              merge_duplicate_levels=args.merge_duplicate_levels or None,
                              out_dir=out, until=until)
    else:
        records = load_dataset(args.data or corpus.path(corpus.DATASET), config)
        labels = _labels(args, records)
        if until == "score" and labels is None:
            raise ValidationError("score needs labels: pass --labels or a data file with a label column")
        run = run_pipeline(records, config, labels, merge_duplicate_levels=args.merge_duplicate_levels,
                           out_dir=out, until=until)
    for notice in run.notices:
        print(f"notice: {notice}", file=sys.stderr)
    if run.rules is not None:
        print(f"{len(run.rules)} rules kept of {run.candidates} candidates")
    print(f"artifacts written to {out}")
    return 0


def _run(args) -> int:
    config = _config(args)
    records = load_dataset(args.data or corpus.path(corpus.DATASET), config)
    labels = _labels(args, records)
    out = args.out or Path("run")
    run = run_pipeline(records, config, labels, merge_duplicate_levels=args.merge_duplicate_levels, out_dir=out)
    write_report(run, out, args.threshold, figures=not args.no_figures)
    for notice in run.notices:
        print(f"notice: {notice}", file=sys.stderr)
    print((out / "report.txt").read_text(encoding="utf-8"), end="")
    return 0


def _report(args) -> int:
    run = load_run(args.upstream)
    out = args.out or args.upstream
    write_report(run, out, args.threshold, figures=not args.no_figures)
    print((Path(out) / "report.txt").read_text(encoding="utf-8"), end="")
    return 0


def _inline_record(args, config: DatasetConfig) -> PatientRecord:
    values = {}
    for item in args.assign:
        name, sep, raw = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects NAME=VALUE, got {item!r}")
        try:
            values[name.strip()] = float(raw)
        except ValueError:
            raise ValidationError(f"--set {name}: {raw!r} is not a number") from None
    unknown = set(values) - set(config.variable_names)
    if unknown:
        raise ValidationError(f"--set names unknown variable(s): {sorted(unknown)}")
    return PatientRecord(args.id, values)


def _diagnose(args) -> int:
    config = _config(args)
    model = risk_model_from_dict(read_artifact(args.model))
    if args.data and args.assign:
        raise ValidationError("use either --data or --set, not both")
    if args.data:
        records = load_dataset(args.data, config)
    elif args.assign:
        records = [_inline_record(args, config)]
    else:
        raise ValidationError("diagnose needs --data or at least one --set")
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "risk", "rule_ids"])
        for record in records:
            d = diagnose(model, record, config.variables)
            risk = "no-match" if d.risk is None else f"{d.risk:.1f}"
            writer.writerow([d.record_id, risk, " ".join(map(str, d.matched_rules))])
    finally:
        if args.out:
            fh.close()
    return 0


def _corpus(args) -> int:
    for p in save_default_corpus(args.out):
        print(p)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _run, "report": _report, "diagnose": _diagnose, "corpus": _corpus}
    handler = handlers.get(args.command, _stage_command if args.command in STAGES else None)
    try:
        return handler(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.cause, InvariantViolation) else 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
