"""Shipped reference corpus: the 30-patient dengue table and its fixtures."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

DATASET = "dengue30.csv"
LABELS = "labels_synthetic.csv"
CONFIG = "default_config.json"
TABLE2 = "table2.json"
DISCREPANCIES = "table2_discrepancies.json"
README = "README.md"

FILES = (DATASET, LABELS, CONFIG, TABLE2, DISCREPANCIES, README)


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(name)))


def printed_table2() -> dict[str, dict[str, dict[str, float]]]:
    """Two-decimal memberships as printed, keyed patient -> variable -> term."""
    return json.loads(path(TABLE2).read_text(encoding="utf-8"))


def discrepancy_list() -> list[dict]:
    return json.loads(path(DISCREPANCIES).read_text(encoding="utf-8"))


def compare_with_printed(table, tolerance: float = 0.01) -> tuple[int, list[dict]]:
    """Check a fuzzy table against the printed memberships.

    Returns the number of printed entries checked and the entries whose
    computed value differs by more than ``tolerance``. Patients absent from
    ``table`` are skipped.
    """
    checked = 0
    off = []
    for pid, by_var in printed_table2().items():
        if pid not in table.universe:
            continue
        for variable, by_term in by_var.items():
            for term, printed in by_term.items():
                checked += 1
                computed = table.membership(pid, variable, term)
                if abs(computed - printed) > tolerance:
                    off.append({
                        "id": pid,
                        "variable": variable,
                        "term": term,
                        "printed": printed,
                        "computed": round(computed, 4),
                    })
    return checked, off
